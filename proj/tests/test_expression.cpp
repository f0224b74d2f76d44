// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/expression.hpp>

#include "oracles/rational_expr.hpp"

#include <gtest/gtest.h>

#include <cmath>

using swirl::eval_expression;

TEST(Calculator, TranscriptResults)
{
    EXPECT_EQ(eval_expression("48 / 2"), "24.0");
    EXPECT_EQ(eval_expression("48 + 24"), "72.0");
}

TEST(Calculator, Precedence)
{
    EXPECT_EQ(eval_expression("2+3*4^2"), "50.0");
    EXPECT_EQ(eval_expression("2^3^2"), "512.0");
    EXPECT_EQ(eval_expression("-2^2"), "-4.0");
    EXPECT_EQ(eval_expression("(-2)^2"), "4.0");
    EXPECT_EQ(eval_expression("2^-1"), "0.5");
    EXPECT_EQ(eval_expression("10 - 4 - 3"), "3.0");
    EXPECT_EQ(eval_expression("100 / 10 / 5"), "2.0");
    EXPECT_EQ(eval_expression("7 % 4 * 2"), "6.0");
}

TEST(Calculator, AlternateSpellings)
{
    EXPECT_EQ(eval_expression("3 \xC3\x97 4"), "12.0");     // ×
    EXPECT_EQ(eval_expression("12 \xC3\xB7 4"), "3.0");     // ÷
    EXPECT_EQ(eval_expression("5 \xE2\x88\x92 7"), "-2.0"); // −
    EXPECT_EQ(eval_expression("2**10"), "1024.0");
}

TEST(Calculator, Decimals)
{
    EXPECT_EQ(eval_expression("0.1 + 0.2"), "0.30000000000000004");
    EXPECT_EQ(eval_expression("1 / 3"), "0.3333333333333333");
    EXPECT_EQ(eval_expression(".5 * 4"), "2.0");
    EXPECT_EQ(eval_expression("-0"), "0.0");
}

TEST(Calculator, ErrorsAreTextNotExceptions)
{
    EXPECT_EQ(eval_expression("1 / 0"), "ERROR: division by zero");
    EXPECT_EQ(eval_expression("5 % 0"), "ERROR: division by zero");
    EXPECT_EQ(eval_expression("(-8)^0.5"), "ERROR: fractional power of negative base");
    EXPECT_EQ(eval_expression("10^400"), "ERROR: non-finite result");
    EXPECT_EQ(eval_expression(""), "ERROR: parse error at offset 0: empty expression");
    EXPECT_EQ(eval_expression("2 +"), "ERROR: parse error at offset 3: dangling operator");
    EXPECT_EQ(eval_expression("(1 + 2"), "ERROR: parse error at offset 0: unbalanced parenthesis");
    EXPECT_EQ(eval_expression("1 + 2)"), "ERROR: parse error at offset 5: unbalanced parenthesis");
    EXPECT_EQ(eval_expression("()"), "ERROR: parse error at offset 1: empty parentheses");
    EXPECT_EQ(eval_expression("2 $ 3"), "ERROR: parse error at offset 2: unexpected character '$'");
}

TEST(Parser, TreeShape)
{
    const auto e = swirl::parse_expression("48 / 2");
    ASSERT_EQ(e->kind, swirl::Expr::Kind::Div);
    EXPECT_EQ(e->lhs->value, 48.0);
    EXPECT_EQ(e->rhs->value, 2.0);
    try
    {
        swirl::parse_expression("1 +* 2");
        FAIL();
    }
    catch (const swirl::ParseError& err)
    {
        EXPECT_EQ(err.offset(), 3u);
    }
}

// Depth 3 here; the depth-4 enumeration runs in the acceptance binary.
TEST(Oracle, ExhaustiveDivisionFreeDepth3)
{
    const auto all = oracle::enumerate_division_free(3);
    ASSERT_EQ(all.size(), 590u);
    for (const auto& e: all)
        ASSERT_EQ(eval_expression(e.text), oracle::integral_text(e.value)) << e.text;
}

TEST(Oracle, RandomConfinedExpressionsWithinOneUlp)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i)
    {
        const auto tree = oracle::random_confined(rng);
        const auto text = oracle::render(*tree);
        const double exact = oracle::value(*tree)->convert_to<double>();
        const double got = swirl::evaluate(*swirl::parse_expression(text));
        EXPECT_LE(std::abs(got - exact), std::abs(std::nextafter(exact, INFINITY) - exact)) << text;
    }
}
