// SPDX-License-Identifier: Apache-2.0
// Reference arithmetic over exact rationals, with its own tree and renderer. Shares nothing with the
// library parser or evaluator.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle
{

using Rational = boost::multiprecision::cpp_rational;

struct Node
{
    char op = 'n'; // 'n' literal, '+', '-', '*', '/', '^', '~' (negation)
    std::int64_t literal = 0;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

using NodePtr = std::shared_ptr<const Node>;

inline NodePtr lit(std::int64_t v)
{
    auto n = std::make_shared<Node>();
    n->literal = v;
    return n;
}

inline NodePtr bin(char op, NodePtr a, NodePtr b)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline NodePtr neg(NodePtr a)
{
    auto n = std::make_shared<Node>();
    n->op = '~';
    n->a = std::move(a);
    return n;
}

inline int precedence(const Node& n)
{
    switch (n.op)
    {
        case '+':
        case '-':
            return 1;
        case '*':
        case '/':
            return 2;
        case '~':
            return 3;
        case '^':
            return 4;
        default:
            return 5;
    }
}

/// Conventional infix with the fewest parentheses the usual rules need.
inline std::string render(const Node& n)
{
    if (n.op == 'n')
        return std::to_string(n.literal);
    const auto wrap = [](const Node& child, bool needed) {
        const auto s = render(child);
        return needed ? "(" + s + ")" : s;
    };
    const int p = precedence(n);
    if (n.op == '~')
        return "-" + wrap(*n.a, precedence(*n.a) < p);
    if (n.op == '^')
        return wrap(*n.a, precedence(*n.a) <= p) + "^" + wrap(*n.b, n.b->op != 'n');
    const bool right_strict = n.op == '-' || n.op == '/';
    return wrap(*n.a, precedence(*n.a) < p) + " " + n.op + " " +
           wrap(*n.b, precedence(*n.b) < p || (right_strict && precedence(*n.b) == p));
}

/// Exact value; empty on division by zero.
inline std::optional<Rational> value(const Node& n)
{
    if (n.op == 'n')
        return Rational(n.literal);
    const auto a = value(*n.a);
    if (!a)
        return std::nullopt;
    if (n.op == '~')
        return Rational(-*a);
    const auto b = value(*n.b);
    if (!b)
        return std::nullopt;
    switch (n.op)
    {
        case '+':
            return Rational(*a + *b);
        case '-':
            return Rational(*a - *b);
        case '*':
            return Rational(*a * *b);
        case '/':
            if (*b == 0)
                return std::nullopt;
            return Rational(*a / *b);
        case '^':
        {
            Rational r = 1;
            for (std::int64_t i = 0; i < n.b->literal; ++i)
                r *= *a;
            return r;
        }
    }
    return std::nullopt;
}

/// "<integer>.0" for integral values, as a calculator transcript prints them.
inline std::string integral_text(const Rational& r)
{
    return boost::multiprecision::numerator(r).str() + ".0";
}

/// Every tree over leaves {1, 2} and operators {+, -, *} with at most `depth` levels (a lone
/// leaf is depth 1), paired with its exact value. Values are built bottom-up from the children.
struct Enumerated
{
    std::string text;
    Rational value;
    int precedence = 5;
};

inline std::vector<Enumerated> enumerate_division_free(int depth)
{
    std::vector<Enumerated> level {{"1", 1, 5}, {"2", 2, 5}};
    for (int d = 2; d <= depth; ++d)
    {
        std::vector<Enumerated> next {{"1", 1, 5}, {"2", 2, 5}};
        next.reserve(2 + 3 * level.size() * level.size());
        for (const auto& a: level)
        {
            for (const auto& b: level)
            {
                const auto left = [&](int p) { return a.precedence < p ? "(" + a.text + ")" : a.text; };
                const auto right = [&](int p, bool strict) {
                    return b.precedence < p || (strict && b.precedence == p) ? "(" + b.text + ")" : b.text;
                };
                next.push_back({left(1) + " + " + right(1, false), a.value + b.value, 1});
                next.push_back({left(1) + " - " + right(1, true), a.value - b.value, 1});
                next.push_back({left(2) + " * " + right(2, false), a.value * b.value, 2});
            }
        }
        level = std::move(next);
    }
    return level;
}

/// Random tree whose every subexpression is an integer of magnitude below 2^50, with at most
/// one division, at the root. The double result can then differ from the exact quotient only by
/// the final rounding.
inline NodePtr random_confined(std::mt19937_64& rng)
{
    const auto bounded = [](const Node& n) {
        const auto v = value(n);
        if (!v)
            return false;
        const Rational limit = Rational(std::int64_t {1} << 50);
        return boost::multiprecision::denominator(*v) == 1 && abs(*v) < limit;
    };
    std::function<NodePtr(int)> grow = [&](int depth) -> NodePtr {
        for (;;)
        {
            NodePtr n;
            const int pick = depth <= 1 ? 0 : static_cast<int>(rng() % 6);
            switch (pick)
            {
                case 0:
                    n = lit(static_cast<std::int64_t>(rng() % 100));
                    break;
                case 1:
                    n = bin('+', grow(depth - 1), grow(depth - 1));
                    break;
                case 2:
                    n = bin('-', grow(depth - 1), grow(depth - 1));
                    break;
                case 3:
                    n = bin('*', grow(depth - 1), grow(depth - 1));
                    break;
                case 4:
                    n = neg(grow(depth - 1));
                    break;
                default:
                    n = bin('^', grow(depth - 1), lit(static_cast<std::int64_t>(rng() % 4)));
                    break;
            }
            if (bounded(*n))
                return n;
        }
    };
    for (;;)
    {
        auto numerator = grow(4);
        if (rng() % 4 == 0)
            return numerator;
        auto denominator = grow(3);
        const auto d = value(*denominator);
        if (d && *d != 0)
            return bin('/', numerator, denominator);
    }
}

} // namespace oracle
