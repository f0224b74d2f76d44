// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace swirl
{

/// Arithmetic expression tree.
///
/// Grammar, loosest binding first:
///
///     sum     := product (('+' | '-') product)*
///     product := unary (('*' | '/' | '%') unary)*
///     unary   := ('-' | '+') unary | power
///     power   := primary ('^' unary)?          right associative
///     primary := number | '(' sum ')'
///
/// `**`, `×`, `÷` and `−` are accepted as spellings of `^`, `*`, `/` and `-`.
struct Expr
{
    enum class Kind
    {
        Number,
        Neg,
        Add,
        Sub,
        Mul,
        Div,
        Mod,
        Pow,
    };

    Kind kind = Kind::Number;
    double value = 0.0; // Number only
    std::unique_ptr<Expr> lhs;
    std::unique_ptr<Expr> rhs; // binary only

    static std::unique_ptr<Expr> number(double v);
    static std::unique_ptr<Expr> unary(Kind kind, std::unique_ptr<Expr> operand);
    static std::unique_ptr<Expr> binary(Kind kind, std::unique_ptr<Expr> lhs, std::unique_ptr<Expr> rhs);
};

/// Throws ParseError with the byte offset of the problem.
std::unique_ptr<Expr> parse_expression(std::string_view text);

/// Evaluates in double precision. Throws EvalError on division by zero, fractional power of a
/// negative base, or a non-finite result.
double evaluate(const Expr& expr);

class EvalError: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Integral values render as "<integer>.0"; others as the shortest round-trip decimal.
std::string format_number(double value);

/// Calculator tool: never throws; failures become "ERROR: <reason>".
std::string eval_expression(std::string_view text);

} // namespace swirl
