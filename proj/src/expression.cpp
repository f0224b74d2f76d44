// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/expression.hpp>

#include <charconv>
#include <cmath>

namespace swirl
{

std::unique_ptr<Expr> Expr::number(double v)
{
    auto e = std::make_unique<Expr>();
    e->kind = Kind::Number;
    e->value = v;
    return e;
}

std::unique_ptr<Expr> Expr::unary(Kind kind, std::unique_ptr<Expr> operand)
{
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->lhs = std::move(operand);
    return e;
}

std::unique_ptr<Expr> Expr::binary(Kind kind, std::unique_ptr<Expr> lhs, std::unique_ptr<Expr> rhs)
{
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

namespace
{

enum class Tok
{
    End,
    Number,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Caret,
    LParen,
    RParen,
};

class Parser
{
  public:
    explicit Parser(std::string_view text): _text(text) { advance(); }

    std::unique_ptr<Expr> parse()
    {
        if (_tok == Tok::End)
            throw ParseError(_tok_start, "empty expression");
        auto e = sum();
        if (_tok == Tok::RParen)
            throw ParseError(_tok_start, "unbalanced parenthesis");
        if (_tok != Tok::End)
            throw ParseError(_tok_start, "unexpected token");
        return e;
    }

  private:
    std::string_view _text;
    std::size_t _pos = 0;
    std::size_t _tok_start = 0;
    Tok _tok = Tok::End;
    double _number = 0.0;

    bool consume(std::string_view s)
    {
        if (_text.substr(_pos).starts_with(s))
        {
            _pos += s.size();
            return true;
        }
        return false;
    }

    void advance()
    {
        while (_pos < _text.size() && (_text[_pos] == ' ' || _text[_pos] == '\t' || _text[_pos] == '\n' || _text[_pos] == '\r'))
            ++_pos;
        _tok_start = _pos;
        if (_pos >= _text.size())
        {
            _tok = Tok::End;
            return;
        }

        const char c = _text[_pos];
        if ((c >= '0' && c <= '9') || c == '.')
        {
            lex_number();
            return;
        }
        if (consume("**") || consume("^"))
            _tok = Tok::Caret;
        else if (consume("+"))
            _tok = Tok::Plus;
        else if (consume("-") || consume("\xE2\x88\x92"))
            _tok = Tok::Minus;
        else if (consume("*") || consume("\xC3\x97"))
            _tok = Tok::Star;
        else if (consume("/") || consume("\xC3\xB7"))
            _tok = Tok::Slash;
        else if (consume("%"))
            _tok = Tok::Percent;
        else if (consume("("))
            _tok = Tok::LParen;
        else if (consume(")"))
            _tok = Tok::RParen;
        else
            throw ParseError(_pos, std::string("unexpected character '") + c + "'");
    }

    void lex_number()
    {
        const auto start = _pos;
        bool digits = false;
        while (_pos < _text.size() && _text[_pos] >= '0' && _text[_pos] <= '9')
        {
            ++_pos;
            digits = true;
        }
        if (_pos < _text.size() && _text[_pos] == '.')
        {
            ++_pos;
            while (_pos < _text.size() && _text[_pos] >= '0' && _text[_pos] <= '9')
            {
                ++_pos;
                digits = true;
            }
        }
        if (!digits)
            throw ParseError(start, "malformed number");
        const auto literal = _text.substr(start, _pos - start);
        auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), _number);
        if (ec != std::errc() || !std::isfinite(_number))
            throw ParseError(start, "number out of range");
        _tok = Tok::Number;
    }

    std::unique_ptr<Expr> sum()
    {
        auto lhs = product();
        while (_tok == Tok::Plus || _tok == Tok::Minus)
        {
            const auto kind = _tok == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
            advance();
            lhs = Expr::binary(kind, std::move(lhs), product());
        }
        return lhs;
    }

    std::unique_ptr<Expr> product()
    {
        auto lhs = unary();
        while (_tok == Tok::Star || _tok == Tok::Slash || _tok == Tok::Percent)
        {
            const auto kind = _tok == Tok::Star ? Expr::Kind::Mul : _tok == Tok::Slash ? Expr::Kind::Div : Expr::Kind::Mod;
            advance();
            lhs = Expr::binary(kind, std::move(lhs), unary());
        }
        return lhs;
    }

    std::unique_ptr<Expr> unary()
    {
        if (_tok == Tok::Minus)
        {
            advance();
            return Expr::unary(Expr::Kind::Neg, unary());
        }
        if (_tok == Tok::Plus)
        {
            advance();
            return unary();
        }
        return power();
    }

    std::unique_ptr<Expr> power()
    {
        auto base = primary();
        if (_tok == Tok::Caret)
        {
            advance();
            return Expr::binary(Expr::Kind::Pow, std::move(base), unary());
        }
        return base;
    }

    std::unique_ptr<Expr> primary()
    {
        switch (_tok)
        {
            case Tok::Number: {
                auto e = Expr::number(_number);
                advance();
                return e;
            }
            case Tok::LParen: {
                const auto open = _tok_start;
                advance();
                if (_tok == Tok::RParen)
                    throw ParseError(_tok_start, "empty parentheses");
                auto e = sum();
                if (_tok != Tok::RParen)
                {
                    if (_tok == Tok::End)
                        throw ParseError(open, "unbalanced parenthesis");
                    throw ParseError(_tok_start, "expected ')'");
                }
                advance();
                return e;
            }
            case Tok::End: throw ParseError(_tok_start, "dangling operator");
            case Tok::RParen: throw ParseError(_tok_start, "unbalanced parenthesis");
            default: throw ParseError(_tok_start, "expected operand");
        }
    }
};

double checked(double v)
{
    if (!std::isfinite(v))
        throw EvalError("non-finite result");
    return v;
}

} // namespace

std::unique_ptr<Expr> parse_expression(std::string_view text)
{
    return Parser(text).parse();
}

double evaluate(const Expr& e)
{
    using K = Expr::Kind;
    switch (e.kind)
    {
        case K::Number: return e.value;
        case K::Neg: return -evaluate(*e.lhs);
        default: break;
    }

    const double a = evaluate(*e.lhs);
    const double b = evaluate(*e.rhs);
    switch (e.kind)
    {
        case K::Add: return checked(a + b);
        case K::Sub: return checked(a - b);
        case K::Mul: return checked(a * b);
        case K::Div:
            if (b == 0.0)
                throw EvalError("division by zero");
            return checked(a / b);
        case K::Mod:
            if (b == 0.0)
                throw EvalError("division by zero");
            return checked(std::fmod(a, b));
        case K::Pow:
            if (a < 0.0 && std::trunc(b) != b)
                throw EvalError("fractional power of negative base");
            if (a == 0.0 && b < 0.0)
                throw EvalError("division by zero");
            return checked(std::pow(a, b));
        default: break;
    }
    throw EvalError("unknown operator");
}

std::string format_number(double value)
{
    if (value == 0.0)
        value = 0.0; // folds -0
    char buf[512];
    if (std::trunc(value) == value)
    {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
        return std::string(buf, end) + ".0";
    }
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

std::string eval_expression(std::string_view text)
{
    try
    {
        return format_number(evaluate(*parse_expression(text)));
    }
    catch (const ParseError& e)
    {
        return std::string("ERROR: ") + e.what();
    }
    catch (const EvalError& e)
    {
        return std::string("ERROR: ") + e.what();
    }
}

} // namespace swirl
