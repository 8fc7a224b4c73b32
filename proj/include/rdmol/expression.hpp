#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace rdmol {

struct ExprError : std::runtime_error {
    std::size_t position;
    ExprError(const std::string& what, std::size_t pos)
        : std::runtime_error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

namespace detail {

// Recursive-descent parser for profiles of one variable: numbers, x, pi,
// + - * /, unary sign, cos/sin/exp, parentheses.
class ExprParser {
public:
    explicit ExprParser(const std::string& text) : s_(text) {}

    std::function<double(double)> parse() {
        auto e = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ExprError("unexpected trailing input", pos_);
        return e;
    }

private:
    using Fn = std::function<double(double)>;

    Fn expr() {
        Fn lhs = term();
        for (;;) {
            skip_ws();
            if (consume('+')) {
                Fn rhs = term();
                lhs = [lhs, rhs](double x) { return lhs(x) + rhs(x); };
            } else if (consume('-')) {
                Fn rhs = term();
                lhs = [lhs, rhs](double x) { return lhs(x) - rhs(x); };
            } else {
                return lhs;
            }
        }
    }

    Fn term() {
        Fn lhs = factor();
        for (;;) {
            skip_ws();
            if (consume('*')) {
                Fn rhs = factor();
                lhs = [lhs, rhs](double x) { return lhs(x) * rhs(x); };
            } else if (consume('/')) {
                Fn rhs = factor();
                lhs = [lhs, rhs](double x) { return lhs(x) / rhs(x); };
            } else {
                return lhs;
            }
        }
    }

    Fn factor() {
        skip_ws();
        if (consume('-')) {
            Fn inner = factor();
            return [inner](double x) { return -inner(x); };
        }
        if (consume('+')) return factor();
        return primary();
    }

    Fn primary() {
        skip_ws();
        if (pos_ >= s_.size()) throw ExprError("unexpected end of expression", pos_);
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return word();
        if (consume('(')) {
            Fn inner = expr();
            expect(')');
            return inner;
        }
        throw ExprError(std::string("unexpected character '") + c + "'", pos_);
    }

    Fn number() {
        const std::size_t start = pos_;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s_.substr(start), &used);
        } catch (const std::exception&) {
            throw ExprError("malformed number", start);
        }
        pos_ = start + used;
        return [v](double) { return v; };
    }

    Fn word() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        if (name == "x") return [](double x) { return x; };
        if (name == "pi") {
            const double pi = std::acos(-1.0);
            return [pi](double) { return pi; };
        }
        if (name == "cos" || name == "sin" || name == "exp") {
            skip_ws();
            expect('(');
            Fn inner = expr();
            expect(')');
            if (name == "cos") return [inner](double x) { return std::cos(inner(x)); };
            if (name == "sin") return [inner](double x) { return std::sin(inner(x)); };
            return [inner](double x) { return std::exp(inner(x)); };
        }
        throw ExprError("unknown symbol '" + name + "'", start);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        skip_ws();
        if (!consume(c)) throw ExprError(std::string("expected '") + c + "'", pos_);
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::function<double(double)> parse_expression(const std::string& text) {
    return detail::ExprParser(text).parse();
}

}  // namespace rdmol
