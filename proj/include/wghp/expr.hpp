#pragma once

// Coefficient expressions in one variable x.
//
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | power
//   power  := atom ("^" factor)?
//   atom   := number | "x" | "pi" | ident "(" expr ")" | "(" expr ")"
//   ident  := sin | cos | tan | exp | log | sqrt | abs
//
// Expressions are immutable trees with shared subtrees; copies are cheap and
// evaluation is safe from any number of threads.

#include "wghp/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

namespace wghp {

class Expr {
public:
    enum class Op { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
    enum class Function { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

    Expr() : Expr(number(0.0)) {}

    static Expr number(double v) { return Expr(std::make_shared<const Node>(Node{Op::Number, v, {}, {}, {}})); }
    static Expr variable() { return Expr(std::make_shared<const Node>(Node{Op::Variable, 0.0, {}, {}, {}})); }
    static Expr call(Function f, const Expr& arg)
    {
        if (arg.is_number() && f != Function::Log && f != Function::Sqrt) {
            const double v = apply(f, arg.value());
            if (std::isfinite(v)) {
                return number(v);
            }
        }
        return Expr(std::make_shared<const Node>(Node{Op::Call, 0.0, f, arg.node_, {}}));
    }

    friend Expr operator-(const Expr& u)
    {
        if (u.is_number()) {
            return number(-u.value());
        }
        if (u.op() == Op::Negate) {
            return u.lhs();
        }
        return make(Op::Negate, u, {});
    }
    friend Expr operator+(const Expr& u, const Expr& v)
    {
        if (u.is_number() && v.is_number()) {
            return number(u.value() + v.value());
        }
        if (u.is_zero()) {
            return v;
        }
        if (v.is_zero()) {
            return u;
        }
        return make(Op::Add, u, v);
    }
    friend Expr operator-(const Expr& u, const Expr& v)
    {
        if (u.is_number() && v.is_number()) {
            return number(u.value() - v.value());
        }
        if (v.is_zero()) {
            return u;
        }
        if (u.is_zero()) {
            return -v;
        }
        return make(Op::Sub, u, v);
    }
    friend Expr operator*(const Expr& u, const Expr& v)
    {
        if (u.is_number() && v.is_number()) {
            return number(u.value() * v.value());
        }
        if (u.is_zero() || v.is_zero()) {
            return number(0.0);
        }
        if (u.is_one()) {
            return v;
        }
        if (v.is_one()) {
            return u;
        }
        return make(Op::Mul, u, v);
    }
    friend Expr operator/(const Expr& u, const Expr& v)
    {
        if (u.is_number() && v.is_number() && v.value() != 0.0) {
            return number(u.value() / v.value());
        }
        if (v.is_one()) {
            return u;
        }
        return make(Op::Div, u, v);
    }
    static Expr pow(const Expr& u, const Expr& v)
    {
        if (v.is_zero()) {
            return number(1.0);
        }
        if (v.is_one()) {
            return u;
        }
        if (u.is_number() && v.is_number()) {
            const double r = std::pow(u.value(), v.value());
            if (std::isfinite(r)) {
                return number(r);
            }
        }
        return make(Op::Pow, u, v);
    }

    Op op() const noexcept { return node_->op; }
    double value() const noexcept { return node_->value; }
    Function function() const noexcept { return node_->fn; }
    /// Operand of unary nodes, left operand of binary nodes.
    Expr lhs() const { return Expr(node_->a); }
    Expr rhs() const { return Expr(node_->b); }

    bool is_number() const noexcept { return node_->op == Op::Number; }
    bool is_zero() const noexcept { return is_number() && value() == 0.0; }
    bool is_one() const noexcept { return is_number() && value() == 1.0; }
    /// True if the expression does not depend on x.
    bool is_constant() const noexcept
    {
        switch (op()) {
        case Op::Number: return true;
        case Op::Variable: return false;
        case Op::Negate:
        case Op::Call: return lhs().is_constant();
        default: return lhs().is_constant() && rhs().is_constant();
        }
    }

    double operator()(double x) const { return eval_node(*node_, x); }

    static const char* name(Function f) noexcept
    {
        switch (f) {
        case Function::Sin: return "sin";
        case Function::Cos: return "cos";
        case Function::Tan: return "tan";
        case Function::Exp: return "exp";
        case Function::Log: return "log";
        case Function::Sqrt: return "sqrt";
        case Function::Abs: return "abs";
        }
        return "?";
    }

    static double apply(Function f, double v) noexcept
    {
        switch (f) {
        case Function::Sin: return std::sin(v);
        case Function::Cos: return std::cos(v);
        case Function::Tan: return std::tan(v);
        case Function::Exp: return std::exp(v);
        case Function::Log: return std::log(v);
        case Function::Sqrt: return std::sqrt(v);
        case Function::Abs: return std::abs(v);
        }
        return 0.0;
    }

    std::string to_string() const
    {
        std::string out;
        print(*node_, out);
        return out;
    }

private:
    struct Node {
        Op op;
        double value;
        Function fn;
        std::shared_ptr<const Node> a;
        std::shared_ptr<const Node> b;
    };

    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static Expr make(Op op, const Expr& a, const Expr& b)
    {
        return Expr(std::make_shared<const Node>(Node{op, 0.0, Function::Sin, a.node_, b.node_}));
    }

    [[noreturn]] static void domain_failure(const Node& n, double x, const char* why)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        std::string sub;
        print(n, sub);
        throw DomainError(std::string(why) + " in '" + sub + "' at x = " + buf);
    }

    static double eval_node(const Node& n, double x)
    {
        switch (n.op) {
        case Op::Number: return n.value;
        case Op::Variable: return x;
        case Op::Negate: return -eval_node(*n.a, x);
        case Op::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
        case Op::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
        case Op::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
        case Op::Div: {
            const double num = eval_node(*n.a, x);
            const double den = eval_node(*n.b, x);
            if (den == 0.0) {
                domain_failure(n, x, "division by zero");
            }
            return num / den;
        }
        case Op::Pow: {
            const double base = eval_node(*n.a, x);
            const double ex = eval_node(*n.b, x);
            if (base < 0.0 && ex != std::floor(ex)) {
                domain_failure(n, x, "negative base with non-integer exponent");
            }
            if (base == 0.0 && ex < 0.0) {
                domain_failure(n, x, "zero raised to a negative power");
            }
            return std::pow(base, ex);
        }
        case Op::Call: {
            const double v = eval_node(*n.a, x);
            if (n.fn == Function::Log && !(v > 0.0)) {
                domain_failure(n, x, "log of non-positive value");
            }
            if (n.fn == Function::Sqrt && v < 0.0) {
                domain_failure(n, x, "sqrt of negative value");
            }
            const double r = apply(n.fn, v);
            if (!std::isfinite(r) && std::isfinite(v)) {
                domain_failure(n, x, "non-finite result");
            }
            return r;
        }
        }
        return 0.0;
    }

    // precedence: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom
    static int precedence(const Node& n) noexcept
    {
        switch (n.op) {
        case Op::Number: return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
        case Op::Variable:
        case Op::Call: return 5;
        case Op::Negate: return 3;
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Pow: return 4;
        }
        return 0;
    }

    static void print_child(const Node& n, int min_prec, std::string& out)
    {
        if (precedence(n) < min_prec) {
            out += '(';
            print(n, out);
            out += ')';
        } else {
            print(n, out);
        }
    }

    static void print(const Node& n, std::string& out)
    {
        switch (n.op) {
        case Op::Number: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case Op::Variable: out += 'x'; return;
        case Op::Negate:
            out += '-';
            print_child(*n.a, 3, out);
            return;
        case Op::Add:
        case Op::Sub:
            print_child(*n.a, 1, out);
            out += n.op == Op::Add ? " + " : " - ";
            print_child(*n.b, 2, out);
            return;
        case Op::Mul:
        case Op::Div:
            print_child(*n.a, 2, out);
            out += n.op == Op::Mul ? "*" : "/";
            print_child(*n.b, 3, out);
            return;
        case Op::Pow:
            print_child(*n.a, 5, out);
            out += '^';
            print_child(*n.b, 3, out);
            return;
        case Op::Call:
            out += name(n.fn);
            out += '(';
            print(*n.a, out);
            out += ')';
            return;
        }
    }

    std::shared_ptr<const Node> node_;
};

inline Expr pow(const Expr& u, const Expr& v) { return Expr::pow(u, v); }
inline Expr sin(const Expr& u) { return Expr::call(Expr::Function::Sin, u); }
inline Expr cos(const Expr& u) { return Expr::call(Expr::Function::Cos, u); }
inline Expr exp(const Expr& u) { return Expr::call(Expr::Function::Exp, u); }
inline Expr log(const Expr& u) { return Expr::call(Expr::Function::Log, u); }
inline Expr sqrt(const Expr& u) { return Expr::call(Expr::Function::Sqrt, u); }

inline double eval(const Expr& e, double x) { return e(x); }
inline std::string to_string(const Expr& e) { return e.to_string(); }

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Expr parse_all()
    {
        Expr e = expr();
        skip_ws();
        if (pos_ != s_.size()) {
            throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
        }
        return e;
    }

private:
    void skip_ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }
    bool accept(char c)
    {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c)
    {
        if (!accept(c)) {
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    Expr expr()
    {
        Expr e = term();
        for (;;) {
            if (accept('+')) {
                e = e + term();
            } else if (accept('-')) {
                e = e - term();
            } else {
                return e;
            }
        }
    }
    Expr term()
    {
        Expr e = factor();
        for (;;) {
            if (accept('*')) {
                e = e * factor();
            } else if (accept('/')) {
                e = e / factor();
            } else {
                return e;
            }
        }
    }
    Expr factor()
    {
        if (accept('-')) {
            return -factor();
        }
        return power();
    }
    Expr power()
    {
        Expr base = atom();
        if (accept('^')) {
            return pow(base, factor());
        }
        return base;
    }
    Expr atom()
    {
        skip_ws();
        if (pos_ >= s_.size()) {
            throw ParseError("unexpected end of input", pos_);
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            }
            const std::string_view id = s_.substr(start, pos_ - start);
            if (id == "x") {
                return Expr::variable();
            }
            if (id == "pi") {
                return Expr::number(std::numbers::pi);
            }
            Expr::Function f{};
            if (!lookup(id, f)) {
                throw UnknownIdentifier(std::string(id), start);
            }
            expect('(');
            Expr arg = expr();
            expect(')');
            return Expr::call(f, arg);
        }
        if (accept('(')) {
            Expr e = expr();
            expect(')');
            return e;
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    Expr number()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            }
        };
        digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
                ++pos_;
            }
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                digits();
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + pos_) {
            throw ParseError("malformed number", start);
        }
        return Expr::number(v);
    }

    static bool lookup(std::string_view id, Expr::Function& f)
    {
        using F = Expr::Function;
        for (F cand : {F::Sin, F::Cos, F::Tan, F::Exp, F::Log, F::Sqrt, F::Abs}) {
            if (id == Expr::name(cand)) {
                f = cand;
                return true;
            }
        }
        return false;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Expr parse(std::string_view text) { return detail::Parser(text).parse_all(); }

/// Symbolic derivative d/dx. Only constant folding is applied to the result.
inline Expr differentiate(const Expr& e)
{
    using Op = Expr::Op;
    using F = Expr::Function;
    switch (e.op()) {
    case Op::Number: return Expr::number(0.0);
    case Op::Variable: return Expr::number(1.0);
    case Op::Negate: return -differentiate(e.lhs());
    case Op::Add: return differentiate(e.lhs()) + differentiate(e.rhs());
    case Op::Sub: return differentiate(e.lhs()) - differentiate(e.rhs());
    case Op::Mul: {
        const Expr u = e.lhs(), v = e.rhs();
        return differentiate(u) * v + u * differentiate(v);
    }
    case Op::Div: {
        const Expr u = e.lhs(), v = e.rhs();
        return (differentiate(u) * v - u * differentiate(v)) / pow(v, Expr::number(2.0));
    }
    case Op::Pow: {
        const Expr u = e.lhs(), v = e.rhs();
        if (v.is_constant()) {
            return v * pow(u, v - Expr::number(1.0)) * differentiate(u);
        }
        // u^v (v' log u + v u' / u)
        return e * (differentiate(v) * log(u) + v * differentiate(u) / u);
    }
    case Op::Call: {
        const Expr u = e.lhs();
        const Expr du = differentiate(u);
        switch (e.function()) {
        case F::Sin: return cos(u) * du;
        case F::Cos: return -(sin(u) * du);
        case F::Tan: return du / pow(cos(u), Expr::number(2.0));
        case F::Exp: return e * du;
        case F::Log: return du / u;
        case F::Sqrt: return du / (Expr::number(2.0) * e);
        case F::Abs: throw UnsupportedDerivative("abs is not differentiable");
        }
    }
    }
    return Expr::number(0.0);
}

} // namespace wghp
