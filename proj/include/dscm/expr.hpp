#pragma once

// Integrand expressions: a small arithmetic AST, its lexer/parser, a printer
// whose output re-parses to the same tree, and a chunked bytecode evaluator
// used by the simulator.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dscm/error.hpp"

namespace dscm {

struct SourcePos {
    int line = 1;
    int col = 1;
    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

inline std::string format_pos(SourcePos p) {
    return std::to_string(p.line) + ":" + std::to_string(p.col);
}

struct Expr {
    enum class Op { num, var, neg, add, sub, mul, div, exp, sin, min, max };
    Op op = Op::num;
    double value = 0.0;
    std::string name;
    std::vector<Expr> args;
    SourcePos pos;

    static Expr number(double v) { return Expr{Op::num, v, {}, {}, {}}; }
    static Expr variable(std::string n) { return Expr{Op::var, 0.0, std::move(n), {}, {}}; }
    static Expr unary(Op op, Expr a) { return Expr{op, 0.0, {}, {std::move(a)}, {}}; }
    static Expr binary(Op op, Expr a, Expr b) { return Expr{op, 0.0, {}, {std::move(a), std::move(b)}, {}}; }

    /// Structural equality; source positions are ignored.
    friend bool operator==(const Expr& a, const Expr& b) {
        if (a.op != b.op || a.args != b.args) return false;
        if (a.op == Op::num) return a.value == b.value;
        if (a.op == Op::var) return a.name == b.name;
        return true;
    }
};

inline void collect_vars(const Expr& e, std::set<std::string>& out) {
    if (e.op == Expr::Op::var) out.insert(e.name);
    for (const auto& a : e.args) collect_vars(a, out);
}

inline bool contains_op(const Expr& e, Expr::Op op) {
    if (e.op == op) return true;
    for (const auto& a : e.args)
        if (contains_op(a, op)) return true;
    return false;
}

/// Shortest decimal that reads back to exactly the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    return std::string(buf, end);
}

namespace detail {

inline int precedence(Expr::Op op) {
    switch (op) {
        case Expr::Op::add:
        case Expr::Op::sub: return 1;
        case Expr::Op::mul:
        case Expr::Op::div: return 2;
        case Expr::Op::neg: return 3;
        default: return 4;
    }
}

inline void print_expr(const Expr& e, std::string& out) {
    using Op = Expr::Op;
    auto child = [&](const Expr& c, bool wrap) {
        if (wrap) out += '(';
        print_expr(c, out);
        if (wrap) out += ')';
    };
    switch (e.op) {
        case Op::num:
            if (e.value < 0 || std::signbit(e.value)) out += "(" + format_number(e.value) + ")";
            else out += format_number(e.value);
            return;
        case Op::var: out += e.name; return;
        case Op::neg:
            out += '-';
            child(e.args[0], precedence(e.args[0].op) < precedence(Op::neg) ||
                                 e.args[0].op == Op::neg ||
                                 (e.args[0].op == Op::num && std::signbit(e.args[0].value)));
            return;
        case Op::exp:
        case Op::sin:
        case Op::min:
        case Op::max: {
            out += e.op == Op::exp ? "exp(" : e.op == Op::sin ? "sin(" : e.op == Op::min ? "min(" : "max(";
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print_expr(e.args[i], out);
            }
            out += ')';
            return;
        }
        default: {
            // Binary operators are left-associative: the right operand needs
            // parentheses at equal precedence.
            const int p = precedence(e.op);
            child(e.args[0], precedence(e.args[0].op) < p);
            out += e.op == Op::add ? " + " : e.op == Op::sub ? " - " : e.op == Op::mul ? " * " : " / ";
            child(e.args[1], precedence(e.args[1].op) <= p);
            return;
        }
    }
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
    std::string out;
    detail::print_expr(e, out);
    return out;
}

struct Token {
    enum class Kind { end, ident, number, symbol };
    Kind kind = Kind::end;
    std::string text;
    double number = 0.0;
    SourcePos pos;
};

/// Tokenizer shared by the expression and model parsers. '#' starts a
/// comment running to the end of the line.
class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

    bool accept(std::string_view sym) {
        if (tok_.kind == Token::Kind::symbol && tok_.text == sym) {
            advance();
            return true;
        }
        return false;
    }

    Token expect(std::string_view sym) {
        if (tok_.kind != Token::Kind::symbol || tok_.text != sym) {
            error(tok_.pos, "expected '" + std::string(sym) + "' but found " + describe(tok_));
        }
        return take();
    }

    bool accept_keyword(std::string_view kw) {
        if (tok_.kind == Token::Kind::ident && tok_.text == kw) {
            advance();
            return true;
        }
        return false;
    }

    Token expect_keyword(std::string_view kw) {
        if (tok_.kind != Token::Kind::ident || tok_.text != kw) {
            error(tok_.pos, "expected '" + std::string(kw) + "' but found " + describe(tok_));
        }
        return take();
    }

    Token expect_ident() {
        if (tok_.kind != Token::Kind::ident) error(tok_.pos, "expected a name but found " + describe(tok_));
        return take();
    }

    double expect_number() {
        bool negative = false;
        if (accept("-")) negative = true;
        else accept("+");
        if (tok_.kind != Token::Kind::number) error(tok_.pos, "expected a number but found " + describe(tok_));
        const double v = take().number;
        return negative ? -v : v;
    }

    [[noreturn]] static void error(SourcePos p, const std::string& msg) {
        throw ParseError(format_pos(p) + ": " + msg);
    }

    static std::string describe(const Token& t) {
        switch (t.kind) {
            case Token::Kind::end: return "end of input";
            case Token::Kind::number: return "number '" + t.text + "'";
            default: return "'" + t.text + "'";
        }
    }

private:
    void bump() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void advance() {
        while (i_ < src_.size()) {
            const char c = src_[i_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                bump();
            } else if (c == '#') {
                while (i_ < src_.size() && src_[i_] != '\n') bump();
            } else {
                break;
            }
        }
        tok_ = Token{};
        tok_.pos = {line_, col_};
        if (i_ >= src_.size()) return;
        const char c = src_[i_];
        const std::size_t start = i_;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                bump();
            tok_.kind = Token::Kind::ident;
            tok_.text = std::string(src_.substr(start, i_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            auto digits = [&] {
                while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) bump();
            };
            digits();
            if (i_ < src_.size() && src_[i_] == '.') {
                bump();
                digits();
            }
            if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
                std::size_t j = i_ + 1;
                if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
                if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
                    while (i_ < j) bump();
                    digits();
                }
            }
            tok_.kind = Token::Kind::number;
            tok_.text = std::string(src_.substr(start, i_ - start));
            const auto* first = tok_.text.data();
            const auto* last = first + tok_.text.size();
            auto [ptr, ec] = std::from_chars(first, last, tok_.number);
            if (ec != std::errc() || ptr != last) error(tok_.pos, "malformed number '" + tok_.text + "'");
            return;
        }
        if (std::string_view("{}[]();,=+-*/:").find(c) != std::string_view::npos) {
            bump();
            tok_.kind = Token::Kind::symbol;
            tok_.text = std::string(1, c);
            return;
        }
        error(tok_.pos, std::string("unexpected character '") + c + "'");
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

namespace detail {

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | atom
// atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'
class ExprParser {
public:
    explicit ExprParser(Lexer& lex) : lex_(lex) {}

    Expr expr() {
        Expr lhs = term();
        while (true) {
            const auto pos = lex_.peek().pos;
            if (lex_.accept("+")) lhs = with_pos(Expr::binary(Expr::Op::add, std::move(lhs), term()), pos);
            else if (lex_.accept("-")) lhs = with_pos(Expr::binary(Expr::Op::sub, std::move(lhs), term()), pos);
            else return lhs;
        }
    }

private:
    static Expr with_pos(Expr e, SourcePos p) {
        e.pos = p;
        return e;
    }

    Expr term() {
        Expr lhs = unary();
        while (true) {
            const auto pos = lex_.peek().pos;
            if (lex_.accept("*")) lhs = with_pos(Expr::binary(Expr::Op::mul, std::move(lhs), unary()), pos);
            else if (lex_.accept("/")) lhs = with_pos(Expr::binary(Expr::Op::div, std::move(lhs), unary()), pos);
            else return lhs;
        }
    }

    Expr unary() {
        const auto pos = lex_.peek().pos;
        if (lex_.accept("-")) return with_pos(Expr::unary(Expr::Op::neg, unary()), pos);
        return atom();
    }

    Expr atom() {
        const Token t = lex_.peek();
        if (t.kind == Token::Kind::number) {
            lex_.take();
            return with_pos(Expr::number(t.number), t.pos);
        }
        if (lex_.accept("(")) {
            Expr e = expr();
            lex_.expect(")");
            return e;
        }
        if (t.kind != Token::Kind::ident) Lexer::error(t.pos, "expected an expression but found " + Lexer::describe(t));
        lex_.take();
        if (!lex_.accept("(")) return with_pos(Expr::variable(t.text), t.pos);

        std::vector<Expr> args{expr()};
        while (lex_.accept(",")) args.push_back(expr());
        lex_.expect(")");
        Expr::Op op;
        std::size_t arity;
        if (t.text == "exp") op = Expr::Op::exp, arity = 1;
        else if (t.text == "sin") op = Expr::Op::sin, arity = 1;
        else if (t.text == "min") op = Expr::Op::min, arity = 2;
        else if (t.text == "max") op = Expr::Op::max, arity = 2;
        else Lexer::error(t.pos, "unknown function '" + t.text + "'");
        if (args.size() != arity) {
            Lexer::error(t.pos, "function '" + t.text + "' takes " + std::to_string(arity) + " argument(s), got " +
                                    std::to_string(args.size()));
        }
        return Expr{op, 0.0, {}, std::move(args), t.pos};
    }

    Lexer& lex_;
};

}  // namespace detail

inline Expr parse_expr(Lexer& lex) { return detail::ExprParser(lex).expr(); }

inline Expr parse_expr(std::string_view text) {
    Lexer lex(text);
    Expr e = parse_expr(lex);
    if (lex.peek().kind != Token::Kind::end) Lexer::error(lex.peek().pos, "trailing input after expression");
    return e;
}

/// Postfix program for one expression. Variables are resolved to input slots
/// at compile time.
class CompiledExpr {
public:
    CompiledExpr() = default;

    CompiledExpr(const Expr& e, const std::function<int(const std::string&)>& slot_of) {
        emit(e, slot_of);
        int depth = 0;
        for (const auto& in : code_) {
            depth += stack_effect(in.op);
            max_depth_ = std::max(max_depth_, depth);
        }
    }

    /// out[i] = e(inputs[0][i], inputs[1][i], ...) for i < n. Throws
    /// NumericalError on division by zero.
    void eval(const std::vector<const double*>& inputs, std::size_t n, double* out,
              std::vector<std::vector<double>>& scratch) const {
        if (scratch.size() < static_cast<std::size_t>(max_depth_)) scratch.resize(max_depth_);
        for (auto& s : scratch)
            if (s.size() < n) s.resize(n);
        int sp = 0;
        for (const auto& in : code_) {
            using Op = Expr::Op;
            switch (in.op) {
                case Op::num: {
                    auto* d = scratch[sp++].data();
                    for (std::size_t i = 0; i < n; ++i) d[i] = in.value;
                    break;
                }
                case Op::var: {
                    auto* d = scratch[sp++].data();
                    const double* s = inputs[in.slot];
                    for (std::size_t i = 0; i < n; ++i) d[i] = s[i];
                    break;
                }
                case Op::neg: {
                    auto* d = scratch[sp - 1].data();
                    for (std::size_t i = 0; i < n; ++i) d[i] = -d[i];
                    break;
                }
                case Op::exp: {
                    auto* d = scratch[sp - 1].data();
                    for (std::size_t i = 0; i < n; ++i) d[i] = std::exp(d[i]);
                    break;
                }
                case Op::sin: {
                    auto* d = scratch[sp - 1].data();
                    for (std::size_t i = 0; i < n; ++i) d[i] = std::sin(d[i]);
                    break;
                }
                default: {
                    auto* a = scratch[sp - 2].data();
                    const auto* b = scratch[sp - 1].data();
                    --sp;
                    switch (in.op) {
                        case Op::add: for (std::size_t i = 0; i < n; ++i) a[i] += b[i]; break;
                        case Op::sub: for (std::size_t i = 0; i < n; ++i) a[i] -= b[i]; break;
                        case Op::mul: for (std::size_t i = 0; i < n; ++i) a[i] *= b[i]; break;
                        case Op::div:
                            for (std::size_t i = 0; i < n; ++i) {
                                if (b[i] == 0.0) throw NumericalError("division by zero in integrand");
                                a[i] /= b[i];
                            }
                            break;
                        case Op::min: for (std::size_t i = 0; i < n; ++i) a[i] = std::min(a[i], b[i]); break;
                        case Op::max: for (std::size_t i = 0; i < n; ++i) a[i] = std::max(a[i], b[i]); break;
                        default: break;
                    }
                }
            }
        }
        const auto* r = scratch[0].data();
        for (std::size_t i = 0; i < n; ++i) out[i] = r[i];
    }

    /// Scalar convenience wrapper.
    double eval(const std::vector<double>& inputs) const {
        std::vector<const double*> ptrs;
        for (const auto& v : inputs) ptrs.push_back(&v);
        std::vector<std::vector<double>> scratch;
        double out = 0.0;
        eval(ptrs, 1, &out, scratch);
        return out;
    }

    bool is_constant_zero() const { return code_.size() == 1 && code_[0].op == Expr::Op::num && code_[0].value == 0.0; }

private:
    struct Instr {
        Expr::Op op;
        double value = 0.0;
        int slot = -1;
    };

    static int stack_effect(Expr::Op op) {
        switch (op) {
            case Expr::Op::num:
            case Expr::Op::var: return 1;
            case Expr::Op::neg:
            case Expr::Op::exp:
            case Expr::Op::sin: return 0;
            default: return -1;
        }
    }

    void emit(const Expr& e, const std::function<int(const std::string&)>& slot_of) {
        for (const auto& a : e.args) emit(a, slot_of);
        Instr in{e.op};
        if (e.op == Expr::Op::num) in.value = e.value;
        if (e.op == Expr::Op::var) in.slot = slot_of(e.name);
        code_.push_back(in);
    }

    std::vector<Instr> code_;
    int max_depth_ = 0;
};

}  // namespace dscm
