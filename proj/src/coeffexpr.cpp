#include "hlpicone/coeffexpr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace hlpicone {

namespace {

NodePtr mk(NodeKind k, double v = 0.0, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->value = v;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Parsing.  Recursive descent over the raw string, byte offsets in errors.
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?
//   atom  := number | 'x' | 'pi' | 'e' | name '(' expr ')'
//          | 'sgnpow' '(' expr ',' number ')' | 'abspow' '(' expr ',' number ')'
//          | '(' expr ')'
// ---------------------------------------------------------------------------

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& expected, std::size_t at) {
        std::string found =
            at < s.size() ? "'" + std::string(1, s[at]) + "'" : "end of input";
        throw parse_error("syntax error at offset " + std::to_string(at) + ": expected " +
                              expected + ", found " + found,
                          at);
    }

    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("'") + c + "'", pos);
    }

    double number(bool allow_sign) {
        skip_ws();
        std::size_t start = pos;
        if (allow_sign && pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
        if (pos >= s.size() ||
            !(std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.'))
            fail("a numeric literal", start);
        const char* begin = s.c_str() + start;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("a numeric literal", start);
        if (!std::isfinite(v))
            throw parse_error("syntax error at offset " + std::to_string(start) +
                                  ": numeric literal out of range",
                              start);
        pos = start + static_cast<std::size_t>(end - begin);
        return v;
    }

    std::string ident() {
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        return s.substr(start, pos - start);
    }

    NodePtr parse_expr() {
        NodePtr a = parse_term();
        for (;;) {
            if (eat('+'))
                a = mk(NodeKind::add, 0.0, a, parse_term());
            else if (eat('-'))
                a = mk(NodeKind::sub, 0.0, a, parse_term());
            else
                return a;
        }
    }

    NodePtr parse_term() {
        NodePtr a = parse_unary();
        for (;;) {
            if (eat('*'))
                a = mk(NodeKind::mul, 0.0, a, parse_unary());
            else if (eat('/'))
                a = mk(NodeKind::div, 0.0, a, parse_unary());
            else
                return a;
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) {
            NodePtr g = parse_unary();
            // A minus applied directly to a literal is a signed literal, so
            // printed negative constants reparse to the same tree.
            if (g->kind == NodeKind::constant) return mk(NodeKind::constant, -g->value);
            return mk(NodeKind::neg, 0.0, std::move(g));
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr a = parse_atom();
        if (eat('^')) return mk(NodeKind::pow, 0.0, a, parse_unary());
        return a;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) fail("a value", pos);
        char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return mk(NodeKind::constant, number(false));
        if (c == '(') {
            ++pos;
            NodePtr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            std::string name = ident();
            if (name == "x") return mk(NodeKind::var_x);
            if (name == "pi") return mk(NodeKind::named_pi);
            if (name == "e") return mk(NodeKind::named_e);
            NodeKind fk;
            if (name == "sin") fk = NodeKind::fn_sin;
            else if (name == "cos") fk = NodeKind::fn_cos;
            else if (name == "exp") fk = NodeKind::fn_exp;
            else if (name == "log") fk = NodeKind::fn_log;
            else if (name == "sqrt") fk = NodeKind::fn_sqrt;
            else if (name == "abs") fk = NodeKind::fn_abs;
            else if (name == "sgn") fk = NodeKind::fn_sgn;
            else if (name == "sgnpow" || name == "abspow") {
                bool is_sgn = name == "sgnpow";
                expect('(');
                NodePtr g = parse_expr();
                expect(',');
                skip_ws();
                std::size_t at = pos;
                double ex = number(true);
                if (is_sgn && ex <= 0.0)
                    throw parse_error("syntax error at offset " + std::to_string(at) +
                                          ": sgnpow exponent must be a positive literal",
                                      at);
                expect(')');
                return mk(is_sgn ? NodeKind::fn_sgnpow : NodeKind::fn_abspow, ex, g);
            } else {
                throw parse_error("syntax error at offset " + std::to_string(start) +
                                      ": unknown identifier '" + name + "'",
                                  start);
            }
            expect('(');
            NodePtr g = parse_expr();
            expect(')');
            return mk(fk, 0.0, g);
        }
        fail("a value", pos);
    }
};

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

double ipow(double base, long long e) {
    if (e < 0) {
        if (base == 0.0) throw eval_error("division by zero");
        return 1.0 / ipow(base, -e);
    }
    double r = 1.0, b = base;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

double eval_node(const ExprNode* n, double x) {
    switch (n->kind) {
    case NodeKind::constant: return n->value;
    case NodeKind::named_pi: return std::numbers::pi;
    case NodeKind::named_e: return std::numbers::e;
    case NodeKind::var_x: return x;
    case NodeKind::neg: return -eval_node(n->a.get(), x);
    case NodeKind::add: return eval_node(n->a.get(), x) + eval_node(n->b.get(), x);
    case NodeKind::sub: return eval_node(n->a.get(), x) - eval_node(n->b.get(), x);
    case NodeKind::mul: return eval_node(n->a.get(), x) * eval_node(n->b.get(), x);
    case NodeKind::div: {
        double d = eval_node(n->b.get(), x);
        if (d == 0.0) throw eval_error("division by zero");
        return eval_node(n->a.get(), x) / d;
    }
    case NodeKind::pow: {
        double base = eval_node(n->a.get(), x);
        double e = eval_node(n->b.get(), x);
        if (std::isfinite(e) && e == std::nearbyint(e) && std::fabs(e) <= 1e9)
            return ipow(base, static_cast<long long>(e));
        if (base <= 0.0) throw eval_error("non-integer power of non-positive base");
        return std::pow(base, e);
    }
    case NodeKind::fn_sin: return std::sin(eval_node(n->a.get(), x));
    case NodeKind::fn_cos: return std::cos(eval_node(n->a.get(), x));
    case NodeKind::fn_exp: return std::exp(eval_node(n->a.get(), x));
    case NodeKind::fn_log: {
        double v = eval_node(n->a.get(), x);
        if (v <= 0.0) throw eval_error("log of non-positive argument");
        return std::log(v);
    }
    case NodeKind::fn_sqrt: {
        double v = eval_node(n->a.get(), x);
        if (v < 0.0) throw eval_error("sqrt of negative argument");
        return std::sqrt(v);
    }
    case NodeKind::fn_abs: return std::fabs(eval_node(n->a.get(), x));
    case NodeKind::fn_sgn: {
        double v = eval_node(n->a.get(), x);
        return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    case NodeKind::fn_sgnpow: {
        double g = eval_node(n->a.get(), x);
        double m = pow_abs(g, n->value);
        return std::signbit(g) ? -m : m;
    }
    case NodeKind::fn_abspow: return pow_abs(eval_node(n->a.get(), x), n->value);
    }
    throw eval_error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Differentiation with light constant folding (keeps derivative trees small;
// parsed trees are never folded).
// ---------------------------------------------------------------------------

bool is_const(const NodePtr& n, double v) {
    return n->kind == NodeKind::constant && n->value == v;
}

NodePtr s_add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return mk(NodeKind::add, 0.0, std::move(a), std::move(b));
}

NodePtr s_neg(NodePtr a) {
    if (is_const(a, 0.0)) return a;
    return mk(NodeKind::neg, 0.0, std::move(a));
}

NodePtr s_sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return s_neg(std::move(b));
    return mk(NodeKind::sub, 0.0, std::move(a), std::move(b));
}

NodePtr s_mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return a;
    if (is_const(b, 0.0)) return b;
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return mk(NodeKind::mul, 0.0, std::move(a), std::move(b));
}

NodePtr s_div(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return a;
    if (is_const(b, 1.0)) return a;
    return mk(NodeKind::div, 0.0, std::move(a), std::move(b));
}

NodePtr d(const NodePtr& n) {
    switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::named_pi:
    case NodeKind::named_e: return mk(NodeKind::constant, 0.0);
    case NodeKind::var_x: return mk(NodeKind::constant, 1.0);
    case NodeKind::neg: return s_neg(d(n->a));
    case NodeKind::add: return s_add(d(n->a), d(n->b));
    case NodeKind::sub: return s_sub(d(n->a), d(n->b));
    case NodeKind::mul: return s_add(s_mul(d(n->a), n->b), s_mul(n->a, d(n->b)));
    case NodeKind::div:
        return s_div(s_sub(s_mul(d(n->a), n->b), s_mul(n->a, d(n->b))),
                     mk(NodeKind::mul, 0.0, n->b, n->b));
    case NodeKind::pow:
        if (n->b->kind == NodeKind::constant) {
            double c = n->b->value;
            if (c == 0.0) return mk(NodeKind::constant, 0.0);
            return s_mul(s_mul(mk(NodeKind::constant, c),
                               mk(NodeKind::pow, 0.0, n->a, mk(NodeKind::constant, c - 1.0))),
                         d(n->a));
        }
        // f^g * (g' log f + g f' / f)
        return s_mul(mk(NodeKind::pow, 0.0, n->a, n->b),
                     s_add(s_mul(d(n->b), mk(NodeKind::fn_log, 0.0, n->a)),
                           s_div(s_mul(n->b, d(n->a)), n->a)));
    case NodeKind::fn_sin: return s_mul(mk(NodeKind::fn_cos, 0.0, n->a), d(n->a));
    case NodeKind::fn_cos: return s_neg(s_mul(mk(NodeKind::fn_sin, 0.0, n->a), d(n->a)));
    case NodeKind::fn_exp: return s_mul(mk(NodeKind::fn_exp, 0.0, n->a), d(n->a));
    case NodeKind::fn_log: return s_div(d(n->a), n->a);
    case NodeKind::fn_sqrt:
        return s_div(d(n->a), s_mul(mk(NodeKind::constant, 2.0), mk(NodeKind::fn_sqrt, 0.0, n->a)));
    case NodeKind::fn_abs: return s_mul(mk(NodeKind::fn_sgn, 0.0, n->a), d(n->a));
    case NodeKind::fn_sgn: return mk(NodeKind::constant, 0.0);
    case NodeKind::fn_sgnpow:
        return s_mul(s_mul(mk(NodeKind::constant, n->value),
                           mk(NodeKind::fn_abspow, n->value - 1.0, n->a)),
                     d(n->a));
    case NodeKind::fn_abspow:
        return s_mul(s_mul(mk(NodeKind::constant, n->value),
                           mk(NodeKind::fn_abspow, n->value - 1.0, n->a)),
                     s_mul(mk(NodeKind::fn_sgn, 0.0, n->a), d(n->a)));
    }
    return mk(NodeKind::constant, 0.0);
}

// ---------------------------------------------------------------------------
// Printing.  Parenthesization preserves the parse tree exactly: left children
// need parens below the operator's precedence, right children at or below it
// (parser is left-associative for + - * /); ^ is right-associative.
// ---------------------------------------------------------------------------

int prec(NodeKind k) {
    switch (k) {
    case NodeKind::add:
    case NodeKind::sub: return 1;
    case NodeKind::mul:
    case NodeKind::div: return 2;
    case NodeKind::neg: return 3;
    case NodeKind::pow: return 4;
    default: return 5;
    }
}

// Negative literals print with a leading '-', so for parenthesization they
// behave like a unary minus.
int prec_of(const ExprNode* n) {
    if (n->kind == NodeKind::constant && std::signbit(n->value)) return prec(NodeKind::neg);
    return prec(n->kind);
}

void pr(const ExprNode* n, std::string& out);

void pr_child(const NodePtr& c, std::string& out, bool parens) {
    if (parens) out += '(';
    pr(c.get(), out);
    if (parens) out += ')';
}

void pr(const ExprNode* n, std::string& out) {
    switch (n->kind) {
    case NodeKind::constant: out += fmt_double(n->value); return;
    case NodeKind::named_pi: out += "pi"; return;
    case NodeKind::named_e: out += "e"; return;
    case NodeKind::var_x: out += "x"; return;
    case NodeKind::neg:
        out += '-';
        pr_child(n->a, out, prec_of(n->a.get()) < 3);
        return;
    case NodeKind::add:
    case NodeKind::sub:
    case NodeKind::mul:
    case NodeKind::div: {
        int p = prec(n->kind);
        pr_child(n->a, out, prec_of(n->a.get()) < p);
        out += n->kind == NodeKind::add ? '+'
             : n->kind == NodeKind::sub ? '-'
             : n->kind == NodeKind::mul ? '*'
                                        : '/';
        pr_child(n->b, out, prec_of(n->b.get()) <= p);
        return;
    }
    case NodeKind::pow:
        pr_child(n->a, out, prec_of(n->a.get()) <= 4);
        out += '^';
        pr_child(n->b, out, prec_of(n->b.get()) < 4);
        return;
    case NodeKind::fn_sin:
    case NodeKind::fn_cos:
    case NodeKind::fn_exp:
    case NodeKind::fn_log:
    case NodeKind::fn_sqrt:
    case NodeKind::fn_abs:
    case NodeKind::fn_sgn: {
        const char* name = n->kind == NodeKind::fn_sin    ? "sin"
                           : n->kind == NodeKind::fn_cos  ? "cos"
                           : n->kind == NodeKind::fn_exp  ? "exp"
                           : n->kind == NodeKind::fn_log  ? "log"
                           : n->kind == NodeKind::fn_sqrt ? "sqrt"
                           : n->kind == NodeKind::fn_abs  ? "abs"
                                                          : "sgn";
        out += name;
        out += '(';
        pr(n->a.get(), out);
        out += ')';
        return;
    }
    case NodeKind::fn_sgnpow:
    case NodeKind::fn_abspow:
        out += n->kind == NodeKind::fn_sgnpow ? "sgnpow(" : "abspow(";
        pr(n->a.get(), out);
        out += ',';
        out += fmt_double(n->value);
        out += ')';
        return;
    }
}

bool eq_node(const ExprNode* a, const ExprNode* b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
    case NodeKind::constant:
    case NodeKind::fn_sgnpow:
    case NodeKind::fn_abspow:
        if (a->value != b->value) return false;
        break;
    default: break;
    }
    bool ca = a->a ? (b->a && eq_node(a->a.get(), b->a.get())) : !b->a;
    bool cb = a->b ? (b->b && eq_node(a->b.get(), b->b.get())) : !b->b;
    return ca && cb;
}

void require_tree(const NodePtr& n, const char* who) {
    if (!n) throw eval_error(std::string(who) + ": empty expression");
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Parser p{text};
    NodePtr root = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("end of input", p.pos);
    return Expr(std::move(root));
}

Expr Expr::constant(double v) {
    if (!std::isfinite(v)) throw std::domain_error("Expr::constant: non-finite value");
    return Expr(mk(NodeKind::constant, v));
}
Expr Expr::variable() { return Expr(mk(NodeKind::var_x)); }
Expr Expr::named_pi() { return Expr(mk(NodeKind::named_pi)); }
Expr Expr::named_e() { return Expr(mk(NodeKind::named_e)); }

Expr Expr::sgnpow_of(Expr g, double alpha) {
    require_tree(g.root_, "sgnpow_of");
    if (!(std::isfinite(alpha) && alpha > 0.0))
        throw std::domain_error("sgnpow_of: exponent must be finite and > 0");
    return Expr(mk(NodeKind::fn_sgnpow, alpha, g.root_));
}

Expr Expr::abspow_of(Expr g, double e) {
    require_tree(g.root_, "abspow_of");
    if (!std::isfinite(e)) throw std::domain_error("abspow_of: exponent must be finite");
    return Expr(mk(NodeKind::fn_abspow, e, g.root_));
}

Expr Expr::apply(NodeKind fn, Expr g) {
    require_tree(g.root_, "apply");
    // Negated literals are stored as signed constants (matches the parser).
    if (fn == NodeKind::neg && g.root_->kind == NodeKind::constant)
        return Expr(mk(NodeKind::constant, -g.root_->value));
    return Expr(mk(fn, 0.0, g.root_));
}

Expr Expr::binary(NodeKind op, Expr l, Expr r) {
    require_tree(l.root_, "binary");
    require_tree(r.root_, "binary");
    return Expr(mk(op, 0.0, l.root_, r.root_));
}

double Expr::eval(double x) const {
    require_tree(root_, "eval");
    if (!std::isfinite(x)) throw eval_error("eval: non-finite abscissa");
    return eval_node(root_.get(), x);
}

Expr Expr::derive() const {
    require_tree(root_, "derive");
    return Expr(d(root_));
}

std::string Expr::print() const {
    require_tree(root_, "print");
    std::string out;
    pr(root_.get(), out);
    return out;
}

bool Expr::structurally_equal(const Expr& other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return eq_node(root_.get(), other.root_.get());
}

Expr operator+(Expr l, Expr r) { return Expr::binary(NodeKind::add, std::move(l), std::move(r)); }
Expr operator-(Expr l, Expr r) { return Expr::binary(NodeKind::sub, std::move(l), std::move(r)); }
Expr operator*(Expr l, Expr r) { return Expr::binary(NodeKind::mul, std::move(l), std::move(r)); }
Expr operator/(Expr l, Expr r) { return Expr::binary(NodeKind::div, std::move(l), std::move(r)); }
Expr operator-(Expr g) { return Expr::apply(NodeKind::neg, std::move(g)); }

Operator2::Operator2(Expr p, Expr q, const SignedPowerParam& alpha, Expr u) {
    Expr du = u.derive();
    Expr bracket = std::move(p) * Expr::sgnpow_of(std::move(du), alpha.alpha);
    full_ = bracket.derive() + std::move(q) * Expr::sgnpow_of(std::move(u), alpha.alpha);
}

double Operator2::operator()(double x) const { return full_.eval(x); }

Operator4::Operator4(Expr a, Expr b, Expr c, const SignedPowerParam& alpha, Expr u,
                     MiddleTerm middle) {
    Expr u1 = u.derive();
    Expr u2 = u1.derive();
    Expr lead = std::move(a) * Expr::sgnpow_of(std::move(u2), alpha.alpha);
    Expr mid = std::move(b) * Expr::sgnpow_of(std::move(u1), alpha.alpha);
    Expr mid_term = middle == MiddleTerm::first_derivative ? mid.derive()
                                                           : mid.derive().derive();
    full_ = lead.derive().derive() - mid_term +
            std::move(c) * Expr::sgnpow_of(std::move(u), alpha.alpha);
}

double Operator4::operator()(double x) const { return full_.eval(x); }

double apply_operator_2nd(const Expr& p, const Expr& q, const SignedPowerParam& alpha,
                          const Expr& u, double x) {
    return Operator2(p, q, alpha, u)(x);
}

double apply_operator_4th(const Expr& a, const Expr& b, const Expr& c,
                          const SignedPowerParam& alpha, const Expr& u, double x,
                          MiddleTerm middle) {
    return Operator4(a, b, c, alpha, u, middle)(x);
}

} // namespace hlpicone
