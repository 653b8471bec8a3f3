#pragma once
#include <memory>
#include <string>

#include "hlpicone/errors.hpp"
#include "hlpicone/sgnpow.hpp"

namespace hlpicone {

enum class NodeKind {
    constant,  // numeric literal
    named_pi,
    named_e,
    var_x,
    neg,
    add,
    sub,
    mul,
    div,
    pow,
    fn_sin,
    fn_cos,
    fn_exp,
    fn_log,
    fn_sqrt,
    fn_abs,
    fn_sgn,     // produced by differentiation of abs; also parseable
    fn_sgnpow,  // sgnpow(g, alpha): |g|^{alpha-1} g, alpha > 0 literal
    fn_abspow,  // abspow(g, e): |g|^e with |0|^e = 0; produced by differentiation
};

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeKind kind;
    double value = 0.0; // constant value, or the exponent of sgnpow/abspow
    NodePtr a, b;
};

// Immutable expression in a single variable x.
class Expr {
public:
    Expr() = default;

    // Parses the coefficient grammar.  Throws parse_error with a byte offset.
    static Expr parse(const std::string& text);

    // Builders (used by operator application and by the identity evaluators).
    static Expr constant(double v);
    static Expr variable();
    static Expr named_pi();
    static Expr named_e();
    static Expr sgnpow_of(Expr g, double alpha);
    static Expr abspow_of(Expr g, double e);
    static Expr apply(NodeKind fn, Expr g);           // unary kinds
    static Expr binary(NodeKind op, Expr l, Expr r);  // binary kinds

    bool empty() const { return !root_; }
    const NodePtr& root() const { return root_; }

    // Evaluates at x.  IEEE semantics for intermediates; throws eval_error for
    // log/sqrt domain violations, division by zero, and non-integer powers of
    // non-positive bases.
    double eval(double x) const;

    // Symbolic derivative.  d/dx abs(g) = sgn(g) g' and
    // d/dx sgnpow(g, a) = a |g|^{a-1} g', both evaluating to 0 at g = 0.
    Expr derive() const;

    // Canonical text; reparses to a structurally identical tree.
    std::string print() const;

    bool structurally_equal(const Expr& other) const;

private:
    explicit Expr(NodePtr r) : root_(std::move(r)) {}
    NodePtr root_;
};

Expr operator+(Expr l, Expr r);
Expr operator-(Expr l, Expr r);
Expr operator*(Expr l, Expr r);
Expr operator/(Expr l, Expr r);
Expr operator-(Expr g);

enum class MiddleTerm { first_derivative, as_printed_second_derivative };

// l[u](x) = [p phi(u')]' + q phi(u) with u, p, q given symbolically.
double apply_operator_2nd(const Expr& p, const Expr& q, const SignedPowerParam& alpha,
                          const Expr& u, double x);

// l[u](x) = [a phi(u'')]'' - [b phi(u')]' + c phi(u); the as-printed variant
// differentiates the middle bracket twice.
double apply_operator_4th(const Expr& a, const Expr& b, const Expr& c,
                          const SignedPowerParam& alpha, const Expr& u, double x,
                          MiddleTerm middle = MiddleTerm::first_derivative);

// Cached forms of the operators above for evaluation on many abscissas.
class Operator2 {
public:
    Operator2(Expr p, Expr q, const SignedPowerParam& alpha, Expr u);
    double operator()(double x) const;

private:
    Expr full_;
};

class Operator4 {
public:
    Operator4(Expr a, Expr b, Expr c, const SignedPowerParam& alpha, Expr u,
              MiddleTerm middle);
    double operator()(double x) const;

private:
    Expr full_;
};

} // namespace hlpicone
