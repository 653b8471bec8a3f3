#pragma once
#include <array>
#include <cstdint>
#include <ostream>
#include <variant>
#include <vector>

#include "hlpicone/coeffexpr.hpp"
#include "hlpicone/errors.hpp"
#include "hlpicone/sgnpow.hpp"

namespace hlpicone {

// [p phi(u')]' + (q + q_offset) phi(u) = 0 on [x0, x1].
// Quasiderivative state: y1 = u, y2 = p phi(u').
struct SecondOrderProblem {
    SecondOrderProblem(Expr p_, Expr q_, double alpha_, double x0_, double x1_,
                       double q_offset_ = 0.0);

    Expr p, q;
    SignedPowerParam alpha;
    double x0, x1;
    double q_offset;
};

// [a phi(u'')]'' - [b phi(u')]' + (c + c_offset) phi(u) = 0 (default), or with
// the middle bracket differentiated twice (as-printed variant).
// Quasiderivative state: y1 = u, y2 = u', y3 = a phi(u''),
//   y4 = [a phi(u'')]' - b phi(u')        (first-derivative middle)
//   y4 = [a phi(u'')]' - [b phi(u')]'     (as-printed middle)
struct FourthOrderProblem {
    FourthOrderProblem(Expr a_, Expr b_, Expr c_, double alpha_, double x0_, double x1_,
                       MiddleTerm middle_ = MiddleTerm::first_derivative,
                       double c_offset_ = 0.0);

    Expr a, b, c;
    Expr db; // b', needed by the as-printed quasiderivative system
    SignedPowerParam alpha;
    double x0, x1;
    MiddleTerm middle;
    double c_offset;
};

std::array<double, 2> rhs2(const SecondOrderProblem& prob, double x,
                           const std::array<double, 2>& y);
std::array<double, 4> rhs4(const FourthOrderProblem& prob, double x,
                           const std::array<double, 4>& y);

struct IntegrateOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0; // 0 -> (x1 - x0) / 2000
    std::int64_t max_steps = 2000000;
};

// Physical fields reconstructed from a quasiderivative state.
struct Fields2 {
    double u, du, p_phi_du;
};

struct Fields4 {
    double u, du, d2u, a_phi_d2u, d_a_phi_d2u, b_phi_du;
};

// Accepted-step mesh with cubic Hermite dense output between nodes.
class Trajectory {
public:
    Trajectory(SecondOrderProblem prob, std::vector<double> xs,
               std::vector<std::array<double, 4>> states,
               std::vector<std::array<double, 4>> derivs);
    Trajectory(FourthOrderProblem prob, std::vector<double> xs,
               std::vector<std::array<double, 4>> states,
               std::vector<std::array<double, 4>> derivs);

    int dim() const { return std::holds_alternative<SecondOrderProblem>(problem_) ? 2 : 4; }
    double x0() const { return xs_.front(); }
    double x1() const { return xs_.back(); }
    const std::vector<double>& nodes() const { return xs_; }

    const SecondOrderProblem& problem2() const;
    const FourthOrderProblem& problem4() const;

    // Interpolated quasiderivative state (only the leading dim() entries are
    // meaningful).  x may exceed the range by a relative 1e-9 slack.
    std::array<double, 4> state_at(double x) const;

    Fields2 fields2_at(double x) const;
    Fields4 fields4_at(double x) const;

    // Uniform-grid CSV with quasiderivative components and physical fields.
    void write_csv(std::ostream& os, int grid_n) const;

private:
    std::variant<SecondOrderProblem, FourthOrderProblem> problem_;
    std::vector<double> xs_;
    std::vector<std::array<double, 4>> states_;
    std::vector<std::array<double, 4>> derivs_;
};

Trajectory integrate(const SecondOrderProblem& prob, const std::array<double, 2>& y0,
                     const IntegrateOptions& opts = {});
Trajectory integrate(const FourthOrderProblem& prob, const std::array<double, 4>& y0,
                     const IntegrateOptions& opts = {});

} // namespace hlpicone
