#include "hlpicone/hlode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace hlpicone {

namespace {

// Sign-preserving power without finiteness checks: non-finite states must
// propagate through the RHS so the step controller can reject the step.
double sgnpow_raw(double alpha, double s) {
    if (alpha == 1.0) return s;
    double m = pow_abs(s, alpha);
    return std::signbit(s) ? -m : m;
}

void check_leading_coefficient(const Expr& p, const char* name, double x0, double x1) {
    if (!(std::isfinite(x0) && std::isfinite(x1) && x0 < x1))
        throw std::invalid_argument("problem interval must satisfy x0 < x1");
    const int n = 1001;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = x0 + (x1 - x0) * i / (n - 1);
        double v = p.eval(x);
        if (std::fabs(v) < 1e-300)
            throw singular_coefficient_error(std::string(name) + " vanishes at x = " +
                                             std::to_string(x));
        if (i > 0 && std::signbit(v) != std::signbit(prev))
            throw singular_coefficient_error(std::string(name) + " changes sign near x = " +
                                             std::to_string(x));
        prev = v;
    }
}

} // namespace

SecondOrderProblem::SecondOrderProblem(Expr p_, Expr q_, double alpha_, double x0_,
                                       double x1_, double q_offset_)
    : p(std::move(p_)), q(std::move(q_)), alpha(alpha_), x0(x0_), x1(x1_),
      q_offset(q_offset_) {
    check_leading_coefficient(p, "p", x0, x1);
}

FourthOrderProblem::FourthOrderProblem(Expr a_, Expr b_, Expr c_, double alpha_,
                                       double x0_, double x1_, MiddleTerm middle_,
                                       double c_offset_)
    : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), db(b.derive()), alpha(alpha_),
      x0(x0_), x1(x1_), middle(middle_), c_offset(c_offset_) {
    check_leading_coefficient(a, "a", x0, x1);
}

std::array<double, 2> rhs2(const SecondOrderProblem& prob, double x,
                           const std::array<double, 2>& y) {
    double pv = prob.p.eval(x);
    if (pv == 0.0) throw singular_coefficient_error("p vanishes at x = " + std::to_string(x));
    double al = prob.alpha.alpha;
    double du = sgnpow_raw(1.0 / al, y[1] / pv);
    double dy2 = -(prob.q.eval(x) + prob.q_offset) * sgnpow_raw(al, y[0]);
    return {du, dy2};
}

std::array<double, 4> rhs4(const FourthOrderProblem& prob, double x,
                           const std::array<double, 4>& y) {
    double av = prob.a.eval(x);
    if (av == 0.0) throw singular_coefficient_error("a vanishes at x = " + std::to_string(x));
    double al = prob.alpha.alpha;
    double bv = prob.b.eval(x);
    double d2u = sgnpow_raw(1.0 / al, y[2] / av);
    double dy3;
    if (prob.middle == MiddleTerm::first_derivative) {
        // y4 = [a phi(u'')]' - b phi(u')
        dy3 = y[3] + bv * sgnpow_raw(al, y[1]);
    } else {
        // y4 = [a phi(u'')]' - [b phi(u')]'
        dy3 = y[3] + prob.db.eval(x) * sgnpow_raw(al, y[1]) +
              bv * al * pow_abs(y[1], al - 1.0) * d2u;
    }
    double dy4 = -(prob.c.eval(x) + prob.c_offset) * sgnpow_raw(al, y[0]);
    return {y[1], d2u, dy3, dy4};
}

namespace {

using Vec = std::array<double, 4>;

// Dormand-Prince 5(4), FSAL.
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695, E4 = B4 - 393.0 / 640,
                 E5 = B5 + 92097.0 / 339200, E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

template <typename Rhs>
void integrate_core(int dim, const Rhs& rhs, double x0, double x1, Vec y,
                    const IntegrateOptions& opts, std::vector<double>& xs,
                    std::vector<Vec>& ys, std::vector<Vec>& dys) {
    double span = x1 - x0;
    double max_step = opts.max_step > 0.0 ? opts.max_step : span / 2000.0;
    double h_floor = 1e-12 * span;

    double x = x0;
    Vec k1 = rhs(x, y);
    xs.push_back(x);
    ys.push_back(y);
    dys.push_back(k1);

    double h = std::min(max_step, span * 1e-3);
    std::int64_t steps = 0;

    while (x < x1) {
        if (++steps > opts.max_steps)
            throw integration_error("step budget exhausted", x);
        bool last = false;
        if (x + h >= x1) {
            h = x1 - x;
            last = true;
        }
        if (h < h_floor && !last)
            throw integration_error("step size underflow", x);

        Vec k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, yt{}, y5{};
        for (int i = 0; i < dim; ++i) yt[i] = y[i] + h * A21 * k1[i];
        k2 = rhs(x + C2 * h, yt);
        for (int i = 0; i < dim; ++i) yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        k3 = rhs(x + C3 * h, yt);
        for (int i = 0; i < dim; ++i)
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        k4 = rhs(x + C4 * h, yt);
        for (int i = 0; i < dim; ++i)
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        k5 = rhs(x + C5 * h, yt);
        for (int i = 0; i < dim; ++i)
            yt[i] = y[i] +
                    h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        k6 = rhs(x + h, yt);
        for (int i = 0; i < dim; ++i)
            y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        k7 = rhs(x + h, y5);

        double sumsq = 0.0;
        for (int i = 0; i < dim; ++i) {
            double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] +
                            E7 * k7[i]);
            double sc = opts.abs_tol +
                        opts.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            sumsq += (e / sc) * (e / sc);
        }
        double err = std::sqrt(sumsq / dim);

        if (std::isfinite(err) && err <= 1.0) {
            x = last ? x1 : x + h;
            y = y5;
            k1 = k7; // FSAL
            xs.push_back(x);
            ys.push_back(y);
            dys.push_back(k1);
            double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h = std::min(h * factor, max_step);
        } else {
            double factor =
                std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 0.2;
            h *= factor;
            if (h < h_floor) throw integration_error("step size underflow", x);
        }
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Trajectory::Trajectory(SecondOrderProblem prob, std::vector<double> xs,
                       std::vector<std::array<double, 4>> states,
                       std::vector<std::array<double, 4>> derivs)
    : problem_(std::move(prob)), xs_(std::move(xs)), states_(std::move(states)),
      derivs_(std::move(derivs)) {}

Trajectory::Trajectory(FourthOrderProblem prob, std::vector<double> xs,
                       std::vector<std::array<double, 4>> states,
                       std::vector<std::array<double, 4>> derivs)
    : problem_(std::move(prob)), xs_(std::move(xs)), states_(std::move(states)),
      derivs_(std::move(derivs)) {}

const SecondOrderProblem& Trajectory::problem2() const {
    return std::get<SecondOrderProblem>(problem_);
}

const FourthOrderProblem& Trajectory::problem4() const {
    return std::get<FourthOrderProblem>(problem_);
}

std::array<double, 4> Trajectory::state_at(double x) const {
    double lo = xs_.front(), hi = xs_.back();
    double slack = 1e-9 * (hi - lo);
    if (x < lo - slack || x > hi + slack)
        throw eval_error("state_at: abscissa outside trajectory range");
    double xc = std::clamp(x, lo, hi);

    auto it = std::upper_bound(xs_.begin(), xs_.end(), xc);
    std::size_t i = static_cast<std::size_t>(std::distance(xs_.begin(), it));
    if (i == 0) i = 1;
    if (i >= xs_.size()) i = xs_.size() - 1;
    std::size_t j = i - 1;

    double hseg = xs_[i] - xs_[j];
    if (xc == xs_[j]) return states_[j];
    if (xc == xs_[i]) return states_[i];
    double t = (xc - xs_[j]) / hseg;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2,
           h11 = t3 - t2;
    std::array<double, 4> out{};
    for (int k = 0; k < 4; ++k)
        out[k] = h00 * states_[j][k] + h10 * hseg * derivs_[j][k] + h01 * states_[i][k] +
                 h11 * hseg * derivs_[i][k];
    return out;
}

Fields2 Trajectory::fields2_at(double x) const {
    const auto& prob = problem2();
    auto y = state_at(x);
    double pv = prob.p.eval(std::clamp(x, xs_.front(), xs_.back()));
    if (pv == 0.0) throw singular_coefficient_error("p vanishes at x = " + std::to_string(x));
    return {y[0], phi_inv(prob.alpha, y[1] / pv), y[1]};
}

Fields4 Trajectory::fields4_at(double x) const {
    const auto& prob = problem4();
    auto y = state_at(x);
    double xc = std::clamp(x, xs_.front(), xs_.back());
    double av = prob.a.eval(xc);
    if (av == 0.0) throw singular_coefficient_error("a vanishes at x = " + std::to_string(x));
    double al = prob.alpha.alpha;
    double bv = prob.b.eval(xc);
    double d2u = phi_inv(prob.alpha, y[2] / av);
    double d_bracket;
    if (prob.middle == MiddleTerm::first_derivative)
        d_bracket = y[3] + bv * phi(prob.alpha, y[1]);
    else
        d_bracket = y[3] + prob.db.eval(xc) * phi(prob.alpha, y[1]) +
                    bv * al * pow_abs(y[1], al - 1.0) * d2u;
    return {y[0], y[1], d2u, y[2], d_bracket, bv * phi(prob.alpha, y[1])};
}

void Trajectory::write_csv(std::ostream& os, int grid_n) const {
    if (grid_n < 2) throw std::invalid_argument("write_csv: grid_n must be >= 2");
    double lo = xs_.front(), hi = xs_.back();
    if (dim() == 2) {
        os << "x,y1,y2,u,du,p_phi_du\n";
        for (int i = 0; i < grid_n; ++i) {
            double x = lo + (hi - lo) * i / (grid_n - 1);
            auto y = state_at(x);
            Fields2 f = fields2_at(x);
            os << fmt17(x) << ',' << fmt17(y[0]) << ',' << fmt17(y[1]) << ',' << fmt17(f.u)
               << ',' << fmt17(f.du) << ',' << fmt17(f.p_phi_du) << '\n';
        }
    } else {
        os << "x,y1,y2,y3,y4,u,du,d2u,a_phi_d2u,d_a_phi_d2u,b_phi_du\n";
        for (int i = 0; i < grid_n; ++i) {
            double x = lo + (hi - lo) * i / (grid_n - 1);
            auto y = state_at(x);
            Fields4 f = fields4_at(x);
            os << fmt17(x) << ',' << fmt17(y[0]) << ',' << fmt17(y[1]) << ',' << fmt17(y[2])
               << ',' << fmt17(y[3]) << ',' << fmt17(f.u) << ',' << fmt17(f.du) << ','
               << fmt17(f.d2u) << ',' << fmt17(f.a_phi_d2u) << ',' << fmt17(f.d_a_phi_d2u)
               << ',' << fmt17(f.b_phi_du) << '\n';
        }
    }
}

Trajectory integrate(const SecondOrderProblem& prob, const std::array<double, 2>& y0,
                     const IntegrateOptions& opts) {
    std::vector<double> xs;
    std::vector<Vec> ys, dys;
    Vec y{y0[0], y0[1], 0.0, 0.0};
    auto rhs = [&prob](double x, const Vec& v) -> Vec {
        auto d = rhs2(prob, x, {v[0], v[1]});
        return {d[0], d[1], 0.0, 0.0};
    };
    integrate_core(2, rhs, prob.x0, prob.x1, y, opts, xs, ys, dys);
    return Trajectory(prob, std::move(xs), std::move(ys), std::move(dys));
}

Trajectory integrate(const FourthOrderProblem& prob, const std::array<double, 4>& y0,
                     const IntegrateOptions& opts) {
    std::vector<double> xs;
    std::vector<Vec> ys, dys;
    Vec y{y0[0], y0[1], y0[2], y0[3]};
    auto rhs = [&prob](double x, const Vec& v) -> Vec { return rhs4(prob, x, v); };
    integrate_core(4, rhs, prob.x0, prob.x1, y, opts, xs, ys, dys);
    return Trajectory(prob, std::move(xs), std::move(ys), std::move(dys));
}

} // namespace hlpicone
