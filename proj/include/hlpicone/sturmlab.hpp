#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hlpicone/coeffexpr.hpp"
#include "hlpicone/errors.hpp"
#include "hlpicone/hlode.hpp"
#include "hlpicone/picone.hpp"

namespace hlpicone {

// Half-linear generalized pi: first Dirichlet eigen-length unit.
double pi_alpha(double alpha);

// Interior zeros of an interpolated state component, reported only where the
// scan grid shows a strict sign change (exact grid zeros and tangential
// touches are not claimed).
std::vector<double> find_zeros(const Trajectory& traj, int component = 0,
                               int scan_points = 4001, double tol_rel = 1e-10);

struct EigenOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0; // 0 -> span/2000 for the fine stage
    std::optional<std::pair<double, double>> lambda_range;
    int scan_points = 0; // 0 -> auto
};

struct EigenResult2 {
    double lambda;
    Trajectory traj;          // fine-tolerance eigenfunction, u'(x0) normalized
    double boundary_residual; // |u(x1)| / max |u|
};

struct EigenResult4 {
    double lambda;
    double theta; // shooting angle in [0, pi): initial state (0, 0, cos, sin)
    Trajectory traj;
    std::array<double, 2> boundary_residuals; // (|u(x1)|, L |u'(x1)|) / max |u|
};

// Smallest lambda with u(x1) = 0 for [p phi(u')]' + (q + lambda) phi(u) = 0,
// u(x0) = 0, (p phi(u'))(x0) = 1.
EigenResult2 eigen_shoot_2nd(const SecondOrderProblem& base, const EigenOptions& opts = {});

// Clamped eigenvalue [a phi(u'')]'' - [b phi(u')]' = lambda phi(u) (plus the
// base zero-order term, if any), u = u' = 0 at both ends; prefers the
// zero-free ground solution among converged candidates.
EigenResult4 eigen_shoot_4th_clamped(const FourthOrderProblem& base,
                                     const EigenOptions& opts = {});

enum class TheoremTag { t1, t2, c3 };

// Comparison setup.  t1/t2: first equation (a, b) with c = -lambda
// manufactured by the eigen stage; optional literal second equation (A, B, C),
// identical comparison when absent.  c3: the three-equation system (p_k, q_k)
// with lambda absorbed into the middle equation.
struct TheoremCase {
    TheoremTag tag = TheoremTag::t1;
    double alpha = 1.0;
    double x0 = 0.0, x1 = 1.0;

    std::optional<Expr> a, b;       // t1 / t2
    std::optional<Expr> ca, cb, cc; // comparison A, B, C (all present or all absent)

    std::vector<Expr> p, q; // c3: exactly three of each

    int grid_n = 2001;
    int samples = 32;
    std::uint64_t seed = 1;
    EigenOptions eigen;
    IntegrateOptions integ;
    std::string dump_dir = ".";
};

struct HypothesisCheck {
    std::string name;
    bool holds;
    std::optional<double> first_violation;
};

std::vector<HypothesisCheck> check_hypotheses(const TheoremCase& c, double lambda);

enum class Verdict { zero_found, constant_multiple, skipped, counterexample };

struct SampleOutcome {
    int index;
    int equation; // 1-based sampled equation (t1/t2: the comparison equation)
    std::array<double, 4> initial{};
    Verdict verdict;
    std::optional<double> zero_x;
    std::optional<double> ratio, spread;
    std::optional<double> condition_fail_x;
    std::string csv_path;
    std::string note;
};

struct ComparisonReport {
    TheoremTag tag;
    double alpha;
    double x0, x1;
    double lambda;
    std::optional<double> theta;
    std::vector<double> u_boundary_residuals;
    std::vector<HypothesisCheck> hypotheses;
    bool hypotheses_hold;
    std::string condition_form;
    std::vector<SampleOutcome> samples;
    int count_zero = 0, count_constant_multiple = 0, count_skipped = 0,
        count_counterexample = 0;
    std::uint64_t seed;
    int n_samples;
};

// Manufactures the eigenfunction, checks the hypotheses, then integrates
// random and proportional samples of the comparison equation and classifies
// each: constant multiple, side-condition skip, interior zero, or
// counterexample (dumped as CSV).
ComparisonReport verify_conclusion(const TheoremCase& c);

} // namespace hlpicone
