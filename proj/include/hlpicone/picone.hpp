#pragma once
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hlpicone/coeffexpr.hpp"
#include "hlpicone/errors.hpp"
#include "hlpicone/hlode.hpp"
#include "hlpicone/sgnpow.hpp"

namespace hlpicone {

enum class IdentityKind { p13, p16, p23, p24, p26 };

enum class BracketPower { corrected, as_printed };
enum class ConditionPower { corrected, as_printed };
enum class SecondBracket { corrected, as_printed_derivative };
enum class DistinguishedIndex { n_minus_1, last };

struct VariantFlags {
    MiddleTerm middle_term = MiddleTerm::first_derivative;
    BracketPower bracket_power = BracketPower::corrected;
    ConditionPower condition_power = ConditionPower::corrected;
    SecondBracket second_bracket = SecondBracket::corrected;
    DistinguishedIndex distinguished_index = DistinguishedIndex::n_minus_1;
};

// One side of a pairwise identity: either a numeric trajectory of the problem
// or a symbolic function plugged into it (then the operator terms are kept).
struct PairInput2 {
    SecondOrderProblem problem;
    std::optional<Trajectory> traj;
    std::optional<Expr> fn;
};

struct PairInput4 {
    FourthOrderProblem problem;
    std::optional<Trajectory> traj;
    std::optional<Expr> fn;
};

struct IdentityCase {
    IdentityKind kind;
    double alpha = 1.0;
    double xa = 0.0, xb = 1.0;
    int grid_n = 2001;
    double delta_rel = 1e-6;
    VariantFlags variants;

    // 1.3 / 1.6: u2 and v2.  2.3 / 2.4: u4 and v4.  2.6: the system vectors.
    std::optional<PairInput2> u2, v2;
    std::optional<PairInput4> u4, v4;
    std::vector<SecondOrderProblem> sys_problems;
    std::vector<Trajectory> sys_trajs;
};

struct IdentitySample {
    double x, F, Fp, R;
    bool has_Fp;
};

struct IdentityReport {
    IdentityKind kind;
    double alpha = 1.0;
    VariantFlags variants;
    double xa, xb;
    int grid_n;
    double delta_rel;
    double scale;
    double residual_diff; // max |dF/dx - R| / scale (5-point stencil), NaN if no stencil fits
    double residual_int;  // max |Delta F - integral of R| / scale over included runs
    double threshold;
    bool pass_diff, pass_int, anomaly;
    std::vector<std::pair<double, double>> excluded; // maximal excluded runs [x_first, x_last]
    std::vector<IdentitySample> samples;             // included grid points only
    std::vector<std::string> notes;
    int n_included = 0;
    int n_runs = 0;
};

// Verifies F' = R on the case's uniform grid, excluding near-vanishing
// denominators (relative delta cut per denominator).
IdentityReport verify_identity(const IdentityCase& c, double threshold = 1e-5);

// Pointwise left bracket F(x) and right side R(x).
double identity_bracket(const IdentityCase& c, double x);
double identity_rhs(const IdentityCase& c, double x);

// Alternating binomial weights w_k = (-1)^(n-k-1) C(n-1, k), k = 0..n-1.
std::vector<double> p26_weights(int n);

// Q-form contribution of equation j (1-based) to the 2.6 right side at x;
// exactly 0.0 for the distinguished equation.
double p26_q_term(const IdentityCase& c, int j, double x);

// G = u phi(u) / phi(v) and its x-derivative given pointwise values.
double picone_g(const SignedPowerParam& alpha, double u, double v);
double picone_gp(const SignedPowerParam& alpha, double u, double du, double v, double dv);

} // namespace hlpicone
