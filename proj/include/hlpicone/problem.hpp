#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hlpicone/picone.hpp"
#include "hlpicone/sturmlab.hpp"

namespace hlpicone {

// Parsed problem file (strict schema: unknown members are rejected, every
// coefficient string must parse, and basic numeric invariants are enforced).
struct ProblemFile {
    double alpha = 1.0;
    double x0 = 0.0, x1 = 1.0;
    std::string order; // "second" | "fourth" | "system"

    std::optional<Expr> p, q;       // second-order coefficients
    std::optional<Expr> a, b, c;    // fourth-order coefficients (c optional)
    std::vector<Expr> sys_p, sys_q; // system coefficients, equal lengths >= 2

    bool has_second = false;
    std::optional<Expr> P2, Q2;     // comparison problem, second order
    std::optional<Expr> A4, B4, C4; // comparison problem, fourth order

    std::optional<Expr> fn_u, fn_v; // expression mode (mutually exclusive with
                                    // initial states)

    std::optional<std::vector<double>> initial, initial_second;
    std::vector<std::vector<double>> initials; // systems: one 2-state per equation

    VariantFlags variants;

    int grid = 2001;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double delta = 1e-6;
    double threshold = 1e-5;
    int samples = 32;
    std::uint64_t seed = 1;
    std::optional<std::pair<double, double>> eigen_lambda_range;
    int eigen_scan_points = 0; // 0 -> auto
    double max_step = 0.0;     // 0 -> integrator default
};

ProblemFile parse_problem_text(const std::string& text, const std::string& origin);
ProblemFile load_problem_file(const std::string& path);

IntegrateOptions integrate_options(const ProblemFile& pf);
EigenOptions eigen_options(const ProblemFile& pf);

// Command-side builders; these enforce the command-dependent requirements
// (matching order, required initial states or functions, c present/absent).
IdentityCase build_identity_case(const ProblemFile& pf, IdentityKind kind);
TheoremCase build_theorem_case(const ProblemFile& pf, TheoremTag tag);
Trajectory solve_trajectory(const ProblemFile& pf);
SecondOrderProblem make_second_problem(const ProblemFile& pf);
FourthOrderProblem make_eigen_fourth_problem(const ProblemFile& pf); // c must be absent

// Variant flag <-> string conversions shared by the file schema, the
// --variant override flag, and report output.
void apply_variant(VariantFlags& vf, const std::string& key, const std::string& value);
std::string to_string(MiddleTerm v);
std::string to_string(BracketPower v);
std::string to_string(ConditionPower v);
std::string to_string(SecondBracket v);
std::string to_string(DistinguishedIndex v);
std::string identity_kind_name(IdentityKind k);  // "1.3", "1.6", ...
std::optional<IdentityKind> identity_kind_from(const std::string& s);
std::string theorem_tag_name(TheoremTag t);      // "1", "2", "c3"
std::optional<TheoremTag> theorem_tag_from(const std::string& s);

} // namespace hlpicone
