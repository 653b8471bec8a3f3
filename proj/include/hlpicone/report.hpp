#pragma once

#include <string>

#include "hlpicone/picone.hpp"
#include "hlpicone/problem.hpp"
#include "hlpicone/sturmlab.hpp"

namespace hlpicone {

// Effective numeric settings echoed into every report (file values after any
// command-line overrides), for reproducibility.
struct ReportDefaults {
    int grid = 2001;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double delta = 1e-6;
    double threshold = 1e-5;
    double max_step = 0.0;
    int samples = 32;
    std::uint64_t seed = 1;
    int eigen_scan_points = 0;
    std::optional<std::pair<double, double>> eigen_lambda_range;
};

ReportDefaults report_defaults(const ProblemFile& pf);

// mode is "diff", "int" or "both"; the single "pass" member reflects it.
std::string identity_report_json(const IdentityReport& rep, const std::string& mode,
                                 const std::string& samples_csv_path,
                                 const ReportDefaults& d);
std::string comparison_report_json(const ComparisonReport& rep, const ReportDefaults& d);
std::string solve_report_json(const ProblemFile& pf, const Trajectory& traj,
                              const std::string& csv_path, const ReportDefaults& d);
std::string eigen_report_json(const ProblemFile& pf, int order, double lambda,
                              std::optional<double> theta,
                              const std::vector<double>& boundary_residuals,
                              const Trajectory& traj, const std::string& csv_path,
                              const ReportDefaults& d);

// Per-grid-point dump of the verify run: x, F, F_prime_est, R.
std::string identity_samples_csv(const IdentityReport& rep);

std::string verdict_name(Verdict v);

bool identity_pass(const IdentityReport& rep, const std::string& mode);

} // namespace hlpicone
