#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hlpicone/jsonw.hpp"
#include "hlpicone/problem.hpp"
#include "hlpicone/report.hpp"

namespace {

using namespace hlpicone;

// Exit codes: 0 pass, 1 residual above threshold / counterexample,
// 2 schema/usage/case errors, 3 numerical failures, 4 hypotheses violated.

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw problem_file_error("cannot write " + path);
    os << text;
    if (!os) throw problem_file_error("cannot write " + path);
}

void emit_report(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int grid_n) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw problem_file_error("cannot write " + path);
    traj.write_csv(os, grid_n);
    if (!os) throw problem_file_error("cannot write " + path);
}

struct SolveArgs {
    std::string problem, out, csv;
};

struct VerifyArgs {
    std::string problem, out, identity, mode = "both", samples_csv;
    std::vector<std::string> variants;
    int grid = 0;
    double threshold = 0.0;
    bool has_grid = false, has_threshold = false;
};

struct CompareArgs {
    std::string problem, out, theorem, dump_dir = ".";
    int samples = 0;
    std::uint64_t seed = 0;
    bool has_samples = false, has_seed = false;
};

struct EigenArgs {
    std::string problem, out, csv;
    int order = 2;
};

int do_solve(const SolveArgs& a) {
    ProblemFile pf = load_problem_file(a.problem);
    Trajectory traj = solve_trajectory(pf);
    if (!a.csv.empty()) write_trajectory_csv(a.csv, traj, pf.grid);
    emit_report(a.out, solve_report_json(pf, traj, a.csv, report_defaults(pf)));
    return 0;
}

int do_verify(const VerifyArgs& a) {
    ProblemFile pf = load_problem_file(a.problem);
    if (a.has_grid) {
        if (a.grid < 7) throw problem_file_error("--grid must be at least 7");
        pf.grid = a.grid;
    }
    if (a.has_threshold) {
        if (!(a.threshold > 0.0)) throw problem_file_error("--threshold must be positive");
        pf.threshold = a.threshold;
    }
    for (const std::string& kv : a.variants) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
            throw problem_file_error("--variant expects KEY=VALUE, got \"" + kv + "\"");
        apply_variant(pf.variants, kv.substr(0, eq), kv.substr(eq + 1));
    }
    IdentityKind kind = *identity_kind_from(a.identity);
    IdentityCase ic = build_identity_case(pf, kind);
    IdentityReport rep = verify_identity(ic, pf.threshold);
    if (!a.samples_csv.empty()) write_file(a.samples_csv, identity_samples_csv(rep));
    emit_report(a.out, identity_report_json(rep, a.mode, a.samples_csv, report_defaults(pf)));
    return identity_pass(rep, a.mode) ? 0 : 1;
}

int do_compare(const CompareArgs& a) {
    ProblemFile pf = load_problem_file(a.problem);
    if (a.has_samples) {
        if (a.samples < 1) throw problem_file_error("--samples must be at least 1");
        pf.samples = a.samples;
    }
    if (a.has_seed) pf.seed = a.seed;
    TheoremCase tc = build_theorem_case(pf, *theorem_tag_from(a.theorem));
    tc.dump_dir = a.dump_dir;
    ComparisonReport rep = verify_conclusion(tc);
    emit_report(a.out, comparison_report_json(rep, report_defaults(pf)));
    if (!rep.hypotheses_hold) return 4;
    return rep.count_counterexample > 0 ? 1 : 0;
}

int do_eigen(const EigenArgs& a) {
    ProblemFile pf = load_problem_file(a.problem);
    if (a.order == 2) {
        EigenResult2 er = eigen_shoot_2nd(make_second_problem(pf), eigen_options(pf));
        std::cout << fmt17(er.lambda) << "\n";
        if (!a.csv.empty()) write_trajectory_csv(a.csv, er.traj, pf.grid);
        if (!a.out.empty())
            write_file(a.out, eigen_report_json(pf, 2, er.lambda, std::nullopt,
                                                {er.boundary_residual}, er.traj, a.csv,
                                                report_defaults(pf)));
    } else {
        EigenResult4 er = eigen_shoot_4th_clamped(make_eigen_fourth_problem(pf),
                                                  eigen_options(pf));
        std::cout << fmt17(er.lambda) << "\n";
        if (!a.csv.empty()) write_trajectory_csv(a.csv, er.traj, pf.grid);
        if (!a.out.empty())
            write_file(a.out,
                       eigen_report_json(pf, 4, er.lambda, er.theta,
                                         {er.boundary_residuals[0], er.boundary_residuals[1]},
                                         er.traj, a.csv, report_defaults(pf)));
    }
    return 0;
}

template <typename F>
int run_guarded(F&& f) {
    try {
        return f();
    } catch (const problem_file_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << " (offset " << e.offset() << ")\n";
        return 2;
    } catch (const case_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const integration_error& e) {
        std::cerr << "error: " << e.what() << " (x = " << fmt17(e.where()) << ")\n";
        return 3;
    } catch (const singular_coefficient_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const eigen_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const eval_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical verification of half-linear Picone identities and "
                 "Sturmian comparison theorems"};
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Integrate a problem and report the trajectory");
    solve->add_option("--problem", sa.problem, "Problem file (JSON)")->required();
    solve->add_option("--out", sa.out, "Report JSON path (default: standard output)");
    solve->add_option("--csv", sa.csv, "Trajectory CSV path");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Check a Picone-type identity on a grid");
    verify->add_option("--problem", va.problem, "Problem file (JSON)")->required();
    verify->add_option("--identity", va.identity, "Identity to check")
        ->required()
        ->check(CLI::IsMember({"1.3", "1.6", "2.3", "2.4", "2.6"}));
    verify->add_option("--mode", va.mode, "Residual mode deciding pass/fail")
        ->check(CLI::IsMember({"diff", "int", "both"}));
    verify->add_option("--variant", va.variants, "Transcription variant KEY=VALUE")
        ->take_all();
    verify->add_option("--grid", va.grid, "Override the evaluation grid size");
    verify->add_option("--threshold", va.threshold, "Override the pass threshold");
    verify->add_option("--samples-csv", va.samples_csv, "Per-grid-point dump CSV path");
    verify->add_option("--out", va.out, "Report JSON path (default: standard output)");

    CompareArgs ca;
    auto* compare = app.add_subcommand("compare", "Run a Sturmian comparison harness");
    compare->add_option("--problem", ca.problem, "Problem file (JSON)")->required();
    compare->add_option("--theorem", ca.theorem, "Theorem to exercise")
        ->required()
        ->check(CLI::IsMember({"1", "2", "c3"}));
    compare->add_option("--samples", ca.samples, "Number of sampled solutions");
    compare->add_option("--seed", ca.seed, "Random seed for sample initial states");
    compare->add_option("--dump-dir", ca.dump_dir, "Directory for counterexample CSV dumps");
    compare->add_option("--out", ca.out, "Report JSON path (default: standard output)");

    EigenArgs ea;
    auto* eigen = app.add_subcommand("eigen", "Manufacture an eigenpair by shooting");
    eigen->add_option("--problem", ea.problem, "Problem file (JSON)")->required();
    eigen->add_option("--order", ea.order, "Equation order")
        ->required()
        ->check(CLI::IsMember({2, 4}));
    eigen->add_option("--csv", ea.csv, "Eigenfunction CSV path");
    eigen->add_option("--out", ea.out, "Report JSON path (written only when given)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    va.has_grid = verify->count("--grid") > 0;
    va.has_threshold = verify->count("--threshold") > 0;
    ca.has_samples = compare->count("--samples") > 0;
    ca.has_seed = compare->count("--seed") > 0;

    if (*solve) return run_guarded([&] { return do_solve(sa); });
    if (*verify) return run_guarded([&] { return do_verify(va); });
    if (*compare) return run_guarded([&] { return do_compare(ca); });
    return run_guarded([&] { return do_eigen(ea); });
}
