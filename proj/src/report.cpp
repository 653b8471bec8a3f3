#include "hlpicone/report.hpp"

#include <cmath>

#include "hlpicone/jsonw.hpp"

namespace hlpicone {

namespace {

void write_defaults(JsonWriter& w, const ReportDefaults& d) {
    w.key("defaults").begin_object();
    w.kv("grid", d.grid);
    w.kv("rel_tol", d.rel_tol);
    w.kv("abs_tol", d.abs_tol);
    w.kv("delta", d.delta);
    w.kv("threshold", d.threshold);
    w.kv("max_step", d.max_step);
    w.kv("samples", d.samples);
    w.kv("seed", d.seed);
    w.kv("eigen_scan_points", d.eigen_scan_points);
    w.key("eigen_lambda_range");
    if (d.eigen_lambda_range) {
        w.begin_array().value(d.eigen_lambda_range->first).value(d.eigen_lambda_range->second);
        w.end_array();
    } else {
        w.value_null();
    }
    w.end_object();
}

void write_interval(JsonWriter& w, double x0, double x1) {
    w.key("interval").begin_array().value(x0).value(x1);
    w.end_array();
}

void write_opt(JsonWriter& w, const std::string& k, const std::optional<double>& v) {
    w.key(k);
    if (v)
        w.value(*v);
    else
        w.value_null();
}

} // namespace

ReportDefaults report_defaults(const ProblemFile& pf) {
    ReportDefaults d;
    d.grid = pf.grid;
    d.rel_tol = pf.rel_tol;
    d.abs_tol = pf.abs_tol;
    d.delta = pf.delta;
    d.threshold = pf.threshold;
    d.max_step = pf.max_step;
    d.samples = pf.samples;
    d.seed = pf.seed;
    d.eigen_scan_points = pf.eigen_scan_points;
    d.eigen_lambda_range = pf.eigen_lambda_range;
    return d;
}

bool identity_pass(const IdentityReport& rep, const std::string& mode) {
    if (mode == "diff") return rep.pass_diff;
    if (mode == "int") return rep.pass_int;
    return rep.pass_diff && rep.pass_int;
}

std::string identity_report_json(const IdentityReport& rep, const std::string& mode,
                                 const std::string& samples_csv_path,
                                 const ReportDefaults& d) {
    JsonWriter w;
    w.begin_object();
    w.kv("kind", identity_kind_name(rep.kind));
    w.kv("alpha", rep.alpha);
    w.key("variant").begin_object();
    w.kv("middle_term", to_string(rep.variants.middle_term));
    w.kv("bracket_power", to_string(rep.variants.bracket_power));
    w.kv("condition_power", to_string(rep.variants.condition_power));
    w.kv("second_bracket", to_string(rep.variants.second_bracket));
    w.kv("distinguished_index", to_string(rep.variants.distinguished_index));
    w.end_object();
    write_interval(w, rep.xa, rep.xb);
    w.kv("grid_n", rep.grid_n);
    w.kv("delta", rep.delta_rel);
    w.kv("scale", rep.scale);
    w.kv("residual_diff", rep.residual_diff);
    w.kv("residual_int", rep.residual_int);
    w.kv("mode", mode);
    w.kv("threshold", rep.threshold);
    w.kv("pass", identity_pass(rep, mode));
    w.kv("anomaly", rep.anomaly);
    w.key("excluded").begin_array();
    for (const auto& run : rep.excluded) {
        w.begin_array().value(run.first).value(run.second);
        w.end_array();
    }
    w.end_array();
    w.key("notes").begin_array();
    for (const auto& n : rep.notes) w.value(n);
    w.end_array();
    w.kv("n_included", rep.n_included);
    w.kv("n_runs", rep.n_runs);
    w.key("samples_csv_path");
    if (samples_csv_path.empty())
        w.value_null();
    else
        w.value(samples_csv_path);
    write_defaults(w, d);
    w.end_object();
    return w.str() + "\n";
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::zero_found: return "zero_found";
        case Verdict::constant_multiple: return "constant_multiple";
        case Verdict::skipped: return "skipped";
        case Verdict::counterexample: return "counterexample";
    }
    return "?";
}

std::string comparison_report_json(const ComparisonReport& rep, const ReportDefaults& d) {
    JsonWriter w;
    w.begin_object();
    w.kv("theorem", theorem_tag_name(rep.tag));
    w.kv("alpha", rep.alpha);
    write_interval(w, rep.x0, rep.x1);
    w.kv("lambda", rep.lambda);
    write_opt(w, "theta", rep.theta);
    w.key("u_boundary_residuals").begin_array();
    for (double r : rep.u_boundary_residuals) w.value(r);
    w.end_array();
    w.key("hypotheses").begin_array();
    for (const auto& h : rep.hypotheses) {
        w.begin_object();
        w.kv("name", h.name);
        w.kv("holds", h.holds);
        write_opt(w, "first_violation", h.first_violation);
        w.end_object();
    }
    w.end_array();
    w.kv("hypotheses_hold", rep.hypotheses_hold);
    w.kv("condition_form", rep.condition_form);
    int dim = rep.tag == TheoremTag::c3 ? 2 : 4;
    w.key("samples").begin_array();
    for (const auto& s : rep.samples) {
        w.begin_object();
        w.kv("index", s.index);
        w.kv("equation", s.equation);
        w.key("initial").begin_array();
        for (int k = 0; k < dim; ++k) w.value(s.initial[static_cast<std::size_t>(k)]);
        w.end_array();
        w.kv("verdict", verdict_name(s.verdict));
        write_opt(w, "zero_x", s.zero_x);
        write_opt(w, "ratio", s.ratio);
        write_opt(w, "spread", s.spread);
        write_opt(w, "condition_fail_x", s.condition_fail_x);
        w.key("csv_path");
        if (s.csv_path.empty())
            w.value_null();
        else
            w.value(s.csv_path);
        w.key("note");
        if (s.note.empty())
            w.value_null();
        else
            w.value(s.note);
        w.end_object();
    }
    w.end_array();
    w.key("counts").begin_object();
    w.kv("zero", rep.count_zero);
    w.kv("constant_multiple", rep.count_constant_multiple);
    w.kv("skipped", rep.count_skipped);
    w.kv("counterexample", rep.count_counterexample);
    w.end_object();
    w.kv("seed", rep.seed);
    w.kv("n_samples", rep.n_samples);
    write_defaults(w, d);
    w.end_object();
    return w.str() + "\n";
}

std::string solve_report_json(const ProblemFile& pf, const Trajectory& traj,
                              const std::string& csv_path, const ReportDefaults& d) {
    JsonWriter w;
    w.begin_object();
    w.kv("order", pf.order);
    w.kv("alpha", pf.alpha);
    write_interval(w, pf.x0, pf.x1);
    int dim = traj.dim();
    w.key("initial").begin_array();
    if (pf.initial)
        for (double v : *pf.initial) w.value(v);
    w.end_array();
    auto end = traj.state_at(traj.x1());
    w.key("final_state").begin_array();
    for (int k = 0; k < dim; ++k) w.value(end[static_cast<std::size_t>(k)]);
    w.end_array();
    w.kv("n_nodes", static_cast<std::int64_t>(traj.nodes().size()));
    w.key("csv_path");
    if (csv_path.empty())
        w.value_null();
    else
        w.value(csv_path);
    write_defaults(w, d);
    w.end_object();
    return w.str() + "\n";
}

std::string eigen_report_json(const ProblemFile& pf, int order, double lambda,
                              std::optional<double> theta,
                              const std::vector<double>& boundary_residuals,
                              const Trajectory& traj, const std::string& csv_path,
                              const ReportDefaults& d) {
    JsonWriter w;
    w.begin_object();
    w.kv("order", order);
    w.kv("alpha", pf.alpha);
    write_interval(w, pf.x0, pf.x1);
    w.kv("lambda", lambda);
    write_opt(w, "theta", theta);
    w.key("boundary_residuals").begin_array();
    for (double r : boundary_residuals) w.value(r);
    w.end_array();
    w.kv("n_nodes", static_cast<std::int64_t>(traj.nodes().size()));
    w.key("csv_path");
    if (csv_path.empty())
        w.value_null();
    else
        w.value(csv_path);
    write_defaults(w, d);
    w.end_object();
    return w.str() + "\n";
}

std::string identity_samples_csv(const IdentityReport& rep) {
    std::string out = "x,F,F_prime_est,R\n";
    for (const auto& s : rep.samples) {
        out += fmt17(s.x);
        out += ',';
        out += fmt17(s.F);
        out += ',';
        out += s.has_Fp ? fmt17(s.Fp) : "nan";
        out += ',';
        out += fmt17(s.R);
        out += '\n';
    }
    return out;
}

} // namespace hlpicone
