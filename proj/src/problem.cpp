#include "hlpicone/problem.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace hlpicone {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
    throw problem_file_error(origin + ": " + msg);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed, const std::string& origin) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(origin, "unknown member \"" + it.key() + "\" in " + where);
    }
}

double as_number(const json& j, const std::string& name, const std::string& origin) {
    if (!j.is_number()) fail(origin, name + " must be a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(origin, name + " must be finite");
    return v;
}

int as_integer(const json& j, const std::string& name, const std::string& origin) {
    if (!j.is_number_integer()) fail(origin, name + " must be an integer");
    auto v = j.get<std::int64_t>();
    if (v < -2147483647 || v > 2147483647) fail(origin, name + " is out of range");
    return static_cast<int>(v);
}

Expr as_expr(const json& j, const std::string& name, const std::string& origin) {
    if (!j.is_string()) fail(origin, name + " must be an expression string");
    try {
        return Expr::parse(j.get<std::string>());
    } catch (const parse_error& e) {
        fail(origin, name + ": " + e.what() + " (offset " + std::to_string(e.offset()) + ")");
    }
}

std::vector<double> as_state(const json& j, const std::string& name, std::size_t len,
                             const std::string& origin) {
    if (!j.is_array() || j.size() != len)
        fail(origin, name + " must be an array of " + std::to_string(len) + " numbers");
    std::vector<double> out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(as_number(j[i], name + "[" + std::to_string(i) + "]", origin));
    return out;
}

std::array<double, 2> state2(const std::vector<double>& v) { return {v[0], v[1]}; }
std::array<double, 4> state4(const std::vector<double>& v) { return {v[0], v[1], v[2], v[3]}; }

[[noreturn]] void need(const std::string& msg) { throw problem_file_error(msg); }

} // namespace

ProblemFile parse_problem_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw problem_file_error(origin + ": " + e.what());
    }
    if (!j.is_object()) fail(origin, "the top level must be an object");
    check_keys(j, "the problem file",
               {"alpha", "interval", "order", "coefficients", "second", "functions",
                "initial", "initial_second", "initials", "variants", "grid", "rel_tol",
                "abs_tol", "delta", "threshold", "samples", "seed", "eigen_lambda_range",
                "eigen_scan_points", "max_step"},
               origin);

    ProblemFile pf;

    if (!j.contains("alpha")) fail(origin, "missing member \"alpha\"");
    pf.alpha = as_number(j["alpha"], "alpha", origin);
    if (!(pf.alpha > 0.0)) fail(origin, "alpha must be positive");

    if (!j.contains("interval")) fail(origin, "missing member \"interval\"");
    {
        const json& iv = j["interval"];
        if (!iv.is_array() || iv.size() != 2)
            fail(origin, "interval must be an array [x0, x1]");
        pf.x0 = as_number(iv[0], "interval[0]", origin);
        pf.x1 = as_number(iv[1], "interval[1]", origin);
        if (!(pf.x0 < pf.x1)) fail(origin, "interval must satisfy x0 < x1");
    }

    if (!j.contains("order")) fail(origin, "missing member \"order\"");
    if (!j["order"].is_string()) fail(origin, "order must be a string");
    pf.order = j["order"].get<std::string>();
    if (pf.order != "second" && pf.order != "fourth" && pf.order != "system")
        fail(origin, "order must be \"second\", \"fourth\" or \"system\"");

    if (!j.contains("coefficients")) fail(origin, "missing member \"coefficients\"");
    {
        const json& co = j["coefficients"];
        if (!co.is_object()) fail(origin, "coefficients must be an object");
        if (pf.order == "second") {
            check_keys(co, "coefficients", {"p", "q"}, origin);
            if (!co.contains("p") || !co.contains("q"))
                fail(origin, "second-order coefficients need p and q");
            pf.p = as_expr(co["p"], "coefficients.p", origin);
            pf.q = as_expr(co["q"], "coefficients.q", origin);
        } else if (pf.order == "fourth") {
            check_keys(co, "coefficients", {"a", "b", "c"}, origin);
            if (!co.contains("a") || !co.contains("b"))
                fail(origin, "fourth-order coefficients need a and b");
            pf.a = as_expr(co["a"], "coefficients.a", origin);
            pf.b = as_expr(co["b"], "coefficients.b", origin);
            if (co.contains("c")) pf.c = as_expr(co["c"], "coefficients.c", origin);
        } else {
            check_keys(co, "coefficients", {"p", "q"}, origin);
            if (!co.contains("p") || !co.contains("q"))
                fail(origin, "system coefficients need p and q arrays");
            const json& ps = co["p"];
            const json& qs = co["q"];
            if (!ps.is_array() || !qs.is_array() || ps.size() < 2 || ps.size() != qs.size())
                fail(origin, "system p and q must be equal-length arrays of at least two "
                             "expressions");
            for (std::size_t k = 0; k < ps.size(); ++k) {
                pf.sys_p.push_back(
                    as_expr(ps[k], "coefficients.p[" + std::to_string(k) + "]", origin));
                pf.sys_q.push_back(
                    as_expr(qs[k], "coefficients.q[" + std::to_string(k) + "]", origin));
            }
        }
    }

    if (j.contains("second")) {
        const json& se = j["second"];
        if (!se.is_object()) fail(origin, "second must be an object");
        if (pf.order == "system") fail(origin, "\"second\" is not allowed for systems");
        pf.has_second = true;
        if (pf.order == "second") {
            check_keys(se, "second", {"P", "Q"}, origin);
            if (!se.contains("P") || !se.contains("Q"))
                fail(origin, "the second problem needs P and Q");
            pf.P2 = as_expr(se["P"], "second.P", origin);
            pf.Q2 = as_expr(se["Q"], "second.Q", origin);
        } else {
            check_keys(se, "second", {"A", "B", "C"}, origin);
            if (!se.contains("A") || !se.contains("B") || !se.contains("C"))
                fail(origin, "the second problem needs A, B and C");
            pf.A4 = as_expr(se["A"], "second.A", origin);
            pf.B4 = as_expr(se["B"], "second.B", origin);
            pf.C4 = as_expr(se["C"], "second.C", origin);
        }
    }

    if (j.contains("functions")) {
        if (pf.order == "system") fail(origin, "functions are not allowed for systems");
        const json& fn = j["functions"];
        if (!fn.is_object()) fail(origin, "functions must be an object");
        check_keys(fn, "functions", {"u", "v"}, origin);
        if (!fn.contains("u") || !fn.contains("v"))
            fail(origin, "functions needs both u and v");
        pf.fn_u = as_expr(fn["u"], "functions.u", origin);
        pf.fn_v = as_expr(fn["v"], "functions.v", origin);
    }

    std::size_t state_len = pf.order == "fourth" ? 4 : 2;
    if (j.contains("initial")) {
        if (pf.order == "system") fail(origin, "use \"initials\" for systems");
        pf.initial = as_state(j["initial"], "initial", state_len, origin);
    }
    if (j.contains("initial_second")) {
        if (pf.order == "system") fail(origin, "use \"initials\" for systems");
        pf.initial_second = as_state(j["initial_second"], "initial_second", state_len, origin);
    }
    if (j.contains("initials")) {
        if (pf.order != "system") fail(origin, "\"initials\" is only for systems");
        const json& is = j["initials"];
        if (!is.is_array() || is.size() != pf.sys_p.size())
            fail(origin, "initials must give one [u, p phi(u')] state per equation");
        for (std::size_t k = 0; k < is.size(); ++k)
            pf.initials.push_back(
                as_state(is[k], "initials[" + std::to_string(k) + "]", 2, origin));
    }
    if (pf.fn_u && (pf.initial || pf.initial_second))
        fail(origin, "functions and initial states are mutually exclusive");

    if (j.contains("variants")) {
        const json& va = j["variants"];
        if (!va.is_object()) fail(origin, "variants must be an object");
        check_keys(va, "variants",
                   {"middle_term", "bracket_power", "condition_power", "second_bracket",
                    "distinguished_index"},
                   origin);
        for (auto it = va.begin(); it != va.end(); ++it) {
            if (!it.value().is_string())
                fail(origin, "variant " + it.key() + " must be a string");
            try {
                apply_variant(pf.variants, it.key(), it.value().get<std::string>());
            } catch (const problem_file_error& e) {
                fail(origin, e.what());
            }
        }
    }

    if (j.contains("grid")) {
        pf.grid = as_integer(j["grid"], "grid", origin);
        if (pf.grid < 7) fail(origin, "grid must be at least 7");
    }
    if (j.contains("rel_tol")) {
        pf.rel_tol = as_number(j["rel_tol"], "rel_tol", origin);
        if (!(pf.rel_tol > 0.0)) fail(origin, "rel_tol must be positive");
    }
    if (j.contains("abs_tol")) {
        pf.abs_tol = as_number(j["abs_tol"], "abs_tol", origin);
        if (!(pf.abs_tol > 0.0)) fail(origin, "abs_tol must be positive");
    }
    if (j.contains("delta")) {
        pf.delta = as_number(j["delta"], "delta", origin);
        if (!(pf.delta >= 0.0 && pf.delta < 1.0))
            fail(origin, "delta must lie in [0, 1)");
    }
    if (j.contains("threshold")) {
        pf.threshold = as_number(j["threshold"], "threshold", origin);
        if (!(pf.threshold > 0.0)) fail(origin, "threshold must be positive");
    }
    if (j.contains("samples")) {
        pf.samples = as_integer(j["samples"], "samples", origin);
        if (pf.samples < 1) fail(origin, "samples must be at least 1");
    }
    if (j.contains("seed")) {
        const json& sd = j["seed"];
        if (!sd.is_number_integer() || (sd.is_number_integer() && !sd.is_number_unsigned() &&
                                        sd.get<std::int64_t>() < 0))
            fail(origin, "seed must be a non-negative integer");
        pf.seed = sd.get<std::uint64_t>();
    }
    if (j.contains("eigen_lambda_range")) {
        const json& lr = j["eigen_lambda_range"];
        if (!lr.is_array() || lr.size() != 2)
            fail(origin, "eigen_lambda_range must be an array [lo, hi]");
        double lo = as_number(lr[0], "eigen_lambda_range[0]", origin);
        double hi = as_number(lr[1], "eigen_lambda_range[1]", origin);
        if (!(lo < hi)) fail(origin, "eigen_lambda_range must satisfy lo < hi");
        pf.eigen_lambda_range = {lo, hi};
    }
    if (j.contains("eigen_scan_points")) {
        pf.eigen_scan_points = as_integer(j["eigen_scan_points"], "eigen_scan_points", origin);
        if (pf.eigen_scan_points < 2) fail(origin, "eigen_scan_points must be at least 2");
    }
    if (j.contains("max_step")) {
        pf.max_step = as_number(j["max_step"], "max_step", origin);
        if (!(pf.max_step > 0.0)) fail(origin, "max_step must be positive");
    }
    return pf;
}

ProblemFile load_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw problem_file_error(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem_text(ss.str(), path);
}

IntegrateOptions integrate_options(const ProblemFile& pf) {
    IntegrateOptions io;
    io.rel_tol = pf.rel_tol;
    io.abs_tol = pf.abs_tol;
    io.max_step = pf.max_step;
    return io;
}

EigenOptions eigen_options(const ProblemFile& pf) {
    EigenOptions eo;
    eo.rel_tol = pf.rel_tol;
    eo.abs_tol = pf.abs_tol;
    eo.max_step = pf.max_step;
    eo.lambda_range = pf.eigen_lambda_range;
    eo.scan_points = pf.eigen_scan_points;
    return eo;
}

IdentityCase build_identity_case(const ProblemFile& pf, IdentityKind kind) {
    IdentityCase ic;
    ic.kind = kind;
    ic.alpha = pf.alpha;
    ic.xa = pf.x0;
    ic.xb = pf.x1;
    ic.grid_n = pf.grid;
    ic.delta_rel = pf.delta;
    ic.variants = pf.variants;
    IntegrateOptions io = integrate_options(pf);

    if (kind == IdentityKind::p13 || kind == IdentityKind::p16) {
        if (pf.order != "second")
            need("identity " + identity_kind_name(kind) + " needs a second-order problem file");
        SecondOrderProblem up(*pf.p, *pf.q, pf.alpha, pf.x0, pf.x1);
        SecondOrderProblem vp = pf.has_second
                                    ? SecondOrderProblem(*pf.P2, *pf.Q2, pf.alpha, pf.x0, pf.x1)
                                    : up;
        PairInput2 ui{up, std::nullopt, std::nullopt};
        PairInput2 vi{std::move(vp), std::nullopt, std::nullopt};
        if (pf.fn_u) {
            ui.fn = pf.fn_u;
            vi.fn = pf.fn_v;
        } else {
            if (!pf.initial || !pf.initial_second)
                need("identity " + identity_kind_name(kind) +
                     " needs functions or both initial and initial_second");
            ui.traj = integrate(ui.problem, state2(*pf.initial), io);
            vi.traj = integrate(vi.problem, state2(*pf.initial_second), io);
        }
        ic.u2 = std::move(ui);
        ic.v2 = std::move(vi);
    } else if (kind == IdentityKind::p23 || kind == IdentityKind::p24) {
        if (pf.order != "fourth")
            need("identity " + identity_kind_name(kind) + " needs a fourth-order problem file");
        if (!pf.c)
            need("identity " + identity_kind_name(kind) + " needs the c coefficient");
        FourthOrderProblem up(*pf.a, *pf.b, *pf.c, pf.alpha, pf.x0, pf.x1,
                              pf.variants.middle_term);
        FourthOrderProblem vp = pf.has_second
                                    ? FourthOrderProblem(*pf.A4, *pf.B4, *pf.C4, pf.alpha,
                                                         pf.x0, pf.x1, pf.variants.middle_term)
                                    : up;
        PairInput4 ui{up, std::nullopt, std::nullopt};
        PairInput4 vi{std::move(vp), std::nullopt, std::nullopt};
        if (pf.fn_u) {
            ui.fn = pf.fn_u;
            vi.fn = pf.fn_v;
        } else {
            if (!pf.initial || !pf.initial_second)
                need("identity " + identity_kind_name(kind) +
                     " needs functions or both initial and initial_second");
            ui.traj = integrate(ui.problem, state4(*pf.initial), io);
            vi.traj = integrate(vi.problem, state4(*pf.initial_second), io);
        }
        ic.u4 = std::move(ui);
        ic.v4 = std::move(vi);
    } else {
        if (pf.order != "system")
            need("identity 2.6 needs a system problem file");
        if (pf.initials.empty())
            need("identity 2.6 needs an initial state for every equation");
        for (std::size_t k = 0; k < pf.sys_p.size(); ++k) {
            SecondOrderProblem prob(pf.sys_p[k], pf.sys_q[k], pf.alpha, pf.x0, pf.x1);
            ic.sys_trajs.push_back(integrate(prob, state2(pf.initials[k]), io));
            ic.sys_problems.push_back(std::move(prob));
        }
    }
    return ic;
}

TheoremCase build_theorem_case(const ProblemFile& pf, TheoremTag tag) {
    TheoremCase tc;
    tc.tag = tag;
    tc.alpha = pf.alpha;
    tc.x0 = pf.x0;
    tc.x1 = pf.x1;
    tc.grid_n = pf.grid;
    tc.samples = pf.samples;
    tc.seed = pf.seed;
    tc.eigen = eigen_options(pf);
    tc.integ = integrate_options(pf);
    if (tag == TheoremTag::c3) {
        if (pf.order != "system" || pf.sys_p.size() != 3)
            need("the triple comparison needs a system of exactly three equations");
        tc.p = pf.sys_p;
        tc.q = pf.sys_q;
    } else {
        if (pf.order != "fourth")
            need("theorem " + theorem_tag_name(tag) + " needs a fourth-order problem file");
        if (pf.c)
            need("comparison files must omit c; the manufactured eigenvalue supplies it");
        tc.a = pf.a;
        tc.b = pf.b;
        if (pf.has_second) {
            tc.ca = pf.A4;
            tc.cb = pf.B4;
            tc.cc = pf.C4;
        }
    }
    return tc;
}

Trajectory solve_trajectory(const ProblemFile& pf) {
    IntegrateOptions io = integrate_options(pf);
    if (pf.order == "second") {
        if (!pf.initial) need("solve needs an initial state");
        return integrate(make_second_problem(pf), state2(*pf.initial), io);
    }
    if (pf.order == "fourth") {
        if (!pf.initial) need("solve needs an initial state");
        if (!pf.c) need("fourth-order solve needs the c coefficient");
        FourthOrderProblem prob(*pf.a, *pf.b, *pf.c, pf.alpha, pf.x0, pf.x1,
                                pf.variants.middle_term);
        return integrate(prob, state4(*pf.initial), io);
    }
    need("solve does not accept system problem files");
}

SecondOrderProblem make_second_problem(const ProblemFile& pf) {
    if (pf.order != "second") need("this command needs a second-order problem file");
    return SecondOrderProblem(*pf.p, *pf.q, pf.alpha, pf.x0, pf.x1);
}

FourthOrderProblem make_eigen_fourth_problem(const ProblemFile& pf) {
    if (pf.order != "fourth") need("this command needs a fourth-order problem file");
    if (pf.c) need("eigen files must omit c; the eigenvalue supplies it");
    return FourthOrderProblem(*pf.a, *pf.b, Expr::constant(0.0), pf.alpha, pf.x0, pf.x1,
                              pf.variants.middle_term);
}

void apply_variant(VariantFlags& vf, const std::string& key, const std::string& value) {
    auto bad_value = [&](const char* valid) {
        throw problem_file_error("invalid value \"" + value + "\" for variant " + key +
                                 " (valid: " + valid + ")");
    };
    if (key == "middle_term") {
        if (value == "first_derivative")
            vf.middle_term = MiddleTerm::first_derivative;
        else if (value == "as_printed_second_derivative")
            vf.middle_term = MiddleTerm::as_printed_second_derivative;
        else
            bad_value("first_derivative, as_printed_second_derivative");
    } else if (key == "bracket_power") {
        if (value == "corrected")
            vf.bracket_power = BracketPower::corrected;
        else if (value == "as_printed")
            vf.bracket_power = BracketPower::as_printed;
        else
            bad_value("corrected, as_printed");
    } else if (key == "condition_power") {
        if (value == "corrected")
            vf.condition_power = ConditionPower::corrected;
        else if (value == "as_printed")
            vf.condition_power = ConditionPower::as_printed;
        else
            bad_value("corrected, as_printed");
    } else if (key == "second_bracket") {
        if (value == "corrected")
            vf.second_bracket = SecondBracket::corrected;
        else if (value == "as_printed_derivative")
            vf.second_bracket = SecondBracket::as_printed_derivative;
        else
            bad_value("corrected, as_printed_derivative");
    } else if (key == "distinguished_index") {
        if (value == "N-1")
            vf.distinguished_index = DistinguishedIndex::n_minus_1;
        else if (value == "N")
            vf.distinguished_index = DistinguishedIndex::last;
        else
            bad_value("N-1, N");
    } else {
        throw problem_file_error("unknown variant key \"" + key + "\"");
    }
}

std::string to_string(MiddleTerm v) {
    return v == MiddleTerm::first_derivative ? "first_derivative"
                                             : "as_printed_second_derivative";
}
std::string to_string(BracketPower v) {
    return v == BracketPower::corrected ? "corrected" : "as_printed";
}
std::string to_string(ConditionPower v) {
    return v == ConditionPower::corrected ? "corrected" : "as_printed";
}
std::string to_string(SecondBracket v) {
    return v == SecondBracket::corrected ? "corrected" : "as_printed_derivative";
}
std::string to_string(DistinguishedIndex v) {
    return v == DistinguishedIndex::n_minus_1 ? "N-1" : "N";
}

std::string identity_kind_name(IdentityKind k) {
    switch (k) {
        case IdentityKind::p13: return "1.3";
        case IdentityKind::p16: return "1.6";
        case IdentityKind::p23: return "2.3";
        case IdentityKind::p24: return "2.4";
        case IdentityKind::p26: return "2.6";
    }
    return "?";
}

std::optional<IdentityKind> identity_kind_from(const std::string& s) {
    if (s == "1.3") return IdentityKind::p13;
    if (s == "1.6") return IdentityKind::p16;
    if (s == "2.3") return IdentityKind::p23;
    if (s == "2.4") return IdentityKind::p24;
    if (s == "2.6") return IdentityKind::p26;
    return std::nullopt;
}

std::string theorem_tag_name(TheoremTag t) {
    switch (t) {
        case TheoremTag::t1: return "1";
        case TheoremTag::t2: return "2";
        case TheoremTag::c3: return "c3";
    }
    return "?";
}

std::optional<TheoremTag> theorem_tag_from(const std::string& s) {
    if (s == "1") return TheoremTag::t1;
    if (s == "2") return TheoremTag::t2;
    if (s == "c3") return TheoremTag::c3;
    return std::nullopt;
}

} // namespace hlpicone
