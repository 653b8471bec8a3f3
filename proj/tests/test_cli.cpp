#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "hlpicone_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path scratch_file(const std::string& stem) {
    static int counter = 0;
    return scratch_dir() / (stem + "_" + std::to_string(++counter));
}

RunResult run(const std::string& args) {
    fs::path so = scratch_file("stdout"), se = scratch_file("stderr");
    std::string cmd = std::string("\"") + HLPICONE_BIN + "\" " + args + " >\"" + so.string() +
                      "\" 2>\"" + se.string() + "\"";
    int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    fs::remove(so);
    fs::remove(se);
    return r;
}

std::string prob(const std::string& name) {
    return std::string(HLPICONE_PROBLEMS_DIR) + "/" + name;
}

fs::path write_problem(const json& j, const std::string& stem) {
    fs::path p = scratch_file(stem);
    p += ".json";
    std::ofstream out(p, std::ios::binary);
    out << j.dump(2);
    return p;
}

bool has(const std::string& hay, const std::string& needle) {
    bool found = hay.find(needle) != std::string::npos;
    if (!found) MESSAGE("text was: \"" << hay << "\", wanted \"" << needle << "\"");
    return found;
}

} // namespace

TEST_CASE("verify emits a well-formed report and exits 0 on a passing identity") {
    RunResult r = run("verify --problem \"" + prob("p16_alpha2.json") + "\" --identity 1.6");
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    json rep = json::parse(r.out);
    CHECK(rep["kind"] == "1.6");
    CHECK(rep["alpha"] == 2.0);
    CHECK(rep["pass"] == true);
    CHECK(rep["mode"] == "both");
    // residuals are reported scale-normalized
    CHECK(rep["residual_int"].get<double>() <= 1e-6);
    CHECK(rep["residual_diff"].get<double>() <= 1e-4);
    CHECK(rep["variant"]["middle_term"] == "first_derivative");
    CHECK(rep["variant"]["bracket_power"] == "corrected");
    CHECK(rep["excluded"].is_array());
    CHECK(rep["notes"].is_array());
    CHECK(rep["samples_csv_path"].is_null());
    CHECK(rep["defaults"]["grid"].get<int>() >= 7);
    CHECK(rep["n_included"].get<int>() > 0);
}

TEST_CASE("a variant override flips the verdict to exit 1") {
    RunResult r = run("verify --problem \"" + prob("p16_alpha2.json") +
                      "\" --identity 1.6 --variant bracket_power=as_printed");
    CHECK(r.code == 1);
    json rep = json::parse(r.out);
    CHECK(rep["pass"] == false);
    CHECK(rep["variant"]["bracket_power"] == "as_printed");

    // on the fourth-order identity 2.3 the same flag multiplies a vanishing
    // factor, so it cannot change the outcome and the report says so
    RunResult noop = run("verify --problem \"" + prob("p23_basic.json") +
                         "\" --identity 2.3 --variant bracket_power=as_printed");
    CHECK(noop.code == 0);
    json nrep = json::parse(noop.out);
    bool noted = false;
    for (const auto& n : nrep["notes"])
        if (n.get<std::string>().find("bracket_power") != std::string::npos) noted = true;
    CHECK(noted);
}

TEST_CASE("usage and schema failures exit 2 with an error line") {
    RunResult r = run("verify --problem /nonexistent/missing.json --identity 1.3");
    CHECK(r.code == 2);
    CHECK(has(r.err, "error: "));
    CHECK(has(r.err, "cannot open file"));

    json bad = {{"alpha", 1.0},
                {"interval", {0.0, 1.0}},
                {"order", "second"},
                {"coefficients", {{"p", "2*"}, {"q", "1"}}}};
    fs::path badp = write_problem(bad, "bad_expr");
    r = run("solve --problem \"" + badp.string() + "\"");
    CHECK(r.code == 2);
    CHECK(has(r.err, "error: "));
    CHECK(has(r.err, "offset"));

    json noiv = {{"alpha", 1.0},
                 {"order", "second"},
                 {"coefficients", {{"p", "1"}, {"q", "1"}}}};
    r = run("solve --problem \"" + write_problem(noiv, "no_interval").string() + "\"");
    CHECK(r.code == 2);
    CHECK(has(r.err, "missing member \"interval\""));

    r = run("verify --problem \"" + prob("p13_same_equation.json") + "\" --identity 9.9");
    CHECK(r.code == 2);
    CHECK(!r.err.empty());

    r = run("verify --identity 1.3");
    CHECK(r.code == 2);
    CHECK(!r.err.empty());

    r = run("");
    CHECK(r.code == 2);

    std::string base = "verify --problem \"" + prob("p13_same_equation.json") + "\" --identity 1.3";
    r = run(base + " --variant bracket_power");
    CHECK(r.code == 2);
    CHECK(has(r.err, "--variant expects KEY=VALUE"));
    r = run(base + " --variant spin=up");
    CHECK(r.code == 2);
    CHECK(has(r.err, "unknown variant key"));
    r = run(base + " --grid 6");
    CHECK(r.code == 2);
    CHECK(has(r.err, "--grid must be at least 7"));
    r = run(base + " --threshold 0");
    CHECK(r.code == 2);
    CHECK(has(r.err, "--threshold must be positive"));
    r = run(base + " --mode sometimes");
    CHECK(r.code == 2);
}

TEST_CASE("numerical failures exit 3") {
    json empty_window = {{"alpha", 1.0},
                         {"interval", {0.0, 1.0}},
                         {"order", "second"},
                         {"coefficients", {{"p", "1"}, {"q", "0"}}},
                         {"eigen_lambda_range", {-5.0, -4.0}}};
    RunResult r = run("eigen --problem \"" +
                      write_problem(empty_window, "empty_window").string() + "\" --order 2");
    CHECK(r.code == 3);
    CHECK(has(r.err, "error: "));

    json singular = {{"alpha", 1.0},
                     {"interval", {0.0, 1.0}},
                     {"order", "second"},
                     {"coefficients", {{"p", "x"}, {"q", "1"}}},
                     {"initial", {0.0, 1.0}}};
    r = run("solve --problem \"" + write_problem(singular, "singular_p").string() + "\"");
    CHECK(r.code == 3);
    CHECK(has(r.err, "vanishes"));
}

TEST_CASE("hypothesis violations exit 4 and the report names the failure") {
    json hyp = {{"alpha", 1.0},
                {"interval", {0.0, 1.0}},
                {"order", "fourth"},
                {"coefficients", {{"a", "1"}, {"b", "0"}}},
                {"second", {{"A", "2"}, {"B", "0"}, {"C", "1"}}},
                {"samples", 4},
                {"seed", 7}};
    fs::path dump = scratch_dir() / "dumps";
    fs::create_directories(dump);
    RunResult r = run("compare --problem \"" + write_problem(hyp, "hyp_fail").string() +
                      "\" --theorem 1 --dump-dir \"" + dump.string() + "\"");
    CHECK(r.code == 4);
    json rep = json::parse(r.out);
    CHECK(rep["hypotheses_hold"] == false);
    bool found = false;
    for (const auto& h : rep["hypotheses"])
        if (h["name"] == "A <= a" && h["holds"] == false) found = true;
    CHECK(found);
}

TEST_CASE("compare reports counts and honors --samples and --seed") {
    RunResult r = run("compare --problem \"" + prob("c3_classical_sturm.json") +
                      "\" --theorem c3 --samples 4 --seed 3");
    CHECK(r.code == 0);
    json rep = json::parse(r.out);
    CHECK(rep["theorem"] == "c3");
    CHECK(rep["n_samples"] == 4);
    CHECK(rep["seed"] == 3);
    CHECK(rep["samples"].size() == 4);
    CHECK(rep["counts"]["zero"] == 4);
    CHECK(rep["counts"]["counterexample"] == 0);
    CHECK(rep["condition_form"] == "none");
    for (const auto& s : rep["samples"]) CHECK(s["verdict"] == "zero_found");
}

TEST_CASE("eigen prints the eigenvalue on stdout and writes the report on request") {
    fs::path out = scratch_file("eigen2_report");
    RunResult r = run("eigen --problem \"" + prob("eigen2_dirichlet_unit.json") +
                      "\" --order 2 --out \"" + out.string() + "\"");
    CHECK(r.code == 0);
    double lam = std::stod(r.out);
    CHECK(std::fabs(lam - 9.869604401089358) <= 1e-6);
    json rep = json::parse(slurp(out));
    CHECK(rep["order"] == 2);
    CHECK(std::fabs(rep["lambda"].get<double>() - lam) == 0.0);
    CHECK(rep["theta"].is_null());
    CHECK(rep["boundary_residuals"].size() == 1);
    CHECK(rep["boundary_residuals"][0].get<double>() <= 1e-6);
    fs::remove(out);

    r = run("eigen --problem \"" + prob("eigen4_beam.json") + "\" --order 4");
    CHECK(r.code == 0);
    CHECK(std::fabs(std::stod(r.out) - 500.5639017404489) <= 1e-3);
}

TEST_CASE("solve writes the documented CSV shape") {
    fs::path csv = scratch_file("sine_csv");
    RunResult r = run("solve --problem \"" + prob("solve_sine.json") + "\" --csv \"" +
                      csv.string() + "\"");
    CHECK(r.code == 0);
    json rep = json::parse(r.out);
    CHECK(rep["order"] == "second");
    CHECK(std::fabs(rep["final_state"][0].get<double>()) <= 1e-9);
    CHECK(rep["csv_path"] == csv.string());

    std::istringstream lines(slurp(csv));
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "x,y1,y2,u,du,p_phi_du");
    int rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == rep["defaults"]["grid"].get<int>());
    fs::remove(csv);
}

TEST_CASE("repeated runs are byte-identical") {
    std::string verify_cmd =
        "verify --problem \"" + prob("p13_sin_basic.json") + "\" --identity 1.3";
    RunResult v1 = run(verify_cmd);
    RunResult v2 = run(verify_cmd);
    CHECK(v1.code == 0);
    CHECK(v1.out == v2.out);

    // --out must produce exactly the stdout bytes
    fs::path out = scratch_file("verify_report");
    run(verify_cmd + " --out \"" + out.string() + "\"");
    CHECK(slurp(out) == v1.out);
    fs::remove(out);

    std::string compare_cmd = "compare --problem \"" + prob("t1_identical.json") +
                              "\" --theorem 1 --samples 6";
    RunResult c1 = run(compare_cmd);
    RunResult c2 = run(compare_cmd);
    CHECK(c1.code == 0);
    CHECK(c1.out == c2.out);

    std::string eigen_cmd =
        "eigen --problem \"" + prob("eigen2_dirichlet_unit.json") + "\" --order 2";
    CHECK(run(eigen_cmd).out == run(eigen_cmd).out);
}

TEST_CASE("verify writes the per-point samples CSV on request") {
    fs::path csv = scratch_file("samples_csv");
    RunResult r = run("verify --problem \"" + prob("p13_same_equation.json") +
                      "\" --identity 1.3 --grid 101 --samples-csv \"" + csv.string() + "\"");
    CHECK(r.code == 0);
    json rep = json::parse(r.out);
    CHECK(rep["samples_csv_path"] == csv.string());
    CHECK(rep["grid_n"] == 101);
    std::istringstream lines(slurp(csv));
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "x,F,F_prime_est,R");
    int rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 101);
    fs::remove(csv);
}
