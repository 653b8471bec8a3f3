#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "hlpicone/picone.hpp"
#include "oracles.hpp"

using namespace hlpicone;

namespace {

PairInput2 traj2(const char* p, const char* q, double alpha, double x0, double x1,
                 std::array<double, 2> y0) {
    SecondOrderProblem prob(Expr::parse(p), Expr::parse(q), alpha, x0, x1);
    Trajectory t = integrate(prob, y0);
    return PairInput2{prob, std::move(t), std::nullopt};
}

PairInput4 traj4(const char* a, const char* b, const char* c, double alpha, double x0,
                 double x1, std::array<double, 4> y0,
                 MiddleTerm middle = MiddleTerm::first_derivative) {
    FourthOrderProblem prob(Expr::parse(a), Expr::parse(b), Expr::parse(c), alpha, x0, x1,
                            middle);
    Trajectory t = integrate(prob, y0);
    return PairInput4{prob, std::move(t), std::nullopt};
}

IdentityCase pair2_case(IdentityKind kind, double alpha, double x0, double x1,
                        PairInput2 u, PairInput2 v) {
    IdentityCase c;
    c.kind = kind;
    c.alpha = alpha;
    c.xa = x0;
    c.xb = x1;
    c.u2 = std::move(u);
    c.v2 = std::move(v);
    return c;
}

IdentityCase pair4_case(IdentityKind kind, double alpha, double x0, double x1,
                        PairInput4 u, PairInput4 v) {
    IdentityCase c;
    c.kind = kind;
    c.alpha = alpha;
    c.xa = x0;
    c.xb = x1;
    c.u4 = std::move(u);
    c.v4 = std::move(v);
    return c;
}

IdentityCase system_case(double alpha, double x0, double x1,
                         const std::vector<std::pair<const char*, const char*>>& eqs,
                         const std::vector<std::array<double, 2>>& y0s) {
    IdentityCase c;
    c.kind = IdentityKind::p26;
    c.alpha = alpha;
    c.xa = x0;
    c.xb = x1;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        SecondOrderProblem prob(Expr::parse(eqs[i].first), Expr::parse(eqs[i].second),
                                alpha, x0, x1);
        c.sys_trajs.push_back(integrate(prob, y0s[i]));
        c.sys_problems.push_back(std::move(prob));
    }
    return c;
}

} // namespace

TEST_CASE("the half-linear bracket degenerates to the linear one at alpha = 1") {
    auto mk13 = [&] {
        return pair2_case(IdentityKind::p13, 1.0, 0.1, 0.8,
                          traj2("1", "1", 1.0, 0.1, 0.8, {0.0, 1.0}),
                          traj2("1", "4", 1.0, 0.1, 0.8, {1.0, 0.0}));
    };
    auto mk16 = [&] {
        return pair2_case(IdentityKind::p16, 1.0, 0.1, 0.8,
                          traj2("1", "1", 1.0, 0.1, 0.8, {0.0, 1.0}),
                          traj2("1", "4", 1.0, 0.1, 0.8, {1.0, 0.0}));
    };
    IdentityCase c13 = mk13();
    IdentityCase c16 = mk16();
    double scale = 0.0;
    for (double x = 0.1; x <= 0.8; x += 0.007)
        scale = std::fmax(scale, 1.0 + std::fabs(identity_bracket(c13, x)) +
                                     std::fabs(identity_rhs(c13, x)));
    for (double x = 0.1; x <= 0.8; x += 0.007) {
        CHECK(std::fabs(identity_bracket(c16, x) - identity_bracket(c13, x)) <=
              1e-12 * scale);
        CHECK(std::fabs(identity_rhs(c16, x) - identity_rhs(c13, x)) <= 1e-12 * scale);
    }

    IdentityReport r13 = verify_identity(mk13());
    IdentityReport r16 = verify_identity(mk16());
    CHECK(r13.pass_diff);
    CHECK(r13.pass_int);
    CHECK(r16.pass_diff);
    CHECK(r16.pass_int);
    CHECK_FALSE(r13.anomaly);
    CHECK(r13.n_runs == 1);
    CHECK(r13.excluded.empty());
    CHECK(r13.n_included == r13.grid_n);
    CHECK(static_cast<int>(r13.samples.size()) == r13.n_included);
}

TEST_CASE("the bracket vanishes on coinciding solutions") {
    for (double alpha : {1.0, 2.0}) {
        IdentityCase c = pair2_case(alpha == 1.0 ? IdentityKind::p13 : IdentityKind::p16,
                                    alpha, 0.0, 1.0,
                                    traj2("1", "1", alpha, 0.0, 1.0, {1.0, 0.5}),
                                    traj2("1", "1", alpha, 0.0, 1.0, {1.0, 0.5}));
        for (double x = 0.0; x <= 1.0; x += 0.09) {
            double u = c.u2->traj->state_at(x)[0];
            double y2 = c.u2->traj->state_at(x)[1];
            double local = 1.0 + std::fabs(u * y2);
            CHECK(std::fabs(identity_bracket(c, x)) <= 1e-13 * local);
            CHECK(std::fabs(identity_rhs(c, x)) <= 1e-13 * local);
        }
    }
}

TEST_CASE("two-equation system bracket is the negated pairwise bracket") {
    for (double alpha : {1.0, 2.0}) {
        IdentityCase cs = system_case(alpha, 0.0, 1.0, {{"1", "-1"}, {"1", "-0.5"}},
                                      {{1.0, 0.3}, {1.0, 0.6}});
        IdentityCase cp = pair2_case(IdentityKind::p16, alpha, 0.0, 1.0,
                                     traj2("1", "-1", alpha, 0.0, 1.0, {1.0, 0.3}),
                                     traj2("1", "-0.5", alpha, 0.0, 1.0, {1.0, 0.6}));
        double scale = 0.0;
        for (double x = 0.0; x <= 1.0; x += 0.01)
            scale = std::fmax(scale, 1.0 + std::fabs(identity_bracket(cp, x)) +
                                         std::fabs(identity_rhs(cp, x)));
        for (double x = 0.0; x <= 1.0; x += 0.01) {
            CHECK(std::fabs(identity_bracket(cs, x) + identity_bracket(cp, x)) <=
                  1e-10 * scale);
            CHECK(std::fabs(identity_rhs(cs, x) + identity_rhs(cp, x)) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("identical equations reduce the right side to the pure Q-form term") {
    double alpha = 2.0;
    SignedPowerParam ap(alpha);
    IdentityCase c = pair2_case(IdentityKind::p16, alpha, 0.0, 1.0,
                                traj2("1+x", "-1", alpha, 0.0, 1.0, {0.5, 1.0}),
                                traj2("1+x", "-1", alpha, 0.0, 1.0, {1.0, 0.4}));
    for (double x = 0.0; x <= 1.0; x += 0.11) {
        Fields2 fu = c.u2->traj->fields2_at(x);
        Fields2 fv = c.v2->traj->fields2_at(x);
        double pv = 1.0 + x;
        double expected = pv * q_form(ap, fu.du, fu.u * fv.du / fv.u);
        double got = identity_rhs(c, x);
        CHECK(std::fabs(got - expected) <= 1e-12 * (1.0 + std::fabs(expected)));
    }
}

TEST_CASE("fourth-order identities hold on trajectories at corpus accuracy") {
    IdentityCase c23 = pair4_case(IdentityKind::p23, 1.0, 0.0, 1.0,
                                  traj4("1", "1", "1", 1.0, 0.0, 1.0, {0.0, 1.0, 0.5, 0.0}),
                                  traj4("1", "1", "1", 1.0, 0.0, 1.0, {1.0, 0.0, 0.2, 0.0}));
    IdentityReport r23 = verify_identity(c23);
    CHECK(r23.pass_int);
    CHECK(r23.pass_diff);
    CHECK(r23.residual_int <= 1e-10);

    IdentityCase c24 = pair4_case(IdentityKind::p24, 1.0, 0.0, 1.0,
                                  traj4("1", "1", "1", 1.0, 0.0, 1.0, {0.0, 1.0, 0.5, 0.0}),
                                  traj4("1", "1", "1", 1.0, 0.0, 1.0, {1.0, 0.5, 0.3, 0.2}));
    IdentityReport r24 = verify_identity(c24);
    CHECK(r24.pass_int);
    CHECK(r24.pass_diff);
    CHECK(r24.residual_int <= 1e-10);
}

TEST_CASE("transcription variants break the identities measurably") {
    // |u| in place of |u'| inside the 1.6 bracket
    auto mk16 = [](VariantFlags vf) {
        IdentityCase c = pair2_case(IdentityKind::p16, 2.0, 0.0, 1.0,
                                    traj2("1", "2", 2.0, 0.0, 1.0, {0.0, 1.0}),
                                    traj2("1", "2", 2.0, 0.0, 1.0, {1.0, 0.0}));
        c.variants = vf;
        return c;
    };
    VariantFlags bad16;
    bad16.bracket_power = BracketPower::as_printed;
    IdentityReport r16 = verify_identity(mk16(bad16));
    CHECK_FALSE(r16.pass_int);
    CHECK(r16.residual_int > 1e-4);
    CHECK(verify_identity(mk16(VariantFlags{})).pass_int);

    // middle bracket differentiated twice in 2.3
    auto mk23 = [](MiddleTerm middle) {
        VariantFlags vf;
        vf.middle_term = middle;
        IdentityCase c = pair4_case(
            IdentityKind::p23, 1.0, 0.0, 1.0,
            traj4("1", "1", "1", 1.0, 0.0, 1.0, {0.0, 1.0, 0.5, 0.0}, middle),
            traj4("1", "1", "1", 1.0, 0.0, 1.0, {1.0, 0.0, 0.2, 0.0}, middle));
        c.variants = vf;
        return c;
    };
    IdentityReport r23 = verify_identity(mk23(MiddleTerm::as_printed_second_derivative));
    CHECK_FALSE(r23.pass_int);
    CHECK(r23.residual_int > 1e-4);

    // bracket power is documented as having no effect on 2.3
    VariantFlags noop23;
    noop23.bracket_power = BracketPower::as_printed;
    IdentityCase c23 = pair4_case(IdentityKind::p23, 1.0, 0.0, 1.0,
                                  traj4("1", "1", "1", 1.0, 0.0, 1.0, {0.0, 1.0, 0.5, 0.0}),
                                  traj4("1", "1", "1", 1.0, 0.0, 1.0, {1.0, 0.0, 0.2, 0.0}));
    c23.variants = noop23;
    IdentityReport r23n = verify_identity(c23);
    CHECK(r23n.pass_int);
    bool noted = false;
    for (const std::string& n : r23n.notes)
        if (n.find("bracket_power") != std::string::npos) noted = true;
    CHECK(noted);

    // second bracket and condition power transcriptions in 2.4
    auto mk24 = [](VariantFlags vf) {
        IdentityCase c = pair4_case(IdentityKind::p24, 1.0, 0.0, 1.0,
                                    traj4("1", "1", "1", 1.0, 0.0, 1.0, {0.0, 1.0, 0.5, 0.0}),
                                    traj4("1", "1", "1", 1.0, 0.0, 1.0, {1.0, 0.5, 0.3, 0.2}));
        c.variants = vf;
        return c;
    };
    VariantFlags sb;
    sb.second_bracket = SecondBracket::as_printed_derivative;
    IdentityReport rsb = verify_identity(mk24(sb));
    CHECK_FALSE(rsb.pass_int);
    CHECK(rsb.residual_int > 1e-3);

    VariantFlags cp;
    cp.condition_power = ConditionPower::as_printed;
    IdentityReport rcp = verify_identity(mk24(cp));
    CHECK_FALSE(rcp.pass_int);
    CHECK(rcp.residual_int > 1e-3);

    // both distinguished-index conventions are identities for 2.6
    IdentityCase cs1 = system_case(1.0, 0.0, 1.0, {{"1", "-1"}, {"1", "-2"}, {"1", "-0.5"}},
                                   {{1.0, 0.5}, {1.0, 0.3}, {1.0, 0.8}});
    CHECK(verify_identity(cs1).pass_int);
    IdentityCase cs2 = system_case(1.0, 0.0, 1.0, {{"1", "-1"}, {"1", "-2"}, {"1", "-0.5"}},
                                   {{1.0, 0.5}, {1.0, 0.3}, {1.0, 0.8}});
    cs2.variants.distinguished_index = DistinguishedIndex::last;
    CHECK(verify_identity(cs2).pass_int);
}

TEST_CASE("the g-factor derivative matches finite differences") {
    oracles::Rand rng(848);
    for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
        SignedPowerParam ap(alpha);
        for (int i = 0; i < 250; ++i) {
            double u = (rng.next() & 1u ? 1.0 : -1.0) * rng.uniform(0.5, 3.0);
            double v = (rng.next() & 1u ? 1.0 : -1.0) * rng.uniform(0.5, 3.0);
            double du = rng.uniform(-2.0, 2.0);
            double dv = rng.uniform(-2.0, 2.0);
            double h = 1e-4;
            double fd = oracles::fd5_first(
                [&](double t) { return picone_g(ap, u + du * t, v + dv * t); }, 0.0, h);
            double sym = picone_gp(ap, u, du, v, dv);
            CHECK(std::fabs(sym - fd) <= 1e-6 * (1.0 + std::fabs(sym)));
        }
    }
}

TEST_CASE("bracket and right side scale like |c|^(alpha+1)") {
    double alpha = 2.0;
    SignedPowerParam ap(alpha);
    double c = -2.0;
    double pc = phi(ap, c);
    double factor = pow_abs(c, alpha + 1.0);

    auto base_u = traj2("1", "-2", alpha, 0.0, 1.0, {0.3, 1.0});
    auto scaled_u = traj2("1", "-2", alpha, 0.0, 1.0, {c * 0.3, pc * 1.0});
    auto mkv = [&] { return traj2("1", "-1", alpha, 0.0, 1.0, {2.0, 0.5}); };

    IdentityCase cb = pair2_case(IdentityKind::p16, alpha, 0.0, 1.0, std::move(base_u), mkv());
    IdentityCase cs = pair2_case(IdentityKind::p16, alpha, 0.0, 1.0, std::move(scaled_u), mkv());
    for (double x = 0.0; x <= 1.0; x += 0.13) {
        double fb = identity_bracket(cb, x), fs = identity_bracket(cs, x);
        double rb = identity_rhs(cb, x), rs = identity_rhs(cs, x);
        CHECK(std::fabs(fs - factor * fb) <= 1e-9 * (1.0 + std::fabs(factor * fb)));
        CHECK(std::fabs(rs - factor * rb) <= 1e-9 * (1.0 + std::fabs(factor * rb)));
    }
}

TEST_CASE("g-factor and Q-form are continuous in alpha near 1") {
    for (double eps : {1e-7, -1e-7}) {
        SignedPowerParam near_one(1.0 + eps);
        for (double u : {0.7, -1.3, 2.0})
            for (double v : {0.9, -2.1}) {
                double lim = u * u / v;
                CHECK(std::fabs(picone_g(near_one, u, v) - lim) <=
                      1e-5 * (1.0 + std::fabs(lim)));
            }
        for (double X : {0.4, -1.7, 2.2})
            for (double Y : {1.1, -0.6}) {
                double lim = (X - Y) * (X - Y);
                CHECK(std::fabs(q_form(near_one, X, Y) - lim) <= 1e-4 * (1.0 + lim));
            }
    }
}

TEST_CASE("near-vanishing denominators are excluded as maximal runs") {
    IdentityCase c = pair2_case(IdentityKind::p13, 1.0, 0.0, 1.4,
                                traj2("1", "1", 1.0, 0.0, 1.4, {0.0, 1.0}),
                                traj2("1", "4", 1.0, 0.0, 1.4, {1.0, 0.0}));
    c.delta_rel = 0.05;
    IdentityReport rep = verify_identity(c);
    CHECK(rep.pass_int);
    CHECK(rep.pass_diff);
    CHECK(rep.n_runs == 2);
    REQUIRE(rep.excluded.size() == 1);
    double zero = oracles::pi / 4.0; // v = cos(2x)
    CHECK(rep.excluded[0].first < zero);
    CHECK(rep.excluded[0].second > zero);
    CHECK(rep.excluded[0].second - rep.excluded[0].first < 0.1);
    CHECK(rep.n_included < rep.grid_n);
    CHECK(static_cast<int>(rep.samples.size()) == rep.n_included);
    for (const IdentitySample& s : rep.samples) {
        bool inside = s.x > rep.excluded[0].first && s.x < rep.excluded[0].second;
        CHECK_FALSE(inside);
    }
}

TEST_CASE("identically vanishing denominators are rejected") {
    IdentityCase c = pair2_case(IdentityKind::p13, 1.0, 0.0, 1.0,
                                traj2("1", "1", 1.0, 0.0, 1.0, {0.0, 1.0}),
                                traj2("1", "1", 1.0, 0.0, 1.0, {0.0, 0.0}));
    CHECK_THROWS_AS(verify_identity(c), case_error);
}

TEST_CASE("alternating binomial weights") {
    for (int n = 2; n <= 6; ++n) {
        std::vector<double> w = p26_weights(n);
        REQUIRE(static_cast<int>(w.size()) == n);
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            double expect = ((n - k - 1) % 2 == 0 ? 1.0 : -1.0) * oracles::binom_exact(n - 1, k);
            CHECK(w[static_cast<std::size_t>(k)] == expect);
            sum += w[static_cast<std::size_t>(k)];
        }
        CHECK(sum == 0.0);
    }
    CHECK(p26_weights(2)[0] == -1.0);
    CHECK(p26_weights(2)[1] == 1.0);
    CHECK_THROWS_AS(p26_weights(1), case_error);
}

TEST_CASE("the distinguished equation contributes no Q-term") {
    IdentityCase c = system_case(1.0, 0.0, 1.0, {{"1", "-1"}, {"1", "-2"}, {"1", "-0.5"}},
                                 {{1.0, 0.5}, {1.0, 0.3}, {1.0, 0.8}});
    for (double x : {0.1, 0.37, 0.62, 0.99}) {
        CHECK(p26_q_term(c, 2, x) == 0.0); // default distinguished index N-1
        CHECK(p26_q_term(c, 1, x) != 0.0);
        CHECK(p26_q_term(c, 3, x) != 0.0);
    }
    CHECK_THROWS_AS(p26_q_term(c, 0, 0.5), case_error);
    CHECK_THROWS_AS(p26_q_term(c, 4, 0.5), case_error);

    IdentityCase cl = system_case(1.0, 0.0, 1.0, {{"1", "-1"}, {"1", "-2"}, {"1", "-0.5"}},
                                  {{1.0, 0.5}, {1.0, 0.3}, {1.0, 0.8}});
    cl.variants.distinguished_index = DistinguishedIndex::last;
    for (double x : {0.2, 0.8}) CHECK(p26_q_term(cl, 3, x) == 0.0);
}

TEST_CASE("malformed cases are rejected") {
    // 1.3 requires alpha = 1
    IdentityCase c = pair2_case(IdentityKind::p13, 2.0, 0.0, 1.0,
                                traj2("1", "1", 2.0, 0.0, 1.0, {0.0, 1.0}),
                                traj2("1", "1", 2.0, 0.0, 1.0, {1.0, 0.0}));
    CHECK_THROWS_AS(verify_identity(c), case_error);

    // 1.3 takes trajectories only
    IdentityCase cf = pair2_case(IdentityKind::p13, 1.0, 0.1, 1.0,
                                 traj2("1", "1", 1.0, 0.1, 1.0, {0.0, 1.0}),
                                 traj2("1", "1", 1.0, 0.1, 1.0, {1.0, 0.0}));
    cf.v2->traj.reset();
    cf.v2->fn = Expr::parse("2+x");
    CHECK_THROWS_AS(verify_identity(cf), case_error);

    // missing inputs
    IdentityCase cm;
    cm.kind = IdentityKind::p16;
    cm.alpha = 1.0;
    cm.xa = 0.0;
    cm.xb = 1.0;
    CHECK_THROWS_AS(verify_identity(cm), case_error);

    // mismatched alpha between case and problem
    IdentityCase ca = pair2_case(IdentityKind::p16, 2.0, 0.0, 1.0,
                                 traj2("1", "1", 1.0, 0.0, 1.0, {0.0, 1.0}),
                                 traj2("1", "1", 1.0, 0.0, 1.0, {1.0, 0.0}));
    CHECK_THROWS_AS(verify_identity(ca), case_error);

    // degenerate grid / interval
    IdentityCase cg = pair2_case(IdentityKind::p16, 1.0, 0.0, 1.0,
                                 traj2("1", "1", 1.0, 0.0, 1.0, {0.0, 1.0}),
                                 traj2("1", "1", 1.0, 0.0, 1.0, {1.0, 0.0}));
    cg.grid_n = 5;
    CHECK_THROWS_AS(verify_identity(cg), case_error);
    cg.grid_n = 2001;
    cg.xb = cg.xa;
    CHECK_THROWS_AS(verify_identity(cg), case_error);
}
