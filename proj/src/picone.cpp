#include "hlpicone/picone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hlpicone {

double picone_g(const SignedPowerParam& alpha, double u, double v) {
    return u * phi(alpha, u) / phi(alpha, v);
}

double picone_gp(const SignedPowerParam& alpha, double u, double du, double v, double dv) {
    double a = alpha.alpha;
    double pv = phi(alpha, v);
    return ((a + 1.0) * phi(alpha, u) * du * pv -
            a * pow_abs(u, a + 1.0) * pow_abs(v, a - 1.0) * dv) /
           (pv * pv);
}

std::vector<double> p26_weights(int n) {
    if (n < 2) throw case_error("system identity needs at least two equations");
    std::vector<double> w(static_cast<std::size_t>(n));
    double binom = 1.0; // C(n-1, k), exact in doubles for small n
    for (int k = 0; k < n; ++k) {
        w[static_cast<std::size_t>(k)] = ((n - k - 1) % 2 == 0 ? 1.0 : -1.0) * binom;
        binom = binom * (n - 1 - k) / (k + 1);
    }
    return w;
}

namespace {

const double kNan = std::numeric_limits<double>::quiet_NaN();

// Q-form whose leading |X|^{alpha+1} term can be replaced (as-printed bracket
// power variants substitute a different quantity there).
double q_form_first(const SignedPowerParam& ap, double X, double Y, double first) {
    double a = ap.alpha;
    return pow_abs(first, a + 1.0) + a * pow_abs(Y, a + 1.0) - (a + 1.0) * X * phi(ap, Y);
}

struct Side2 {
    double u, du, p_phi_du, lu;
};

struct Side4 {
    double u, du, d2u, a_phi_d2u, d_a_phi_d2u, b_phi_du, lu;
};

class Eval2 {
public:
    explicit Eval2(const PairInput2& in) : prob_(&in.problem) {
        if (in.traj && in.fn) throw case_error("input has both a trajectory and a function");
        if (!in.traj && !in.fn) throw case_error("input has neither trajectory nor function");
        if (in.traj) {
            traj_ = &*in.traj;
        } else {
            fn_ = *in.fn;
            dfn_ = fn_->derive();
            Expr q_eff = prob_->q_offset != 0.0 ? prob_->q + Expr::constant(prob_->q_offset)
                                                : prob_->q;
            op_.emplace(prob_->p, q_eff, prob_->alpha, *fn_);
        }
    }

    Side2 at(double x) const {
        if (traj_) {
            Fields2 f = traj_->fields2_at(x);
            return {f.u, f.du, f.p_phi_du, 0.0};
        }
        double u = fn_->eval(x), du = dfn_.eval(x);
        return {u, du, prob_->p.eval(x) * phi(prob_->alpha, du), (*op_)(x)};
    }

    bool is_traj() const { return traj_ != nullptr; }
    const SecondOrderProblem& prob() const { return *prob_; }

private:
    const SecondOrderProblem* prob_;
    const Trajectory* traj_ = nullptr;
    std::optional<Expr> fn_;
    Expr dfn_;
    std::optional<Operator2> op_;
};

class Eval4 {
public:
    explicit Eval4(const PairInput4& in) : prob_(&in.problem) {
        if (in.traj && in.fn) throw case_error("input has both a trajectory and a function");
        if (!in.traj && !in.fn) throw case_error("input has neither trajectory nor function");
        if (in.traj) {
            traj_ = &*in.traj;
        } else {
            fn_ = *in.fn;
            dfn_ = fn_->derive();
            d2fn_ = dfn_.derive();
            dap_ = (prob_->a * Expr::sgnpow_of(d2fn_, prob_->alpha.alpha)).derive();
            Expr c_eff = prob_->c_offset != 0.0 ? prob_->c + Expr::constant(prob_->c_offset)
                                                : prob_->c;
            op_.emplace(prob_->a, prob_->b, c_eff, prob_->alpha, *fn_, prob_->middle);
        }
    }

    Side4 at(double x) const {
        if (traj_) {
            Fields4 f = traj_->fields4_at(x);
            return {f.u, f.du, f.d2u, f.a_phi_d2u, f.d_a_phi_d2u, f.b_phi_du, 0.0};
        }
        double u = fn_->eval(x), du = dfn_.eval(x), d2u = d2fn_.eval(x);
        double av = prob_->a.eval(x), bv = prob_->b.eval(x);
        return {u,
                du,
                d2u,
                av * phi(prob_->alpha, d2u),
                dap_.eval(x),
                bv * phi(prob_->alpha, du),
                (*op_)(x)};
    }

    const FourthOrderProblem& prob() const { return *prob_; }

private:
    const FourthOrderProblem* prob_;
    const Trajectory* traj_ = nullptr;
    std::optional<Expr> fn_;
    Expr dfn_, d2fn_, dap_;
    std::optional<Operator4> op_;
};

struct Ctx {
    Side2 u2{}, v2{};
    Side4 u4{}, v4{};
    std::vector<Side2> sys;
};

class Engine {
public:
    explicit Engine(const IdentityCase& c) : c_(c), ap_(c.alpha) {
        switch (c.kind) {
        case IdentityKind::p13:
        case IdentityKind::p16:
            if (!c.u2 || !c.v2)
                throw case_error("pairwise second-order identity needs u and v inputs");
            if (c.kind == IdentityKind::p13) {
                if (c.alpha != 1.0) throw case_error("identity 1.3 requires alpha = 1");
                if (c.u2->fn || c.v2->fn)
                    throw case_error("identity 1.3 takes solution trajectories only");
            }
            check_alpha(c.u2->problem.alpha.alpha);
            check_alpha(c.v2->problem.alpha.alpha);
            eu2_.emplace(*c.u2);
            ev2_.emplace(*c.v2);
            break;
        case IdentityKind::p23:
        case IdentityKind::p24:
            if (!c.u4 || !c.v4)
                throw case_error("pairwise fourth-order identity needs u and v inputs");
            check_alpha(c.u4->problem.alpha.alpha);
            check_alpha(c.v4->problem.alpha.alpha);
            eu4_.emplace(*c.u4);
            ev4_.emplace(*c.v4);
            break;
        case IdentityKind::p26: {
            n_ = static_cast<int>(c.sys_trajs.size());
            if (n_ < 2) throw case_error("system identity needs at least two trajectories");
            for (const auto& t : c.sys_trajs) {
                if (t.dim() != 2) throw case_error("system identity takes second-order trajectories");
                check_alpha(t.problem2().alpha.alpha);
            }
            m_ = c.variants.distinguished_index == DistinguishedIndex::n_minus_1 ? n_ - 1 : n_;
            w_ = p26_weights(n_);
            break;
        }
        }
    }

    int n_denoms() const {
        switch (c_.kind) {
        case IdentityKind::p13:
        case IdentityKind::p16:
        case IdentityKind::p23: return 1;
        case IdentityKind::p24: return 2;
        case IdentityKind::p26: return n_;
        }
        return 0;
    }

    Ctx context(double x) const {
        Ctx t;
        switch (c_.kind) {
        case IdentityKind::p13:
        case IdentityKind::p16:
            t.u2 = eu2_->at(x);
            t.v2 = ev2_->at(x);
            break;
        case IdentityKind::p23:
        case IdentityKind::p24:
            t.u4 = eu4_->at(x);
            t.v4 = ev4_->at(x);
            break;
        case IdentityKind::p26:
            t.sys.reserve(static_cast<std::size_t>(n_));
            for (const auto& traj : c_.sys_trajs) {
                Fields2 f = traj.fields2_at(x);
                t.sys.push_back({f.u, f.du, f.p_phi_du, 0.0});
            }
            break;
        }
        return t;
    }

    void denominators(const Ctx& t, std::vector<double>& out) const {
        out.clear();
        switch (c_.kind) {
        case IdentityKind::p13:
        case IdentityKind::p16: out.push_back(t.v2.u); break;
        case IdentityKind::p23: out.push_back(t.v4.u); break;
        case IdentityKind::p24:
            out.push_back(t.v4.u);
            out.push_back(t.v4.du);
            break;
        case IdentityKind::p26:
            for (const auto& s : t.sys) out.push_back(s.u);
            break;
        }
    }

    double F(double /*x*/, const Ctx& t) const {
        switch (c_.kind) {
        case IdentityKind::p13: {
            const Side2 &U = t.u2, &V = t.v2;
            return U.u * U.p_phi_du - (U.u * U.u / V.u) * V.p_phi_du;
        }
        case IdentityKind::p16: {
            const Side2 &U = t.u2, &V = t.v2;
            double G = picone_g(ap_, U.u, V.u);
            return U.u * U.p_phi_du - G * V.p_phi_du;
        }
        case IdentityKind::p23: {
            const Side4 &U = t.u4, &V = t.v4;
            double G = picone_g(ap_, U.u, V.u);
            double Gp = picone_gp(ap_, U.u, U.du, V.u, V.du);
            double t1 = U.u * U.d_a_phi_d2u - U.a_phi_d2u * U.du;
            double t2 = V.a_phi_d2u * Gp - G * V.d_a_phi_d2u;
            double t3 = U.u * U.b_phi_du - G * V.b_phi_du;
            return t1 + t2 - t3;
        }
        case IdentityKind::p24: {
            const Side4 &U = t.u4, &V = t.v4;
            double G = picone_g(ap_, U.u, V.u);
            double g2 = pow_abs(U.du, ap_.alpha + 1.0) / phi(ap_, V.du);
            double x1 = G * V.d_a_phi_d2u - U.u * U.d_a_phi_d2u;
            double x2 = c_.variants.second_bracket == SecondBracket::corrected
                            ? U.du * U.a_phi_d2u - g2 * V.a_phi_d2u
                            : U.du * U.d_a_phi_d2u - g2 * V.d_a_phi_d2u;
            double x3 = U.u * U.b_phi_du - G * V.b_phi_du;
            return x1 + x2 + x3;
        }
        case IdentityKind::p26: {
            const Side2& M = t.sys[static_cast<std::size_t>(m_ - 1)];
            double sum = 0.0;
            for (int k = 0; k < n_; ++k) {
                const Side2& S = t.sys[static_cast<std::size_t>(k)];
                sum += w_[static_cast<std::size_t>(k)] * (S.p_phi_du / phi(ap_, S.u));
            }
            return pow_abs(M.u, ap_.alpha + 1.0) * sum;
        }
        }
        return kNan;
    }

    double R(double x, const Ctx& t) const {
        double a = ap_.alpha;
        switch (c_.kind) {
        case IdentityKind::p13: {
            const Side2 &U = t.u2, &V = t.v2;
            double pu = eu2_->prob().p.eval(x);
            double qu = eu2_->prob().q.eval(x) + eu2_->prob().q_offset;
            double pv = ev2_->prob().p.eval(x);
            double qv = ev2_->prob().q.eval(x) + ev2_->prob().q_offset;
            double d = U.du - (U.u / V.u) * V.du;
            return (pu - pv) * U.du * U.du + (qv - qu) * U.u * U.u + pv * d * d;
        }
        case IdentityKind::p16: {
            const Side2 &U = t.u2, &V = t.v2;
            double pu = eu2_->prob().p.eval(x);
            double qu = eu2_->prob().q.eval(x) + eu2_->prob().q_offset;
            double pv = ev2_->prob().p.eval(x);
            double qv = ev2_->prob().q.eval(x) + ev2_->prob().q_offset;
            double G = picone_g(ap_, U.u, V.u);
            double first =
                c_.variants.bracket_power == BracketPower::corrected ? U.du : U.u;
            double qf = q_form_first(ap_, U.du, U.u * V.du / V.u, first);
            return (pu - pv) * pow_abs(U.du, a + 1.0) + (qv - qu) * pow_abs(U.u, a + 1.0) +
                   pv * qf + (U.u * U.lu - G * V.lu);
        }
        case IdentityKind::p23: {
            const Side4 &U = t.u4, &V = t.v4;
            const auto &pu = eu4_->prob(), &pv = ev4_->prob();
            double au = pu.a.eval(x), bu = pu.b.eval(x), cu = pu.c.eval(x) + pu.c_offset;
            double av = pv.a.eval(x), bv = pv.b.eval(x), cv = pv.c.eval(x) + pv.c_offset;
            double G = picone_g(ap_, U.u, V.u);
            double wr = (U.du * V.u - U.u * V.du) / V.u;
            double phi_ratio = phi(ap_, V.d2u) / phi(ap_, V.u);
            return U.u * U.lu - G * V.lu +
                   av * a * (a + 1.0) * pow_abs(U.u, a - 1.0) * phi_ratio * wr * wr -
                   av * q_form(ap_, U.d2u, (U.u / V.u) * V.d2u) -
                   bv * q_form(ap_, U.du, (U.u / V.u) * V.du) +
                   (av - au) * pow_abs(U.d2u, a + 1.0) +
                   (bv - bu) * pow_abs(U.du, a + 1.0) + (cv - cu) * pow_abs(U.u, a + 1.0);
        }
        case IdentityKind::p24: {
            const Side4 &U = t.u4, &V = t.v4;
            const auto &pu = eu4_->prob(), &pv = ev4_->prob();
            double au = pu.a.eval(x), bu = pu.b.eval(x), cu = pu.c.eval(x) + pu.c_offset;
            double av = pv.a.eval(x), bv = pv.b.eval(x), cv = pv.c.eval(x) + pv.c_offset;
            double G = picone_g(ap_, U.u, V.u);
            double w = c_.variants.bracket_power == BracketPower::corrected
                           ? pow_abs(U.d2u, a + 1.0)
                           : pow_abs(U.du, a + 1.0);
            double cp = c_.variants.condition_power == ConditionPower::corrected
                            ? pow_abs(V.du, a + 1.0)
                            : pow_abs(V.u, a + 1.0);
            double big_q = bv * cp - V.du * V.d_a_phi_d2u;
            return (au - av) * w + (bu - bv) * pow_abs(U.du, a + 1.0) +
                   (cu - cv) * pow_abs(U.u, a + 1.0) +
                   av * q_form(ap_, U.d2u, U.du * V.d2u / V.du) +
                   big_q * q_form(ap_, U.du / V.du, U.u / V.u) + (G * V.lu - U.u * U.lu);
        }
        case IdentityKind::p26: {
            const Side2& M = t.sys[static_cast<std::size_t>(m_ - 1)];
            double sum_p = 0.0, sum_q = 0.0, q_terms = 0.0;
            for (int k = 0; k < n_; ++k) {
                const Side2& S = t.sys[static_cast<std::size_t>(k)];
                const auto& prob = c_.sys_trajs[static_cast<std::size_t>(k)].problem2();
                double wk = w_[static_cast<std::size_t>(k)];
                double pk = prob.p.eval(x);
                sum_p += wk * pk;
                sum_q += wk * (prob.q.eval(x) + prob.q_offset);
                // The distinguished equation's Q-form vanishes identically.
                if (k + 1 != m_)
                    q_terms += wk * pk * q_form(ap_, M.du, M.u * S.du / S.u);
            }
            return sum_p * pow_abs(M.du, a + 1.0) - sum_q * pow_abs(M.u, a + 1.0) - q_terms;
        }
        }
        return kNan;
    }

    int system_size() const { return n_; }
    int distinguished() const { return m_; }
    const std::vector<double>& weights() const { return w_; }

private:
    void check_alpha(double a) const {
        if (a != c_.alpha) throw case_error("problem alpha differs from the case alpha");
    }

    const IdentityCase& c_;
    SignedPowerParam ap_;
    std::optional<Eval2> eu2_, ev2_;
    std::optional<Eval4> eu4_, ev4_;
    int n_ = 0, m_ = 0;
    std::vector<double> w_;
};

// Composite integral over one maximal included run of uniformly spaced
// samples: Simpson pairs with a 3/8 tail when the interval count is odd,
// trapezoid for a single interval.
double run_integral(const std::vector<double>& r, int s, int e, double h) {
    int m = e - s;
    if (m == 1) return 0.5 * h * (r[s] + r[e]);
    double total = 0.0;
    int simpson_end = e;
    if (m % 2 == 1) {
        simpson_end = e - 3;
        total += 3.0 * h / 8.0 *
                 (r[static_cast<std::size_t>(e - 3)] + 3.0 * r[static_cast<std::size_t>(e - 2)] +
                  3.0 * r[static_cast<std::size_t>(e - 1)] + r[static_cast<std::size_t>(e)]);
    }
    for (int i = s; i + 2 <= simpson_end; i += 2)
        total += h / 3.0 *
                 (r[static_cast<std::size_t>(i)] + 4.0 * r[static_cast<std::size_t>(i + 1)] +
                  r[static_cast<std::size_t>(i + 2)]);
    return total;
}

} // namespace

IdentityReport verify_identity(const IdentityCase& c, double threshold) {
    if (c.grid_n < 7) throw case_error("grid_n must be at least 7");
    if (!(std::isfinite(c.xa) && std::isfinite(c.xb) && c.xa < c.xb))
        throw case_error("identity interval must satisfy xa < xb");
    Engine eng(c);

    const int n = c.grid_n;
    const double h = (c.xb - c.xa) / (n - 1);
    std::vector<double> xs(static_cast<std::size_t>(n));
    std::vector<Ctx> ctx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        xs[static_cast<std::size_t>(i)] = i == n - 1 ? c.xb : c.xa + h * i;
        ctx[static_cast<std::size_t>(i)] = eng.context(xs[static_cast<std::size_t>(i)]);
    }

    // Exclusion: a point is dropped when any denominator is within delta of 0,
    // with delta = delta_rel * (grid max of that denominator).
    const int nd = eng.n_denoms();
    std::vector<std::vector<double>> dvals(static_cast<std::size_t>(nd),
                                           std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<double> tmp;
    for (int i = 0; i < n; ++i) {
        eng.denominators(ctx[static_cast<std::size_t>(i)], tmp);
        for (int d = 0; d < nd; ++d)
            dvals[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)] =
                tmp[static_cast<std::size_t>(d)];
    }
    std::vector<double> cut(static_cast<std::size_t>(nd));
    for (int d = 0; d < nd; ++d) {
        double dmax = 0.0;
        for (double v : dvals[static_cast<std::size_t>(d)]) dmax = std::max(dmax, std::fabs(v));
        if (dmax == 0.0) throw case_error("a denominator vanishes identically on the grid");
        cut[static_cast<std::size_t>(d)] = c.delta_rel * dmax;
    }
    std::vector<char> included(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < nd; ++d)
            if (std::fabs(dvals[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)]) <
                cut[static_cast<std::size_t>(d)]) {
                included[static_cast<std::size_t>(i)] = 0;
                break;
            }

    IdentityReport rep;
    rep.kind = c.kind;
    rep.alpha = c.alpha;
    rep.variants = c.variants;
    rep.xa = c.xa;
    rep.xb = c.xb;
    rep.grid_n = n;
    rep.delta_rel = c.delta_rel;
    rep.threshold = threshold;

    for (int i = 0; i < n;) {
        if (included[static_cast<std::size_t>(i)]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < n && !included[static_cast<std::size_t>(j + 1)]) ++j;
        rep.excluded.emplace_back(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
        i = j + 1;
    }

    std::vector<double> fv(static_cast<std::size_t>(n), kNan),
        rv(static_cast<std::size_t>(n), kNan);
    double fmax = 0.0, rmax = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!included[static_cast<std::size_t>(i)]) continue;
        ++rep.n_included;
        double x = xs[static_cast<std::size_t>(i)];
        fv[static_cast<std::size_t>(i)] = eng.F(x, ctx[static_cast<std::size_t>(i)]);
        rv[static_cast<std::size_t>(i)] = eng.R(x, ctx[static_cast<std::size_t>(i)]);
        fmax = std::max(fmax, std::fabs(fv[static_cast<std::size_t>(i)]));
        rmax = std::max(rmax, std::fabs(rv[static_cast<std::size_t>(i)]));
    }
    rep.scale = 1.0 + fmax + rmax;

    // Differential residual on 5-point interior stencils fully inside an
    // included run; one sample row per included point.
    double worst_diff = kNan;
    for (int i = 0; i < n; ++i) {
        if (!included[static_cast<std::size_t>(i)]) continue;
        bool stencil = i >= 2 && i + 2 < n;
        for (int k = i - 2; stencil && k <= i + 2; ++k)
            if (!included[static_cast<std::size_t>(k)]) stencil = false;
        double fp = kNan;
        if (stencil) {
            fp = (-fv[static_cast<std::size_t>(i + 2)] +
                  8.0 * fv[static_cast<std::size_t>(i + 1)] -
                  8.0 * fv[static_cast<std::size_t>(i - 1)] +
                  fv[static_cast<std::size_t>(i - 2)]) /
                 (12.0 * h);
            double dres = std::fabs(fp - rv[static_cast<std::size_t>(i)]);
            if (std::isnan(worst_diff) || dres > worst_diff) worst_diff = dres;
        }
        rep.samples.push_back({xs[static_cast<std::size_t>(i)], fv[static_cast<std::size_t>(i)],
                               fp, rv[static_cast<std::size_t>(i)], stencil});
    }

    // Integral residual per maximal included run.
    double worst_int = kNan;
    for (int i = 0; i < n;) {
        if (!included[static_cast<std::size_t>(i)]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < n && included[static_cast<std::size_t>(j + 1)]) ++j;
        if (j > i) {
            ++rep.n_runs;
            double integral = run_integral(rv, i, j, h);
            double ires = std::fabs((fv[static_cast<std::size_t>(j)] -
                                     fv[static_cast<std::size_t>(i)]) -
                                    integral);
            if (std::isnan(worst_int) || ires > worst_int) worst_int = ires;
        }
        i = j + 1;
    }

    rep.residual_diff = worst_diff / rep.scale;
    rep.residual_int = worst_int / rep.scale;
    rep.pass_diff = rep.residual_diff <= threshold;
    rep.pass_int = rep.residual_int <= threshold;
    rep.anomaly = rep.pass_diff != rep.pass_int;

    if (c.kind == IdentityKind::p26 && eng.system_size() == 2)
        rep.notes.push_back("N = 2: the bracket equals the sign-flipped identity 1.6 bracket "
                            "for the pair (u_1, u_2)");
    if (c.kind == IdentityKind::p23 && c.variants.bracket_power == BracketPower::as_printed)
        rep.notes.push_back("bracket_power has no effect on identity 2.3; corrected form used");
    return rep;
}

double identity_bracket(const IdentityCase& c, double x) {
    Engine eng(c);
    return eng.F(x, eng.context(x));
}

double identity_rhs(const IdentityCase& c, double x) {
    Engine eng(c);
    return eng.R(x, eng.context(x));
}

double p26_q_term(const IdentityCase& c, int j, double x) {
    if (c.kind != IdentityKind::p26) throw case_error("p26_q_term needs a system case");
    Engine eng(c);
    int n = eng.system_size();
    if (j < 1 || j > n) throw case_error("equation index out of range");
    if (j == eng.distinguished()) return 0.0;
    Ctx t = eng.context(x);
    const Side2& m = t.sys[static_cast<std::size_t>(eng.distinguished() - 1)];
    const Side2& s = t.sys[static_cast<std::size_t>(j - 1)];
    SignedPowerParam ap(c.alpha);
    double pk = c.sys_trajs[static_cast<std::size_t>(j - 1)].problem2().p.eval(x);
    return eng.weights()[static_cast<std::size_t>(j - 1)] * pk *
           q_form(ap, m.du, m.u * s.du / s.u);
}

} // namespace hlpicone
