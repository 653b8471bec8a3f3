#include "hlpicone/sgnpow.hpp"

#include <cmath>
#include <stdexcept>

namespace hlpicone {

namespace {

void require_finite(double s, const char* who) {
    if (!std::isfinite(s))
        throw std::domain_error(std::string(who) + ": non-finite argument");
}

} // namespace

SignedPowerParam::SignedPowerParam(double a) : alpha(a) {
    if (!std::isfinite(a) || a <= 0.0)
        throw std::domain_error("SignedPowerParam: alpha must be finite and > 0");
}

double pow_abs(double x, double e) {
    if (e == 0.0) return 1.0; // includes |0|^0 = 1, matching integer-power evaluation
    double m = std::fabs(x);
    if (m < 1e-300) return 0.0; // continuous-extension convention; also avoids subnormal noise
    if (e == 1.0) return m;
    if (e == 2.0) return m * m;
    return std::pow(m, e);
}

double phi(const SignedPowerParam& alpha, double s) {
    require_finite(s, "phi");
    if (alpha.alpha == 1.0) return s;
    double m = pow_abs(s, alpha.alpha);
    return std::signbit(s) ? -m : m;
}

double phi_inv(const SignedPowerParam& alpha, double s) {
    require_finite(s, "phi_inv");
    if (alpha.alpha == 1.0) return s;
    double m = pow_abs(s, 1.0 / alpha.alpha);
    return std::signbit(s) ? -m : m;
}

double q_form(const SignedPowerParam& alpha, double X, double Y) {
    require_finite(X, "q_form");
    require_finite(Y, "q_form");
    double a = alpha.alpha;
    return pow_abs(X, a + 1.0) + a * pow_abs(Y, a + 1.0) - (a + 1.0) * X * phi(alpha, Y);
}

} // namespace hlpicone
