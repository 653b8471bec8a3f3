#pragma once

namespace hlpicone {

// Exponent parameter of the signed power phi(s) = |s|^{alpha-1} s.  alpha > 0.
struct SignedPowerParam {
    explicit SignedPowerParam(double a);
    double alpha;
};

// |x|^e with the continuous-extension convention |0|^e = 0 (kept even for
// e <= 0, where it is the phi-limit convention rather than the power limit).
double pow_abs(double x, double e);

// phi(s) = |s|^{alpha-1} s.  Odd, strictly increasing, phi(0) = 0.
double phi(const SignedPowerParam& alpha, double s);

// Inverse of phi: phi_inv(s) = |s|^{1/alpha - 1} s.
double phi_inv(const SignedPowerParam& alpha, double s);

// Q(X, Y) = |X|^{alpha+1} + alpha |Y|^{alpha+1} - (alpha+1) X phi(Y).
// Nonnegative, zero iff X == Y.  At alpha = 1 it is (X - Y)^2.
double q_form(const SignedPowerParam& alpha, double X, double Y);

} // namespace hlpicone
