#pragma once
// Independent reference computations for the test suite: bisection, a
// fixed-step RK4, finite-difference stencils, exact binomials, deterministic
// random draws, and the classical eigenvalue constants.  Nothing in this
// header calls into the library under test.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>

namespace oracles {

inline constexpr double pi = 3.14159265358979323846;

// First Dirichlet eigen-length unit of phi(s) = |s|^{alpha-1} s.
inline double pi_alpha_closed(double alpha) {
    return 2.0 * pi / ((alpha + 1.0) * std::sin(pi / (alpha + 1.0)));
}

// Smallest k > 0 with cos(k) cosh(k) = 1 (clamped-beam frequency equation),
// refined in long double so the double result is correctly rounded.
inline double beam_k1() {
    auto f = [](long double k) { return std::cos(k) * std::cosh(k) - 1.0L; };
    long double lo = 4.0L, hi = 5.0L; // f(4) < 0 < f(5)
    for (int i = 0; i < 200; ++i) {
        long double mid = 0.5L * (lo + hi);
        if ((f(mid) < 0.0L) == (f(lo) < 0.0L))
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Five-point central stencil, O(h^4).
inline double fd5_first(const std::function<double(double)>& f, double x, double h) {
    return (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) /
           (12.0 * h);
}

// Exact binomial coefficient via Pascal recurrence (exact in doubles for the
// small orders used here).
inline double binom_exact(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c;
}

// splitmix64-based deterministic draws, independent of std distributions.
class Rand {
public:
    explicit Rand(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
    int index(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

private:
    std::uint64_t s_;
};

// Classic fixed-step RK4 over n equal steps.
template <std::size_t D, typename F>
std::array<double, D> rk4(F f, std::array<double, D> y, double x0, double x1, int n) {
    double h = (x1 - x0) / n;
    auto axpy = [](std::array<double, D> a, double s, const std::array<double, D>& b) {
        for (std::size_t i = 0; i < D; ++i) a[i] += s * b[i];
        return a;
    };
    for (int i = 0; i < n; ++i) {
        double x = x0 + h * i;
        auto k1 = f(x, y);
        auto k2 = f(x + 0.5 * h, axpy(y, 0.5 * h, k1));
        auto k3 = f(x + 0.5 * h, axpy(y, 0.5 * h, k2));
        auto k4 = f(x + h, axpy(y, h, k3));
        for (std::size_t j = 0; j < D; ++j)
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return y;
}

} // namespace oracles
