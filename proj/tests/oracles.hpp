#pragma once

// Brute-force oracles for the test suite.  Everything here is deliberately
// independent of the library's own quadrature and special-function code paths:
// adaptive Simpson instead of Gauss-Kronrod, the defining Euler integral for
// Gamma, plain bisection for roots.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace oracle {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 48) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Gamma(x) for x > 0 straight from the Euler integral, with a split at t = 1
/// to tame the t^{x-1} endpoint.
inline double gamma_integral(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_integral needs x > 0");
  // t = u^{1/x} on (0,1): int_0^1 t^{x-1} e^{-t} dt = (1/x) int_0^1 e^{-u^{1/x}} du
  const double low = adaptive_simpson(
      [x](double u) { return std::exp(-std::pow(u, 1.0 / x)); }, 0.0, 1.0, 1e-14) / x;
  const double high = adaptive_simpson(
      [x](double t) { return std::pow(t, x - 1.0) * std::exp(-t); }, 1.0, 80.0, 1e-14);
  return low + high;
}

/// Gamma on the negative axis via explicit reflection against the integral
/// oracle (independent of the Lanczos path under test).
inline double gamma_reflected(double x) {
  if (x > 0.0) return gamma_integral(x);
  const double pi = 3.14159265358979323846;
  return pi / (std::sin(pi * x) * gamma_integral(1.0 - x));
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-13, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if ((flo <= 0.0) == (fmid <= 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Tiny deterministic generator for property-test grids.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double a, double b) {
    return a + (b - a) * (next() >> 11) * 0x1.0p-53;
  }
  int uniform_int(int a, int b) {  // inclusive
    return a + static_cast<int>(next() % static_cast<std::uint64_t>(b - a + 1));
  }
};

}  // namespace oracle
