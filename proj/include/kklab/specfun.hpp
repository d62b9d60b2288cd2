#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "kklab/errors.hpp"

namespace kklab {

using Complex = std::complex<double>;

namespace detail {

// Godfrey's 15-term Lanczos table, g = 607/128.  Gives close to full double
// precision on the half plane Re(z) >= 1/2.
inline constexpr double lanczos_g = 607.0 / 128.0;
inline constexpr double lanczos_coef[15] = {
    0.99999999999999709182,     57.156235665862923517,
    -59.597960355475491248,     14.136097974741747174,
    -0.49191381609762019978,    0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4,
    0.15808870322491248884e-3,  -0.21026444172410488319e-3,
    0.21743961811521264320e-3,  -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4,
    0.36899182659531622704e-5};

template <class T>
T lanczos_log_gamma_right(T z) {
  // valid for Re(z) >= 1/2
  T x = lanczos_coef[0];
  for (int k = 1; k < 15; ++k) x += lanczos_coef[k] / (z + static_cast<double>(k - 1));
  T t = z + (lanczos_g - 0.5);
  constexpr double half_log_two_pi = 0.91893853320467274178;
  return half_log_two_pi + (z - 0.5) * log(t) - t + log(x);
}

inline double nearest_nonpositive_integer_distance(double x, double& nearest) {
  nearest = std::round(x);
  if (nearest > 0.0) {
    nearest = 0.0;
    return std::abs(x);
  }
  return std::abs(x - nearest);
}

}  // namespace detail

/// True when z sits within `tol` of a pole of Gamma (a non-positive integer).
inline bool gamma_pole_near(const Complex& z, double tol = 1e-14) {
  if (std::abs(z.imag()) > tol) return false;
  double nearest;
  return detail::nearest_nonpositive_integer_distance(z.real(), nearest) <= tol;
}

inline bool gamma_pole_near(double x, double tol = 1e-14) {
  double nearest;
  return detail::nearest_nonpositive_integer_distance(x, nearest) <= tol;
}

/// Principal branch of log Gamma(z).  Reflection is used for Re(z) < 1/2, so
/// the imaginary part can pick up the branch of log(sin(pi z)); all consumers
/// exponentiate sums of log-gammas, which is insensitive to that.
inline Complex log_gamma(Complex z) {
  if (gamma_pole_near(z)) throw pole_error("log_gamma: z at non-positive integer");
  if (z.real() >= 0.5) return detail::lanczos_log_gamma_right(z);
  // log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
  const Complex pz = std::numbers::pi * z;
  return std::log(std::numbers::pi) - std::log(std::sin(pz)) -
         detail::lanczos_log_gamma_right(Complex(1.0, 0.0) - z);
}

/// Gamma(x) for real x, with the correct sign for negative non-integer x.
inline double gamma_real(double x) {
  if (gamma_pole_near(x)) throw pole_error("gamma_real: x at non-positive integer");
  if (x >= 0.5) return std::exp(detail::lanczos_log_gamma_right(x));
  // Gamma(x) = pi / (sin(pi x) Gamma(1 - x)); the sine carries the sign.
  return std::numbers::pi /
         (std::sin(std::numbers::pi * x) * std::exp(detail::lanczos_log_gamma_right(1.0 - x)));
}

/// log |Gamma(x)| for real x off the poles.
inline double log_abs_gamma(double x) {
  if (gamma_pole_near(x)) throw pole_error("log_abs_gamma: x at non-positive integer");
  if (x >= 0.5) return detail::lanczos_log_gamma_right(x);
  return std::log(std::numbers::pi / std::abs(std::sin(std::numbers::pi * x))) -
         detail::lanczos_log_gamma_right(1.0 - x);
}

/// 1/Gamma(z); entire, zero at the non-positive integers.
inline Complex reciprocal_gamma(Complex z) {
  if (gamma_pole_near(z)) return Complex(0.0, 0.0);
  if (z.real() >= 0.5) return std::exp(-detail::lanczos_log_gamma_right(z));
  // 1/Gamma(z) = sin(pi z) Gamma(1 - z) / pi
  const Complex pz = std::numbers::pi * z;
  return std::sin(pz) * std::exp(detail::lanczos_log_gamma_right(Complex(1.0, 0.0) - z)) /
         std::numbers::pi;
}

/// Angular Beta integral: int_0^pi |sin t|^g |cos t|^e dt
///   = Gamma((g+1)/2) Gamma((e+1)/2) / Gamma((g+e+2)/2).
inline double beta_angular(double gamma_exp, double eta_exp) {
  if (!(gamma_exp > -1.0) || !(eta_exp > -1.0))
    throw domain_error("beta_angular: exponents must exceed -1");
  return std::exp(detail::lanczos_log_gamma_right(0.5 * (gamma_exp + 1.0)) +
                  detail::lanczos_log_gamma_right(0.5 * (eta_exp + 1.0)) -
                  detail::lanczos_log_gamma_right(0.5 * (gamma_exp + eta_exp + 2.0)));
}

}  // namespace kklab
