#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kklab/errors.hpp"
#include "kklab/quad1d.hpp"

namespace kklab {

/// f_{a,b,s}(r) = r^a int_0^pi sin^b(t) (1 - 2 r cos t + r^2)^{-s} dt.
///
/// The denominator is evaluated as (1-r)^2 + 4 r sin^2(t/2), which is exact
/// for r near 1 where the naive form cancels.  For r > 1 the reflection
/// f_{a,b,s}(r) = r^{a-2s} * [angular part](1/r) keeps every evaluation on
/// r <= 1.  The t -> 0 endpoint carries an integrable t^{b-2s} singularity
/// when r = 1; tanh-sinh absorbs it.
inline double angular_kernel(double a, double b, double s, double r,
                             double abs_tol = 1e-12, double rel_tol = 5e-12) {
  if (!(r >= 0.0)) throw domain_error("angular_kernel: r must be >= 0");
  if (!(b > -1.0)) throw domain_error("angular_kernel: need b > -1");
  if (!(b > 2.0 * s - 1.0))
    throw divergence_error("angular_kernel: integrand not integrable, need b > 2s - 1");

  const double rho = (r <= 1.0) ? r : 1.0 / r;
  const double one_minus_rho_sq = (1.0 - rho) * (1.0 - rho);

  auto body = [&](double theta, double sn) {
    const double half = std::sin(0.5 * theta);
    const double q = one_minus_rho_sq + 4.0 * rho * half * half;
    return std::pow(sn, b) * std::pow(q, -s);
  };
  // theta = da on the lower half, pi - db on the upper half: sin stays
  // endpoint-stable where it vanishes
  auto lo_integrand = [&](double /*x*/, double da, double /*db*/) {
    return body(da, std::sin(da));
  };
  auto hi_integrand = [&](double x, double /*da*/, double db) { return body(x, std::sin(db)); };

  const double pi = std::numbers::pi;
  auto lo = tanh_sinh<double>(lo_integrand, 0.0, 0.5 * pi, 0.5 * abs_tol, rel_tol);
  auto hi = tanh_sinh<double>(hi_integrand, 0.5 * pi, pi, 0.5 * abs_tol, rel_tol);
  const double angular = lo.value + hi.value;
  if (lo.error + hi.error > 1e-10 * (1.0 + std::abs(angular)))
    throw nonconvergence_error("angular_kernel: quadrature stalled");

  if (r == 0.0) return (a > 0.0) ? 0.0 : ((a == 0.0) ? angular : std::pow(r, a) * angular);
  const double exponent = (r <= 1.0) ? a : a - 2.0 * s;
  return std::pow(r, exponent) * angular;
}

}  // namespace kklab
