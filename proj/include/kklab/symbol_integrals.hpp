#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "kklab/angular_kernel.hpp"
#include "kklab/constants_region.hpp"
#include "kklab/errors.hpp"
#include "kklab/params.hpp"
#include "kklab/quad1d.hpp"
#include "kklab/result.hpp"

namespace kklab {

enum class SymbolTarget { i_tra, i_str, i_mix, h_form, f_form };

/// A request for one of the symbol integrals at wavenumber modulus
/// lambda = |n|, reduced to n = lambda e1, v = e2.
struct SymbolRequest {
  ModelParams params;
  double lambda = 1.0;
  SymbolTarget target = SymbolTarget::h_form;
};

namespace detail {

// radial profile h(t) = (1 + t^2)^{-(d/2 + alpha)}; this is the exponent the
// polar change of variables produces, and the one whose first Mellin pole
// lands at z = d + 2 alpha as the expansion requires
struct RadialProfile {
  double b;  // d/2 + alpha
  double at(double t) const { return std::pow(1.0 + t * t, -b); }
};

// Gamma-ratio sphere prefactor 2 pi^{d/2-1} Gamma(3/2) / Gamma((d+1)/2),
// valid down to d = 2 where the intermediate sphere-volume factor degenerates.
inline double sphere_prefactor_str(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d - 1.0) * gamma_real(1.5) /
         gamma_real(0.5 * (d + 1.0));
}

// omega_{d-2} = 2 pi^{(d-1)/2} / Gamma((d-1)/2), the sphere factor of the
// transport reduction, likewise in Gamma form
inline double sphere_prefactor_tra(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (d - 1.0)) / gamma_real(0.5 * (d - 1.0));
}

struct RadialResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evals = 0;
  bool converged = true;
};

// int_0^inf h(lambda r) g(r) dr, split at the scales {1/lambda, 1, rmax} with
// the far tail folded back by r = 1/u; `tail` must evaluate the complete
// folded integrand h(lambda/u) g(1/u) u^{-2} with all powers of u combined
// analytically, so no intermediate overflows for tiny u.
template <class G, class Tail>
RadialResult radial_integral(const RadialProfile& h, double lambda, const G& g,
                             const Tail& tail, double abs_tol, double rel_tol) {
  std::vector<double> pts{0.0};
  const double inv = 1.0 / lambda;
  for (double p : {std::min(inv, 1.0), std::max(inv, 1.0), std::max({2.0, lambda, 2.0 * inv})})
    if (p > pts.back() * (1.0 + 1e-12)) pts.push_back(p);

  RadialResult out;
  auto add = [&](const Quad1dResult<double>& q) {
    out.value += q.value;
    out.error += q.error;
    out.evals += q.evals;
    out.converged = out.converged && q.converged;
  };
  auto integrand = [&](double r) { return h.at(lambda * r) * g(r); };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    add(tanh_sinh<double>(integrand, pts[i], pts[i + 1], abs_tol, rel_tol));
  const double rmax = pts.back();
  add(tanh_sinh<double>([&](double /*u*/, double da, double /*db*/) { return tail(da); }, 0.0,
                        1.0 / rmax, abs_tol, rel_tol));
  return out;
}

inline IntegralResult as_result(const RadialResult& r, double scale) {
  IntegralResult out;
  out.value = scale * r.value;
  out.error_estimate = std::abs(scale) * r.error;
  out.method = Method::adaptive_quadrature;
  out.samples_or_evals = r.evals;
  out.converged = r.converged;
  return out;
}

}  // namespace detail

/// I_str(lambda) = [2 pi^{d/2-1} G(3/2)/G((d+1)/2)] lambda^{d+2-2s}
///                 int_0^inf h(lambda r) f_{d+1,d,s}(r) dr.
/// Requires s + alpha > 1; the tail integral diverges otherwise.
inline IntegralResult i_str(const SymbolRequest& req, double rel_tol = 1e-9) {
  const auto& p = req.params;
  validate_basic(p);
  if (!(p.s + p.alpha > 1.0))
    throw divergence_error("i_str: tail diverges for s + alpha <= 1");
  const double d = p.d, s = p.s, a = p.alpha, lambda = req.lambda;
  const detail::RadialProfile h{0.5 * d + a};
  auto g = [&](double r) { return angular_kernel(d + 1.0, d, s, r); };
  const double tail_scale = std::pow(lambda, -d - 2.0 * a);
  auto tail = [&](double u) {
    // h(lambda/u) f_{d+1,d,s}(1/u) u^{-2}
    //   = lambda^{-d-2a} u^{2s+2a-3} (1 + u^2/lambda^2)^{-(d/2+a)} A_{d,s}(u)
    return tail_scale * std::pow(u, 2.0 * s + 2.0 * a - 3.0) *
           std::pow(1.0 + (u / lambda) * (u / lambda), -h.b) * angular_kernel(0.0, d, s, u);
  };
  const auto r = detail::radial_integral(h, lambda, g, tail, 1e-15, rel_tol);
  const double scale =
      detail::sphere_prefactor_str(p.d) * std::pow(lambda, d + 2.0 - 2.0 * s);
  return detail::as_result(r, scale);
}

/// I_mix(lambda): same reduction with f(r) = (2s/(d+1)) f_{d+1,d+2,s+1}(r),
/// obtained by integrating the cos(theta) factor by parts.
inline IntegralResult i_mix(const SymbolRequest& req, double rel_tol = 1e-9) {
  const auto& p = req.params;
  validate_basic(p);
  if (!(p.s + p.alpha > 1.0))
    throw divergence_error("i_mix: tail diverges for s + alpha <= 1");
  const double d = p.d, s = p.s, a = p.alpha, lambda = req.lambda;
  const detail::RadialProfile h{0.5 * d + a};
  const double factor = 2.0 * s / (d + 1.0);
  auto g = [&](double r) { return factor * angular_kernel(d + 1.0, d + 2.0, s + 1.0, r); };
  const double tail_scale = factor * std::pow(lambda, -d - 2.0 * a);
  auto tail = [&](double u) {
    return tail_scale * std::pow(u, 2.0 * s + 2.0 * a - 1.0) *
           std::pow(1.0 + (u / lambda) * (u / lambda), -h.b) *
           angular_kernel(0.0, d + 2.0, s + 1.0, u);
  };
  const auto r = detail::radial_integral(h, lambda, g, tail, 1e-15, rel_tol);
  const double scale =
      detail::sphere_prefactor_str(p.d) * std::pow(lambda, d + 2.0 - 2.0 * s);
  return detail::as_result(r, scale);
}

/// I_tra(lambda) = omega_{d-2} lambda^{d+2-2s}
///     int_0^inf r^{d-1} h(lambda r) [ A_{d,s}(r) - B(d,0) ] dr,
/// where A_{d,s}(r) = int_0^pi sin^d (1-2r cos+r^2)^{-s} and B(d,0) is the
/// same integral at r = 0: the counterterm of the transport reduction.  The
/// bracket cancels to O(r^2) at r -> 0 and is evaluated by its Taylor form
/// below r = 1e-3.
inline IntegralResult i_tra(const SymbolRequest& req, double rel_tol = 1e-9) {
  const auto& p = req.params;
  validate_basic(p);
  const double d = p.d, s = p.s, lambda = req.lambda;
  const detail::RadialProfile h{0.5 * d + p.alpha};
  const double b0 = beta_angular(d, 0.0);
  const double b2 = beta_angular(d, 2.0);
  const double taylor_c2 = 2.0 * s * (s + 1.0) * b2 - s * b0;

  auto bracket = [&](double r) {
    if (r < 1e-3) return taylor_c2 * r * r;
    return angular_kernel(0.0, d, s, r) - b0;
  };
  auto g = [&](double r) { return std::pow(r, d - 1.0) * bracket(r); };
  const double a = p.alpha;
  const double tail_scale = std::pow(lambda, -d - 2.0 * a);
  auto tail = [&](double u) {
    // r^{d-1} h(lambda r) [A(r) - B] at r = 1/u, using A(1/u) = u^{2s} A(u):
    //   lambda^{-d-2a} u^{2a-1} (1+u^2/lambda^2)^{-(d/2+a)} [u^{2s} A(u) - B]
    return tail_scale * std::pow(u, 2.0 * a - 1.0) *
           std::pow(1.0 + (u / lambda) * (u / lambda), -h.b) *
           (std::pow(u, 2.0 * s) * angular_kernel(0.0, d, s, u) - b0);
  };
  const auto r = detail::radial_integral(h, lambda, g, tail, 1e-15, rel_tol);
  const double scale =
      detail::sphere_prefactor_tra(p.d) * std::pow(lambda, d + 2.0 - 2.0 * s);
  return detail::as_result(r, scale);
}

/// v . H(n) v = I_tra + (d-1) I_str - 2 I_mix on v orthogonal to n.
inline IntegralResult h_quadratic_form(const SymbolRequest& req, double rel_tol = 1e-9) {
  const auto& p = req.params;
  const auto tra = i_tra(req, rel_tol);
  const auto str = i_str(req, rel_tol);
  const auto mix = i_mix(req, rel_tol);
  IntegralResult out;
  out.value = tra.value + (p.d - 1.0) * str.value - 2.0 * mix.value;
  out.error_estimate =
      tra.error_estimate + (p.d - 1.0) * str.error_estimate + 2.0 * mix.error_estimate;
  out.method = Method::adaptive_quadrature;
  out.samples_or_evals =
      tra.samples_or_evals + str.samples_or_evals + mix.samples_or_evals;
  out.converged = tra.converged && str.converged && mix.converged;
  return out;
}

inline IntegralResult evaluate_symbol(const SymbolRequest& req, double rel_tol = 1e-9) {
  switch (req.target) {
    case SymbolTarget::i_tra:
      return i_tra(req, rel_tol);
    case SymbolTarget::i_str:
      return i_str(req, rel_tol);
    case SymbolTarget::i_mix:
      return i_mix(req, rel_tol);
    case SymbolTarget::h_form:
      return h_quadratic_form(req, rel_tol);
    case SymbolTarget::f_form:
      throw domain_error("F quadratic form is a Monte Carlo target; use mc_symbol");
  }
  throw domain_error("unknown symbol target");
}

}  // namespace kklab
