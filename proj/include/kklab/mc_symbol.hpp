#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "kklab/constants_region.hpp"
#include "kklab/errors.hpp"
#include "kklab/params.hpp"
#include "kklab/result.hpp"
#include "kklab/rng.hpp"
#include "kklab/symbol_integrals.hpp"
#include "kklab/threading.hpp"

namespace kklab {

namespace detail {

inline constexpr int kMaxDim = 8;
using Vec = std::array<double, kMaxDim>;

// surface measure of S^{d-1}
inline double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / gamma_real(0.5 * d);
}

inline void uniform_direction(RngStream& rng, int d, Vec& out) {
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
      out[i] = rng.normal();
      norm2 += out[i] * out[i];
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (int i = 0; i < d; ++i) out[i] *= inv;
}

/// Importance-sampling mixture for the symbol integrands: half the draws sit
/// on the heavy tail <k - n>^{-d-2a} around n, half on the |k|^{-2s}
/// singularity at the origin (exponent capped for normalizability).
struct SymbolProposal {
  int d;
  double alpha;
  double s_tilde;   // capped field exponent
  double radius_b;  // support radius of the origin component
  double lambda;    // n = lambda e1
  double z_a;       // normalizer of the tail component
  double z_b;       // normalizer of the origin component

  SymbolProposal(const ModelParams& p, double lam) {
    d = p.d;
    alpha = p.alpha;
    lambda = lam;
    s_tilde = std::min(p.s, 0.5 * (p.d - 0.5));
    radius_b = 2.0 * (1.0 + lam);
    z_a = std::pow(std::numbers::pi, 0.5 * d) * gamma_real(alpha) / gamma_real(0.5 * d + alpha);
    z_b = sphere_area(d) * std::pow(radius_b, d - 2.0 * s_tilde) / (d - 2.0 * s_tilde);
  }

  void sample(RngStream& rng, Vec& k) const {
    Vec dir;
    uniform_direction(rng, d, dir);
    if (rng.uniform() < 0.5) {
      // |x|^2 ~ beta-prime(d/2, alpha) gives density prop to <x>^{-d-2a}
      const double g1 = rng.gamma(0.5 * d);
      const double g2 = rng.gamma(alpha);
      const double rho = std::sqrt(g1 / g2);
      for (int i = 0; i < d; ++i) k[i] = rho * dir[i];
      k[0] += lambda;
    } else {
      const double rho = radius_b * std::pow(rng.uniform(), 1.0 / (d - 2.0 * s_tilde));
      for (int i = 0; i < d; ++i) k[i] = rho * dir[i];
    }
  }

  double density(const Vec& k) const {
    double w2 = 0.0, r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double xi = (i == 0) ? k[i] - lambda : k[i];
      w2 += xi * xi;
      r2 += k[i] * k[i];
    }
    const double pa = std::pow(1.0 + w2, -0.5 * (d + 2.0 * alpha)) / z_a;
    double pb = 0.0;
    if (r2 < radius_b * radius_b && r2 > 0.0) pb = std::pow(r2, -s_tilde) / z_b;
    return 0.5 * pa + 0.5 * pb;
  }
};

/// Integrand of the requested target at sample k, with n = lambda e1 and
/// v = e_{v_axis}.
inline double symbol_integrand(const ModelParams& p, double lambda, SymbolTarget target,
                               int v_axis, const Vec& k) {
  const int d = p.d;
  double u2 = 0.0, k2 = 0.0, uperp2 = 0.0;
  for (int i = 0; i < d; ++i) {
    const double ui = (i == 0) ? lambda - k[i] : -k[i];
    u2 += ui * ui;
    k2 += k[i] * k[i];
    if (i > 0) uperp2 += ui * ui;
  }
  if (u2 == 0.0 || k2 == 0.0) return 0.0;
  const double noise_w = std::pow(1.0 + u2, -0.5 * (d + 2.0 * p.alpha));
  const double field_w = std::pow(k2, -p.s);
  const double vk = k[v_axis];
  const double u1 = lambda - k[0];
  // P_u^perp k = P_u^perp n exactly (k = n - u); written via the components of
  // u orthogonal to n this form never cancels, even for |k| huge:
  const double perp2 = lambda * lambda * uperp2 / u2;  // |P_u^perp k|^2
  const double v_p_k = lambda * u1 * k[v_axis] / u2;   // v . P_u^perp k
  switch (target) {
    case SymbolTarget::i_tra:
      return noise_w * (field_w - std::pow(lambda * lambda, -p.s)) * perp2;
    case SymbolTarget::i_str:
      return noise_w * field_w * vk * vk;
    case SymbolTarget::i_mix:
      return noise_w * field_w * v_p_k * vk;
    case SymbolTarget::h_form:
      return noise_w * ((field_w - std::pow(lambda * lambda, -p.s)) * perp2 +
                        field_w * ((d - 1.0) * vk * vk - 2.0 * v_p_k * vk));
    case SymbolTarget::f_form:
      return noise_w * field_w * (perp2 + (d - 1.0) * vk * vk - 2.0 * v_p_k * vk);
  }
  return 0.0;
}

}  // namespace detail

/// Full d-dimensional importance-sampled Monte Carlo of the symbol integrals;
/// the independent oracle for the reduced quadrature.  Batched standard error
/// from 16 sub-streams; bitwise reproducible per seed regardless of thread
/// count.  `v_axis` picks the unit vector v = e_{v_axis} orthogonal to n.
inline IntegralResult mc_symbol(const SymbolRequest& req, std::size_t n_samples,
                                std::uint64_t seed, int v_axis = 1) {
  const ModelParams& p = req.params;
  validate_basic(p);
  if (n_samples < 10000) throw domain_error("mc_symbol: need at least 1e4 samples");
  if (v_axis < 1 || v_axis >= p.d) throw domain_error("mc_symbol: v must be e_j with j >= 2");
  if (req.target != SymbolTarget::i_tra && !(p.s + p.alpha > 1.0))
    throw divergence_error("mc_symbol: integral diverges for s + alpha <= 1");

  const detail::SymbolProposal proposal(p, req.lambda);
  constexpr std::size_t n_batches = 16;
  const std::size_t per_batch = n_samples / n_batches;
  std::vector<double> means(n_batches, 0.0);

  parallel_for(n_batches, [&](std::size_t bi) {
    RngStream rng = RngStream::derived(seed, bi);
    detail::Vec k{};
    double acc = 0.0;
    for (std::size_t i = 0; i < per_batch; ++i) {
      proposal.sample(rng, k);
      const double g = detail::symbol_integrand(p, req.lambda, req.target, v_axis, k);
      if (g != 0.0) acc += g / proposal.density(k);
    }
    means[bi] = acc / static_cast<double>(per_batch);
  });

  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= n_batches;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (n_batches - 1.0);
  const double stderr_mean = std::sqrt(var / n_batches);

  IntegralResult out;
  out.value = grand;
  out.error_estimate = stderr_mean;
  out.method = Method::monte_carlo;
  out.samples_or_evals = per_batch * n_batches;
  out.converged = true;
  const double spread = std::sqrt(var);
  for (double m : means) {
    if (std::abs(m - grand) > 5.0 * spread + 1e-300) out.converged = false;
  }
  return out;
}

}  // namespace kklab
