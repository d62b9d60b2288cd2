#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "kklab/errors.hpp"
#include "kklab/lattice.hpp"

namespace kklab {

/// Truncated divergence-free Kraichnan noise on the lattice.  One entry per
/// wavevector k (the full symmetric set), each carrying amplitude
/// q_k = <k>^{-(d+2 alpha)/2} and d-1 orthonormal polarizations a_j | k, with
/// a_j(-k) = a_j(k).  Physical modes are (k, j, phase) for phase in
/// {cos, sin}, each driving an independent scalar Brownian motion, so that
///
///   sum over modes of sigma(x) sigma(y)^T = sum_k q_k^2 P_k^perp cos(2 pi k.(x-y)),
///
/// whose value at x = y is c0_truncated * I exactly, by lattice symmetry.
struct NoiseBasis {
  int d = 3;
  int n_max = 1;
  double alpha = 0.25;
  std::vector<std::array<int, 3>> waves;
  std::vector<double> amp;                      // q_k
  std::vector<std::array<double, 6>> pol;       // (d-1) unit vectors, flattened
  double c0_truncated = 0.0;
  double isotropy_residual = 0.0;  // max |sum q^2 P_k - c0 I| entry

  std::size_t mode_count() const { return waves.size() * (d - 1) * 2; }

  const double* polarization(std::size_t wave, int j) const {
    return pol[wave].data() + 3 * j;
  }
};

namespace detail {

// deterministic orthonormal basis of k-perp with a_j(-k) = a_j(k)
inline void make_polarizations(const std::array<int, 3>& k_in, int d,
                               std::array<double, 6>& out) {
  std::array<int, 3> k = k_in;
  if (!Lattice::canonical(k, d))
    for (int i = 0; i < 3; ++i) k[i] = -k[i];
  const double kx = k[0], ky = k[1], kz = k[2];
  if (d == 2) {
    const double inv = 1.0 / std::sqrt(kx * kx + ky * ky);
    out = {-ky * inv, kx * inv, 0.0, 0.0, 0.0, 0.0};
    return;
  }
  // first: normalize k x e_axis for the axis least aligned with k
  int axis = 0;
  double best = std::abs(kx);
  if (std::abs(ky) < best) {
    axis = 1;
    best = std::abs(ky);
  }
  if (std::abs(kz) < best) axis = 2;
  std::array<double, 3> e{0.0, 0.0, 0.0};
  e[axis] = 1.0;
  std::array<double, 3> a1{ky * e[2] - kz * e[1], kz * e[0] - kx * e[2],
                           kx * e[1] - ky * e[0]};
  double n1 = std::sqrt(a1[0] * a1[0] + a1[1] * a1[1] + a1[2] * a1[2]);
  for (auto& v : a1) v /= n1;
  // second: (k x a1) / |k|
  const double kn = std::sqrt(kx * kx + ky * ky + kz * kz);
  std::array<double, 3> a2{(ky * a1[2] - kz * a1[1]) / kn, (kz * a1[0] - kx * a1[2]) / kn,
                           (kx * a1[1] - ky * a1[0]) / kn};
  out = {a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]};
}

}  // namespace detail

inline NoiseBasis build_noise_basis(const Lattice& lat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("build_noise_basis: alpha in (0,1)");
  NoiseBasis nb;
  nb.d = lat.d;
  nb.n_max = lat.n_max;
  nb.alpha = alpha;
  nb.waves.reserve(lat.mode_count());

  double sum_q2 = 0.0;
  std::array<std::array<double, 3>, 3> cov{};  // sum q^2 P_k^perp
  lat.for_each_mode([&](const std::array<int, 3>& k, std::size_t) {
    double k2 = 0.0;
    for (int i = 0; i < lat.d; ++i) k2 += static_cast<double>(k[i]) * k[i];
    const double q2 = std::pow(1.0 + k2, -0.5 * (lat.d + 2.0 * alpha));
    nb.waves.push_back(k);
    nb.amp.push_back(std::sqrt(q2));
    std::array<double, 6> p{};
    detail::make_polarizations(k, lat.d, p);
    nb.pol.push_back(p);
    sum_q2 += q2;
    for (int i = 0; i < lat.d; ++i)
      for (int j = 0; j < lat.d; ++j)
        cov[i][j] += q2 * ((i == j ? 1.0 : 0.0) - k[i] * k[j] / k2);
  });

  nb.c0_truncated = (lat.d - 1.0) / lat.d * sum_q2;
  double worst = 0.0;
  for (int i = 0; i < lat.d; ++i)
    for (int j = 0; j < lat.d; ++j) {
      const double want = (i == j) ? nb.c0_truncated : 0.0;
      worst = std::max(worst, std::abs(cov[i][j] - want));
    }
  nb.isotropy_residual = worst;
  if (!(worst <= 1e-12 * std::max(1.0, nb.c0_truncated)))
    throw domain_error("build_noise_basis: truncated covariance not isotropic");
  return nb;
}

}  // namespace kklab
