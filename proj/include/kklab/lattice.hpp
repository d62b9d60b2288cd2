#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "kklab/errors.hpp"
#include "kklab/rng.hpp"

namespace kklab {

/// Truncated symmetric mode set: n in Z^d \ {0}, |n|_inf <= n_max.
/// Only d = 2 and d = 3 are supported (memory scales like n_max^d).
struct Lattice {
  int d = 3;
  int n_max = 4;

  Lattice() = default;
  Lattice(int dim, int cutoff) : d(dim), n_max(cutoff) {
    if (d != 2 && d != 3) throw domain_error("Lattice: only d = 2 and d = 3 are supported");
    if (n_max < 1) throw domain_error("Lattice: n_max must be >= 1");
  }

  int side() const { return 2 * n_max + 1; }
  std::size_t sites() const {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(side());
    return s;
  }
  std::size_t mode_count() const { return sites() - 1; }  // zero mode excluded

  std::size_t site_index(const std::array<int, 3>& n) const {
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * side() + static_cast<std::size_t>(n[i] + n_max);
    return idx;
  }

  bool contains(const std::array<int, 3>& n) const {
    for (int i = 0; i < d; ++i)
      if (n[i] < -n_max || n[i] > n_max) return false;
    return true;
  }

  static bool is_zero(const std::array<int, 3>& n, int d) {
    for (int i = 0; i < d; ++i)
      if (n[i] != 0) return false;
    return true;
  }

  /// Visit every mode (excluding 0) as coords + flat site index.
  template <class F>
  void for_each_mode(const F& f) const {
    std::array<int, 3> n{0, 0, 0};
    const int N = n_max;
    if (d == 2) {
      for (n[0] = -N; n[0] <= N; ++n[0])
        for (n[1] = -N; n[1] <= N; ++n[1]) {
          if (n[0] == 0 && n[1] == 0) continue;
          f(n, site_index(n));
        }
    } else {
      for (n[0] = -N; n[0] <= N; ++n[0])
        for (n[1] = -N; n[1] <= N; ++n[1])
          for (n[2] = -N; n[2] <= N; ++n[2]) {
            if (n[0] == 0 && n[1] == 0 && n[2] == 0) continue;
            f(n, site_index(n));
          }
    }
  }

  /// Canonical half: first nonzero coordinate positive.  Every mode is either
  /// canonical or the negation of a canonical one.
  static bool canonical(const std::array<int, 3>& n, int d) {
    for (int i = 0; i < d; ++i) {
      if (n[i] > 0) return true;
      if (n[i] < 0) return false;
    }
    return false;  // zero mode
  }
};

/// Complex Fourier coefficients of a real divergence-free vector field on the
/// lattice: coeffs[site * d + comp].  Invariants (checked, not enforced per
/// write): conjugate symmetry under n -> -n, n . M(n) = 0, zero mode absent.
struct SpectralField {
  Lattice lat;
  std::vector<std::complex<double>> c;

  SpectralField() = default;
  explicit SpectralField(const Lattice& l) : lat(l), c(l.sites() * l.d) {}

  std::complex<double>* at(const std::array<int, 3>& n) {
    return c.data() + lat.site_index(n) * lat.d;
  }
  const std::complex<double>* at(const std::array<int, 3>& n) const {
    return c.data() + lat.site_index(n) * lat.d;
  }

  double mode_energy(const std::array<int, 3>& n) const {
    const auto* v = at(n);
    double e = 0.0;
    for (int i = 0; i < lat.d; ++i) e += std::norm(v[i]);
    return e;
  }

  /// max_n |M(-n) - conj M(n)| / max-amplitude
  double reality_residual() const {
    double worst = 0.0, scale = 0.0;
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t) {
      std::array<int, 3> m{-n[0], -n[1], -n[2]};
      const auto* a = at(n);
      const auto* b = at(m);
      for (int i = 0; i < lat.d; ++i) {
        worst = std::max(worst, std::abs(a[i] - std::conj(b[i])));
        scale = std::max(scale, std::abs(a[i]));
      }
    });
    return scale > 0.0 ? worst / scale : 0.0;
  }

  /// max_n |n . M(n)| / |M(n)|
  double divergence_residual() const {
    double worst = 0.0;
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t) {
      const auto* v = at(n);
      std::complex<double> dot{0.0, 0.0};
      double mag2 = 0.0;
      for (int i = 0; i < lat.d; ++i) {
        dot += static_cast<double>(n[i]) * v[i];
        mag2 += std::norm(v[i]);
      }
      if (mag2 > 0.0) worst = std::max(worst, std::abs(dot) / std::sqrt(mag2));
    });
    return worst;
  }

  /// sum_n |2 pi n|^{2 sigma} |M(n)|^2
  double sobolev_norm_sq(double sigma) const {
    double acc = 0.0;
    const double two_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
      double n2 = 0.0;
      for (int i = 0; i < lat.d; ++i) n2 += static_cast<double>(n[i]) * n[i];
      double e = 0.0;
      for (int i = 0; i < lat.d; ++i) e += std::norm(c[site * lat.d + i]);
      if (e > 0.0) acc += std::pow(two_pi_sq * n2, sigma) * e;
    });
    return acc;
  }

  double l2_norm_sq() const { return sobolev_norm_sq(0.0); }

  SpectralField& operator*=(double a) {
    for (auto& z : c) z *= a;
    return *this;
  }
};

/// Real single-mode field amp * v * cos(2 pi k0 . x) with a deterministic
/// unit polarization v orthogonal to k0.
inline SpectralField single_mode_field(const Lattice& lat, const std::array<int, 3>& k0,
                                       double amp = 1.0) {
  if (!lat.contains(k0) || Lattice::is_zero(k0, lat.d))
    throw domain_error("single_mode_field: k0 outside lattice or zero");
  // pick the axis least aligned with k0, orthogonalize, normalize
  int axis = 0;
  for (int i = 1; i < lat.d; ++i)
    if (std::abs(k0[i]) < std::abs(k0[axis])) axis = i;
  std::array<double, 3> v{0.0, 0.0, 0.0};
  double k2 = 0.0, kv = 0.0;
  for (int i = 0; i < lat.d; ++i) k2 += static_cast<double>(k0[i]) * k0[i];
  v[axis] = 1.0;
  kv = k0[axis];
  double norm2 = 0.0;
  for (int i = 0; i < lat.d; ++i) {
    v[i] -= kv * k0[i] / k2;
    norm2 += v[i] * v[i];
  }
  const double inv = 1.0 / std::sqrt(norm2);

  SpectralField f(lat);
  std::array<int, 3> mk{-k0[0], -k0[1], -k0[2]};
  auto* plus = f.at(k0);
  auto* minus = f.at(mk);
  for (int i = 0; i < lat.d; ++i) {
    plus[i] = std::complex<double>(0.5 * amp * v[i] * inv, 0.0);
    minus[i] = std::conj(plus[i]);
  }
  return f;
}

/// Copy a field into a larger lattice (same d), zero-extended.
inline SpectralField embed_field(const SpectralField& f, const Lattice& target) {
  if (target.d != f.lat.d || target.n_max < f.lat.n_max)
    throw domain_error("embed_field: target must be a larger lattice of the same dimension");
  SpectralField out(target);
  f.lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
    auto* dst = out.at(n);
    for (int i = 0; i < f.lat.d; ++i) dst[i] = f.c[site * f.lat.d + i];
  });
  return out;
}

/// Random broadband divergence-free field, |M(n)| ~ <n>^{-gamma}, Gaussian
/// phases, conjugate-symmetrized, unit L2 norm.  Deterministic per stream.
inline SpectralField broadband_field(const Lattice& lat, double gamma, RngStream& rng) {
  SpectralField f(lat);
  lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
    if (!Lattice::canonical(n, lat.d)) return;
    double n2 = 0.0;
    for (int i = 0; i < lat.d; ++i) n2 += static_cast<double>(n[i]) * n[i];
    const double scale = std::pow(1.0 + n2, -0.5 * gamma);
    std::array<std::complex<double>, 3> g{};
    std::complex<double> dot{0.0, 0.0};
    for (int i = 0; i < lat.d; ++i) {
      g[i] = std::complex<double>(rng.normal(), rng.normal());
      dot += static_cast<double>(n[i]) * g[i];
    }
    std::array<int, 3> m{-n[0], -n[1], -n[2]};
    auto* plus = f.c.data() + site * lat.d;
    auto* minus = f.at(m);
    for (int i = 0; i < lat.d; ++i) {
      const std::complex<double> proj = g[i] - dot * static_cast<double>(n[i]) / n2;
      plus[i] = scale * proj;
      minus[i] = std::conj(plus[i]);
    }
  });
  const double l2 = f.l2_norm_sq();
  if (l2 > 0.0) f *= 1.0 / std::sqrt(l2);
  return f;
}

}  // namespace kklab
