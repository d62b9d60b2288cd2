#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "kklab/errors.hpp"
#include "kklab/lattice.hpp"
#include "kklab/noise_basis.hpp"
#include "kklab/threading.hpp"

namespace kklab {

enum class NoisePhase { cosine, sine };

namespace detail {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// |n|_inf of the field support (0 for the zero field).
inline int detect_support(const SpectralField& m) {
  int sup = 0;
  m.lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
    for (int i = 0; i < m.lat.d; ++i)
      if (m.c[site * m.lat.d + i] != std::complex<double>(0.0, 0.0))
        for (int j = 0; j < m.lat.d; ++j) sup = std::max(sup, std::abs(n[j]));
  });
  return sup;
}

/// table of |2 pi n|^{2 sigma} over all sites (0 at the zero mode)
inline std::vector<double> weight_table(const Lattice& lat, double sigma) {
  std::vector<double> w(lat.sites(), 0.0);
  const double tp2 = two_pi * two_pi;
  lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
    double n2 = 0.0;
    for (int i = 0; i < lat.d; ++i) n2 += static_cast<double>(n[i]) * n[i];
    w[site] = std::pow(tp2 * n2, sigma);
  });
  return w;
}

/// table of <k>^{-d-2 alpha} over all sites (0 at the zero mode)
inline std::vector<double> noise_weight_table(const Lattice& lat, double alpha) {
  std::vector<double> w(lat.sites(), 0.0);
  lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
    double n2 = 0.0;
    for (int i = 0; i < lat.d; ++i) n2 += static_cast<double>(n[i]) * n[i];
    w[site] = std::pow(1.0 + n2, -0.5 * (lat.d + 2.0 * alpha));
  });
  return w;
}

}  // namespace detail

/// B[M] sigma = (sigma . grad) M - (M . grad) sigma for one noise mode
/// (wave index, polarization j, phase), Galerkin-truncated to the lattice.
/// Per produced mode n and noise wavevector kappa (= +-k):
///   2 pi i c_kappa [ (a . (n - kappa)) M(n - kappa) - (M(n - kappa) . kappa) a ]
/// with c = q/2 for the cosine pair and -+ i q/2 for the sine pair.
inline SpectralField apply_b(const SpectralField& m, const NoiseBasis& nb, std::size_t wave,
                             int pol_j, NoisePhase phase) {
  const Lattice& lat = m.lat;
  const int d = lat.d;
  SpectralField out(lat);
  const std::array<int, 3>& k = nb.waves[wave];
  const double* a = nb.polarization(wave, pol_j);
  const double q = nb.amp[wave];

  for (int sign = 0; sign < 2; ++sign) {
    std::array<int, 3> kappa{};
    for (int i = 0; i < d; ++i) kappa[i] = (sign == 0) ? k[i] : -k[i];
    // sigma-hat(kappa) = c * a
    std::complex<double> cfac = (phase == NoisePhase::cosine)
                                    ? std::complex<double>(0.5 * q, 0.0)
                                    : ((sign == 0) ? std::complex<double>(0.0, -0.5 * q)
                                                   : std::complex<double>(0.0, 0.5 * q));
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
      std::array<int, 3> mm{0, 0, 0};
      for (int i = 0; i < d; ++i) mm[i] = n[i] - kappa[i];
      if (!lat.contains(mm) || Lattice::is_zero(mm, d)) return;
      const auto* u = m.at(mm);
      double am = 0.0;
      std::complex<double> uk{0.0, 0.0};
      for (int i = 0; i < d; ++i) {
        am += a[i] * mm[i];
        uk += u[i] * static_cast<double>(kappa[i]);
      }
      const std::complex<double> i2pi_c =
          std::complex<double>(0.0, detail::two_pi) * cfac;
      auto* o = out.c.data() + site * d;
      for (int i = 0; i < d; ++i) o[i] += i2pi_c * (am * u[i] - uk * a[i]);
    });
  }
  return out;
}

/// Direct basis-route Hilbert-Schmidt sum  sum_modes || B[M] sigma ||^2_{H^{-s}}.
/// The cosine/sine pair at each (k, j) contributes 2(|G_k|^2 + |G_{-k}|^2)
/// with G_kappa the single-exponential half of the operator, and the +-k
/// halves carry equal norms for conjugate-symmetric fields, giving
/// 4 sum_{k, j} ||G_k||^2.  Polarizations stay explicit: this route never
/// forms the polarization-summed symbol that the F route uses.
inline double direct_hs_sum(const SpectralField& m, const NoiseBasis& nb, double s) {
  const Lattice& lat = m.lat;
  const int d = lat.d;
  const int N = lat.n_max;
  const int sup = detail::detect_support(m);
  const auto w_out = detail::weight_table(lat, -s);

  std::vector<double> partial(nb.waves.size(), 0.0);
  parallel_for(nb.waves.size(), [&](std::size_t wi) {
    const std::array<int, 3>& k = nb.waves[wi];
    const double q2 = nb.amp[wi] * nb.amp[wi];
    // n ranges over the box with n in Lambda and n - k in the support box
    std::array<int, 3> lo{}, hi{};
    for (int i = 0; i < d; ++i) {
      lo[i] = std::max(-N, -sup + k[i]);
      hi[i] = std::min(N, sup + k[i]);
      if (lo[i] > hi[i]) return;
    }
    double acc = 0.0;
    std::array<int, 3> n{0, 0, 0};
    auto body = [&](const std::array<int, 3>& nn) {
      if (Lattice::is_zero(nn, d)) return;
      std::array<int, 3> mm{0, 0, 0};
      for (int i = 0; i < d; ++i) mm[i] = nn[i] - k[i];
      if (Lattice::is_zero(mm, d)) return;
      const auto* u = m.at(mm);
      std::complex<double> uk{0.0, 0.0};
      double u_nonzero = 0.0;
      for (int i = 0; i < d; ++i) {
        uk += u[i] * static_cast<double>(k[i]);
        u_nonzero += std::norm(u[i]);
      }
      if (u_nonzero == 0.0) return;
      const double w = w_out[lat.site_index(nn)];
      for (int j = 0; j < d - 1; ++j) {
        const double* a = nb.polarization(wi, j);
        double am = 0.0;
        for (int i = 0; i < d; ++i) am += a[i] * mm[i];
        double g2 = 0.0;
        for (int i = 0; i < d; ++i) g2 += std::norm(am * u[i] - uk * a[i]);
        acc += w * g2;
      }
    };
    if (d == 2) {
      for (n[0] = lo[0]; n[0] <= hi[0]; ++n[0])
        for (n[1] = lo[1]; n[1] <= hi[1]; ++n[1]) body(n);
    } else {
      for (n[0] = lo[0]; n[0] <= hi[0]; ++n[0])
        for (n[1] = lo[1]; n[1] <= hi[1]; ++n[1])
          for (n[2] = lo[2]; n[2] <= hi[2]; ++n[2]) body(n);
    }
    partial[wi] = q2 * acc;
  });

  double total = 0.0;
  for (double p : partial) total += p;
  // 4 (from the phase pair and the +-k halves) times (2 pi q / 2)^2
  return detail::two_pi * detail::two_pi * total;
}

/// Symbol-route Hilbert-Schmidt sum: sum_m conj(u_m) . F_N(m) u_m with
///   F_N(m) = (2 pi)^{2-2s} sum_kappa q_kappa^2 |m+kappa|^{-2s}
///            [ |P_kappa m|^2 I + (d-1) kappa kappa^T - (P_kappa m kappa^T + kappa (P_kappa m)^T) ],
/// the lattice analogue of the continuum Fourier symbol; the kappa sum is
/// restricted to m + kappa on the lattice and away from 0, matching the
/// Galerkin truncation of the direct route exactly.
inline double lattice_f_form(const SpectralField& m, const NoiseBasis& nb, double s) {
  const Lattice& lat = m.lat;
  const int d = lat.d;
  const int N = lat.n_max;
  const auto w_out = detail::weight_table(lat, -s);
  const auto q2_tab = detail::noise_weight_table(lat, nb.alpha);

  // collect the field support once
  struct Entry {
    std::array<int, 3> n;
    std::array<std::complex<double>, 3> u;
  };
  std::vector<Entry> support;
  lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
    const auto* u = m.c.data() + site * d;
    double e = 0.0;
    for (int i = 0; i < d; ++i) e += std::norm(u[i]);
    if (e == 0.0) return;
    Entry en;
    en.n = n;
    for (int i = 0; i < d; ++i) en.u[i] = u[i];
    support.push_back(en);
  });

  std::vector<double> partial(support.size(), 0.0);
  parallel_for(support.size(), [&](std::size_t si) {
    const auto& [mm, u] = support[si];
    double m2 = 0.0, u_abs2 = 0.0;
    std::complex<double> um{0.0, 0.0};
    for (int i = 0; i < d; ++i) {
      m2 += static_cast<double>(mm[i]) * mm[i];
      u_abs2 += std::norm(u[i]);
      um += std::conj(u[i]) * static_cast<double>(mm[i]);
    }
    std::array<int, 3> lo{}, hi{};
    for (int i = 0; i < d; ++i) {
      lo[i] = -N - mm[i];
      hi[i] = N - mm[i];
      lo[i] = std::max(lo[i], -N);
      hi[i] = std::min(hi[i], N);
    }
    double acc = 0.0;
    auto body = [&](const std::array<int, 3>& kap) {
      if (Lattice::is_zero(kap, d)) return;
      std::array<int, 3> nn{0, 0, 0};
      for (int i = 0; i < d; ++i) nn[i] = mm[i] + kap[i];
      if (Lattice::is_zero(nn, d)) return;
      double k2 = 0.0, km = 0.0;
      std::complex<double> uk{0.0, 0.0};
      for (int i = 0; i < d; ++i) {
        k2 += static_cast<double>(kap[i]) * kap[i];
        km += static_cast<double>(kap[i]) * mm[i];
        uk += std::conj(u[i]) * static_cast<double>(kap[i]);
      }
      const double t = km / k2;
      // |P_k m|^2 |u|^2 + (d-1)|u.k|^2 - 2 Re[(u.k) conj(u.P_k m)]
      // with u.P_k m = u.m - t (u.k)
      const double perp2 = m2 - km * t;
      const std::complex<double> up = um - t * uk;
      const double bracket = perp2 * u_abs2 + (d - 1.0) * std::norm(uk) -
                             2.0 * (uk.real() * up.real() + uk.imag() * up.imag());
      acc += q2_tab[lat.site_index(kap)] * w_out[lat.site_index(nn)] * bracket;
    };
    std::array<int, 3> kap{0, 0, 0};
    if (d == 2) {
      for (kap[0] = lo[0]; kap[0] <= hi[0]; ++kap[0])
        for (kap[1] = lo[1]; kap[1] <= hi[1]; ++kap[1]) body(kap);
    } else {
      for (kap[0] = lo[0]; kap[0] <= hi[0]; ++kap[0])
        for (kap[1] = lo[1]; kap[1] <= hi[1]; ++kap[1])
          for (kap[2] = lo[2]; kap[2] <= hi[2]; ++kap[2]) body(kap);
    }
    partial[si] = acc;
  });

  double total = 0.0;
  for (double p : partial) total += p;
  return detail::two_pi * detail::two_pi * total;
}

/// Exact drift of ||M||^2_{H^{-s}} under the Ito dynamics at viscosity nu:
///   -(2 nu + c0) ||M||^2_{H^{-s+1}} + sum_modes ||B[M] sigma||^2_{H^{-s}},
/// asserting the two Hilbert-Schmidt routes agree to 1e-10 relative (they are
/// the same finite sum, reorganized).
inline double exact_drift(const SpectralField& m, const NoiseBasis& nb, double nu, double s) {
  const double hs_direct = direct_hs_sum(m, nb, s);
  const double hs_symbol = lattice_f_form(m, nb, s);
  if (!(std::abs(hs_direct - hs_symbol) <= 1e-10 * (std::abs(hs_direct) + 1e-300)))
    throw domain_error("exact_drift: basis-sum and symbol-sum routes disagree");
  return hs_direct - (2.0 * nu + nb.c0_truncated) * m.sobolev_norm_sq(-s + 1.0);
}

/// Stretching Ito coefficient of the L2 norm at this truncation:
///   sum_modes ||(M . grad) sigma||^2_{L2} = coeff * ||M||^2_{L2},
///   coeff = (2 pi)^2 (d-1)/d sum_k <k>^{-d-2 alpha} |k|^2.
/// Diverges like n_max^{2-2 alpha} as the cutoff grows.
inline double l2_drift_coefficient(const NoiseBasis& nb) {
  double acc = 0.0;
  for (std::size_t wi = 0; wi < nb.waves.size(); ++wi) {
    double k2 = 0.0;
    for (int i = 0; i < nb.d; ++i)
      k2 += static_cast<double>(nb.waves[wi][i]) * nb.waves[wi][i];
    acc += nb.amp[wi] * nb.amp[wi] * k2;
  }
  return detail::two_pi * detail::two_pi * (nb.d - 1.0) / nb.d * acc;
}

/// Transport Ito coefficient vs the c0 Laplacian term, both per unit time and
/// without output truncation: sum_modes ||(sigma . grad) M||^2_{L2} computed
/// mode by mode against c0_truncated ||grad M||^2_{L2}.  Returns the relative
/// residual; zero up to rounding by lattice symmetry.
inline double l2_transport_vs_laplacian_residual(const SpectralField& m, const NoiseBasis& nb) {
  const Lattice& lat = m.lat;
  const int d = lat.d;
  double transport = 0.0;
  for (std::size_t wi = 0; wi < nb.waves.size(); ++wi) {
    const double q2 = nb.amp[wi] * nb.amp[wi];
    // sum over phases of ||(sigma.grad)M||^2 = (2pi)^2 q^2 sum_m (a.m)^2 |u_m|^2
    double acc = 0.0;
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
      const auto* u = m.c.data() + site * d;
      double e = 0.0;
      for (int i = 0; i < d; ++i) e += std::norm(u[i]);
      if (e == 0.0) return;
      for (int j = 0; j < d - 1; ++j) {
        const double* a = nb.polarization(wi, j);
        double am = 0.0;
        for (int i = 0; i < d; ++i) am += a[i] * n[i];
        acc += am * am * e;
      }
    });
    transport += q2 * acc;
  }
  transport *= detail::two_pi * detail::two_pi;
  const double laplacian = nb.c0_truncated * m.sobolev_norm_sq(1.0);
  return std::abs(transport - laplacian) / (std::abs(laplacian) + 1e-300);
}

/// Mixed transport-stretching L2 sum: vanishes exactly after the cosine/sine
/// pairing and the k -> -k symmetry of the lattice.  Returns the sum
/// normalized by the transport scale.
inline double l2_mixed_term_normalized(const SpectralField& m, const NoiseBasis& nb) {
  const Lattice& lat = m.lat;
  const int d = lat.d;
  double mixed = 0.0;
  double scale = 1e-300;
  for (std::size_t wi = 0; wi < nb.waves.size(); ++wi) {
    const double q2 = nb.amp[wi] * nb.amp[wi];
    const std::array<int, 3>& k = nb.waves[wi];
    // per (k, j), the cosine/sine pairing reduces the phase sum to
    //   (2pi)^2 q^2 sum_m (a.m) Re[(u_m . a) conj(u_m . k)],
    // and the k -> -k pairing inside Lambda flips the sign of (u.k)
    double acc = 0.0, sacc = 0.0;
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
      const auto* u = m.c.data() + site * d;
      double e = 0.0;
      for (int i = 0; i < d; ++i) e += std::norm(u[i]);
      if (e == 0.0) return;
      std::complex<double> uk{0.0, 0.0};
      for (int i = 0; i < d; ++i) uk += u[i] * static_cast<double>(k[i]);
      for (int j = 0; j < d - 1; ++j) {
        const double* a = nb.polarization(wi, j);
        double am = 0.0;
        std::complex<double> ua{0.0, 0.0};
        for (int i = 0; i < d; ++i) {
          am += a[i] * n[i];
          ua += u[i] * a[i];
        }
        acc += am * (uk.real() * ua.real() + uk.imag() * ua.imag());
        sacc += std::abs(am) * std::abs(uk) * std::abs(ua);
      }
    });
    mixed += q2 * acc;
    scale += q2 * sacc;
  }
  return mixed / scale;
}

/// Lattice drift constants: the sharpest eta, rho >= 0 with
///   -lambda_max(D_m | m-perp) >= eta g_m - rho b_m  for every lattice mode m,
/// where D_m is the per-mode drift form (symbol F_N minus the (c0 + 2 nu)
/// Laplacian), g_m = |2 pi m|^{2-2s-2 alpha} and b_m = |2 pi m|^{-2s}.  These
/// are the constants the discrete Lyapunov inequality runs on.
struct LatticeDriftFit {
  double eta_hat = 0.0;
  double rho_hat = 0.0;
  double max_lambda = 0.0;        // max over modes of lambda_max(D_m)
  double nu_star = 0.0;           // smallest extra viscosity making all modes dissipative
};

inline LatticeDriftFit fit_lattice_drift_constants(const Lattice& lat, const NoiseBasis& nb,
                                                   double s, double nu = 0.0) {
  const int d = lat.d;
  const int N = lat.n_max;
  const auto w_out = detail::weight_table(lat, -s);
  const auto q2_tab = detail::noise_weight_table(lat, nb.alpha);
  const double tp2 = detail::two_pi * detail::two_pi;

  struct ModeInfo {
    double lam_max, g, b;
  };
  std::vector<std::array<int, 3>> modes;
  lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t) {
    if (Lattice::canonical(n, d)) modes.push_back(n);
  });
  std::vector<ModeInfo> info(modes.size());

  parallel_for(modes.size(), [&](std::size_t mi) {
    const std::array<int, 3>& mm = modes[mi];
    double m2 = 0.0;
    for (int i = 0; i < d; ++i) m2 += static_cast<double>(mm[i]) * mm[i];
    // assemble A = sum_kappa w [ |p|^2 I + (d-1) kk^T - (p k^T + k p^T) ]
    std::array<std::array<double, 3>, 3> A{};
    std::array<int, 3> lo{}, hi{};
    for (int i = 0; i < d; ++i) {
      lo[i] = std::max(-N, -N - mm[i]);
      hi[i] = std::min(N, N - mm[i]);
    }
    std::array<int, 3> kap{0, 0, 0};
    auto body = [&](const std::array<int, 3>& k) {
      if (Lattice::is_zero(k, d)) return;
      std::array<int, 3> nn{0, 0, 0};
      for (int i = 0; i < d; ++i) nn[i] = mm[i] + k[i];
      if (Lattice::is_zero(nn, d)) return;
      double k2 = 0.0, km = 0.0;
      for (int i = 0; i < d; ++i) {
        k2 += static_cast<double>(k[i]) * k[i];
        km += static_cast<double>(k[i]) * mm[i];
      }
      const double t = km / k2;
      std::array<double, 3> p{};
      for (int i = 0; i < d; ++i) p[i] = mm[i] - t * k[i];
      double p2 = 0.0;
      for (int i = 0; i < d; ++i) p2 += p[i] * p[i];
      const double w = q2_tab[lat.site_index(k)] * w_out[lat.site_index(nn)];
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double entry = (d - 1.0) * k[i] * k[j] - (p[i] * k[j] + k[i] * p[j]);
          if (i == j) entry += p2;
          A[i][j] += w * entry;
        }
    };
    if (d == 2) {
      for (kap[0] = lo[0]; kap[0] <= hi[0]; ++kap[0])
        for (kap[1] = lo[1]; kap[1] <= hi[1]; ++kap[1]) body(kap);
    } else {
      for (kap[0] = lo[0]; kap[0] <= hi[0]; ++kap[0])
        for (kap[1] = lo[1]; kap[1] <= hi[1]; ++kap[1])
          for (kap[2] = lo[2]; kap[2] <= hi[2]; ++kap[2]) body(kap);
    }
    const double c0w = (nb.c0_truncated + 2.0 * nu) * std::pow(tp2 * m2, -s + 1.0);
    // restrict H = (2pi)^2 A - c0w I to m-perp and take the top eigenvalue
    std::array<double, 6> basis{};
    detail::make_polarizations(mm, d, basis);
    double lam_max;
    if (d == 2) {
      const double* e1 = basis.data();
      double h11 = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) h11 += e1[i] * (tp2 * A[i][j]) * e1[j];
      lam_max = h11 - c0w;
    } else {
      const double* e1 = basis.data();
      const double* e2 = basis.data() + 3;
      double h11 = 0.0, h12 = 0.0, h22 = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double hij = tp2 * A[i][j];
          h11 += e1[i] * hij * e1[j];
          h12 += e1[i] * hij * e2[j];
          h22 += e2[i] * hij * e2[j];
        }
      const double tr = 0.5 * (h11 + h22) - c0w;
      const double di = 0.5 * (h11 - h22);
      lam_max = tr + std::sqrt(di * di + h12 * h12);
    }
    const double g = std::pow(tp2 * m2, 1.0 - s - nb.alpha);
    const double b = std::pow(tp2 * m2, -s);
    info[mi] = {lam_max, g, b};
  });

  // smallest rho >= 0 giving eta > 0, then the sharpest eta for that rho
  double worst_ratio = 0.0;  // max lam_max / b over modes
  LatticeDriftFit fit;
  for (std::size_t mi = 0; mi < info.size(); ++mi) {
    const auto& q = info[mi];
    worst_ratio = std::max(worst_ratio, q.lam_max / q.b);
    fit.max_lambda = std::max(fit.max_lambda, q.lam_max);
    double m2 = 0.0;
    for (int i = 0; i < d; ++i) m2 += static_cast<double>(modes[mi][i]) * modes[mi][i];
    // the viscous shift of lambda_max(D_m) is exactly 2 nu |2 pi m|^{2-2s}
    fit.nu_star = std::max(fit.nu_star, 0.5 * q.lam_max * std::pow(tp2 * m2, s - 1.0));
  }
  fit.rho_hat = std::max(0.0, 2.0 * worst_ratio);
  double eta = std::numeric_limits<double>::infinity();
  for (const auto& q : info) eta = std::min(eta, (fit.rho_hat * q.b - q.lam_max) / q.g);
  fit.eta_hat = eta;
  return fit;
}

}  // namespace kklab
