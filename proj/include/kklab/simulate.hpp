#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "kklab/errors.hpp"
#include "kklab/lattice.hpp"
#include "kklab/noise_basis.hpp"
#include "kklab/params.hpp"
#include "kklab/rng.hpp"
#include "kklab/spectral_ops.hpp"
#include "kklab/threading.hpp"

namespace kklab {

/// Ensemble Sobolev-norm statistics along the simulation.
struct NormSeries {
  std::vector<double> times;
  std::vector<double> mean_hs_norm_sq, stderr_hs;      // E ||M||^2_{H^{-s}}
  std::vector<double> mean_gain_norm_sq, stderr_gain;  // E ||M||^2_{H^{-s+1-alpha}}
  std::vector<double> mean_l2_sq, stderr_l2;
  int ensemble_size = 0;
  // left-endpoint Riemann sum of dt ||M_t||^2_gain over the whole run
  double mean_gain_time_integral = 0.0;
  double stderr_gain_time_integral = 0.0;
  double dt_used = 0.0;
  double t_used = 0.0;
};

struct InitSpec {
  enum class Kind { single_mode, broadband } kind = Kind::broadband;
  std::array<int, 3> k0{1, 0, 0};
  double gamma = 2.0;
};

struct SimConfig {
  Lattice lat;
  ModelParams params;
  double nu = 0.0;
  double dt = 1e-4;
  double t_final = 1e-2;
  int n_paths = 2;
  std::uint64_t seed = 0;
  std::vector<double> output_times;
  InitSpec init;
};

namespace detail {

/// Per-path scratch: padded field copy and dense assembled noise increment.
/// The d = 3 hot path keeps the field and the accumulator in
/// structure-of-arrays layout (six double planes), which is what lets the
/// inner row loop vectorize.
struct StepWorkspace {
  Lattice lat;
  int P = 0;  // padded side 4 n_max + 1
  std::vector<std::complex<double>> u_pad;   // P^d * d (d = 2 path)
  std::vector<std::complex<double>> dw;      // sites * d
  std::vector<std::complex<double>> conv;    // sites * d
  std::vector<double> lap_rate;              // sites: |2 pi n|^2
  std::array<std::vector<double>, 6> u_soa;    // comp*2 + (0 re, 1 im), size P^3
  std::array<std::vector<double>, 6> out_soa;  // size B^3
  std::vector<double> idx;                     // idx[i] = i, for the row kernel

  explicit StepWorkspace(const Lattice& l) : lat(l) {
    P = 4 * lat.n_max + 1;
    std::size_t psites = 1;
    for (int i = 0; i < lat.d; ++i) psites *= static_cast<std::size_t>(P);
    dw.assign(lat.sites() * lat.d, {});
    conv.assign(lat.sites() * lat.d, {});
    lap_rate = weight_table(lat, 1.0);
    if (lat.d == 3) {
      for (auto& v : u_soa) v.assign(psites, 0.0);
      for (auto& v : out_soa) v.assign(lat.sites(), 0.0);
      idx.resize(lat.side());
      for (int i = 0; i < lat.side(); ++i) idx[i] = i;
    } else {
      u_pad.assign(psites * lat.d, {});
    }
  }

  std::size_t pad_index(const std::array<int, 3>& n) const {
    const int off = 2 * lat.n_max;
    std::size_t flat = 0;
    for (int i = 0; i < lat.d; ++i) flat = flat * P + static_cast<std::size_t>(n[i] + off);
    return flat;
  }
};

/// Assemble the Fourier coefficients of the Wiener increment field from one
/// independent N(0, dt) draw per (wave, polarization, phase), in the fixed
/// wave order of the basis.
inline void assemble_increment(const NoiseBasis& nb, const Lattice& lat, double dt,
                               RngStream& rng, std::vector<std::complex<double>>& dw) {
  std::fill(dw.begin(), dw.end(), std::complex<double>{});
  const double sq = std::sqrt(dt);
  const int d = lat.d;
  for (std::size_t wi = 0; wi < nb.waves.size(); ++wi) {
    const std::array<int, 3>& k = nb.waves[wi];
    std::array<int, 3> mk{-k[0], -k[1], -k[2]};
    const double half_q = 0.5 * nb.amp[wi];
    auto* plus = dw.data() + lat.site_index(k) * d;
    auto* minus = dw.data() + lat.site_index(mk) * d;
    for (int j = 0; j < d - 1; ++j) {
      const double gc = sq * rng.normal();
      const double gs = sq * rng.normal();
      const double* a = nb.polarization(wi, j);
      const std::complex<double> cp(half_q * gc, -half_q * gs);
      const std::complex<double> cm(half_q * gc, half_q * gs);
      for (int i = 0; i < d; ++i) {
        plus[i] += cp * a[i];
        minus[i] += cm * a[i];
      }
    }
  }
}

/// SIMD row kernel of the bilinear convolution: for one output row and one
/// noise wavevector, accumulate
///   (w . m) u - (u . kappa) w   at  m = n - kappa,  n2 scanning the row.
/// t1 = w . m is affine in the row index; idx[] carries the index as a double
/// so the whole body is straight-line FMA material.
inline void b_row_kernel(int i_lo, int B, const double* __restrict idx, double c1r,
                         double c1i, double wr0, double wi0, double wr1, double wi1,
                         double wr2, double wi2, double kd0, double kd1, double kd2,
                         const double* __restrict pu0r, const double* __restrict pu0i,
                         const double* __restrict pu1r, const double* __restrict pu1i,
                         const double* __restrict pu2r, const double* __restrict pu2i,
                         double* __restrict po0r, double* __restrict po0i,
                         double* __restrict po1r, double* __restrict po1i,
                         double* __restrict po2r, double* __restrict po2i) {
#pragma GCC ivdep
  for (int i = i_lo; i < B; ++i) {
    const double u0r = pu0r[i], u0i = pu0i[i];
    const double u1r = pu1r[i], u1i = pu1i[i];
    const double u2r = pu2r[i], u2i = pu2i[i];
    const double t1r = c1r + wr2 * idx[i];
    const double t1i = c1i + wi2 * idx[i];
    const double t2r = u0r * kd0 + u1r * kd1 + u2r * kd2;
    const double t2i = u0i * kd0 + u1i * kd1 + u2i * kd2;
    po0r[i] += t1r * u0r - t1i * u0i - (t2r * wr0 - t2i * wi0);
    po0i[i] += t1r * u0i + t1i * u0r - (t2r * wi0 + t2i * wr0);
    po1r[i] += t1r * u1r - t1i * u1i - (t2r * wr1 - t2i * wi1);
    po1i[i] += t1r * u1i + t1i * u1r - (t2r * wi1 + t2i * wr1);
    po2r[i] += t1r * u2r - t1i * u2i - (t2r * wr2 - t2i * wi2);
    po2i[i] += t1r * u2i + t1i * u2r - (t2r * wi2 + t2i * wr2);
  }
}

/// conv(n) = sum_kappa [ (w_kappa . (n - kappa)) u(n - kappa)
///                       - (u(n - kappa) . kappa) w_kappa ],
/// outputs truncated to the lattice, inputs read as zero outside (padding).
/// The 2 pi i factor is applied by the caller.
inline void convolve_b(const SpectralField& m, const std::vector<std::complex<double>>& dw,
                       StepWorkspace& ws) {
  const Lattice& lat = m.lat;
  const int d = lat.d;
  const int N = lat.n_max;
  const int B = lat.side();
  const int P = ws.P;

  std::fill(ws.conv.begin(), ws.conv.end(), std::complex<double>{});

  if (d == 3) {
    // refresh the padded SoA copy of the field
    for (auto& plane : ws.u_soa) std::fill(plane.begin(), plane.end(), 0.0);
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
      const auto* src = m.c.data() + site * 3;
      const std::size_t pidx = ws.pad_index(n);
      for (int i = 0; i < 3; ++i) {
        ws.u_soa[2 * i][pidx] = src[i].real();
        ws.u_soa[2 * i + 1][pidx] = src[i].imag();
      }
    });
    for (auto& plane : ws.out_soa) std::fill(plane.begin(), plane.end(), 0.0);

    // Outputs are computed on the canonical half lattice only and mirrored by
    // conjugation.  Loop order keeps the active u plane and the out row hot:
    // (n0, k0) select planes, then (n1, k1, k2) rows, n2 contiguous inside.
    auto accumulate_row = [&](int n0, int n1, int i_lo) {
      const std::size_t out_row = ((static_cast<std::size_t>(n0 + N) * B) + (n1 + N)) * B;
      double* __restrict po0r = ws.out_soa[0].data() + out_row;
      double* __restrict po0i = ws.out_soa[1].data() + out_row;
      double* __restrict po1r = ws.out_soa[2].data() + out_row;
      double* __restrict po1i = ws.out_soa[3].data() + out_row;
      double* __restrict po2r = ws.out_soa[4].data() + out_row;
      double* __restrict po2i = ws.out_soa[5].data() + out_row;
      for (int k0 = -N; k0 <= N; ++k0) {
        const int m0 = n0 - k0;
        for (int k1 = -N; k1 <= N; ++k1) {
          const int m1 = n1 - k1;
          const std::size_t pad_row =
              ((static_cast<std::size_t>(m0 + 2 * N) * P) + (m1 + 2 * N)) * P;
          const std::complex<double>* wrow = dw.data() + lat.site_index({k0, k1, -N}) * 3;
          for (int k2 = -N; k2 <= N; ++k2) {
            if (k0 == 0 && k1 == 0 && k2 == 0) continue;
            const std::complex<double>* w = wrow + (k2 + N) * 3;
            const double wr0 = w[0].real(), wr1 = w[1].real(), wr2 = w[2].real();
            const double wi0 = w[0].imag(), wi1 = w[1].imag(), wi2 = w[2].imag();
            // m2 = (i - N) - k2 for loop index i, so t1 is affine in i
            const double c1r = wr0 * m0 + wr1 * m1 - wr2 * (N + k2);
            const double c1i = wi0 * m0 + wi1 * m1 - wi2 * (N + k2);
            const std::size_t poff = pad_row + (N - k2);
            b_row_kernel(i_lo, B, ws.idx.data(), c1r, c1i, wr0, wi0, wr1, wi1, wr2, wi2,
                         k0, k1, k2, ws.u_soa[0].data() + poff, ws.u_soa[1].data() + poff,
                         ws.u_soa[2].data() + poff, ws.u_soa[3].data() + poff,
                         ws.u_soa[4].data() + poff, ws.u_soa[5].data() + poff, po0r, po0i,
                         po1r, po1i, po2r, po2i);
          }
        }
      }
    };
    for (int n0 = 1; n0 <= N; ++n0)
      for (int n1 = -N; n1 <= N; ++n1) accumulate_row(n0, n1, 0);
    for (int n1 = 1; n1 <= N; ++n1) accumulate_row(0, n1, 0);
    accumulate_row(0, 0, N + 1);
    // gather into the complex accumulator and mirror: the real field is
    // 2 pi i conv, so conv(-n) = -conj(conv(n))
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
      if (!Lattice::canonical(n, 3)) return;
      std::array<int, 3> mn{-n[0], -n[1], -n[2]};
      const std::size_t msite = lat.site_index(mn);
      for (int i = 0; i < 3; ++i) {
        const std::complex<double> v(ws.out_soa[2 * i][site], ws.out_soa[2 * i + 1][site]);
        ws.conv[site * 3 + i] = v;
        ws.conv[msite * 3 + i] = -std::conj(v);
      }
    });
  } else {
    // refresh the padded copy of the field
    std::fill(ws.u_pad.begin(), ws.u_pad.end(), std::complex<double>{});
    lat.for_each_mode([&](const std::array<int, 3>& n, std::size_t site) {
      const auto* src = m.c.data() + site * d;
      auto* dst = ws.u_pad.data() + ws.pad_index(n) * d;
      for (int i = 0; i < d; ++i) dst[i] = src[i];
    });
    // d == 2, modest sizes: plain coordinate loops over the full lattice
    std::array<int, 3> kap{0, 0, 0};
    for (kap[0] = -N; kap[0] <= N; ++kap[0])
      for (kap[1] = -N; kap[1] <= N; ++kap[1]) {
        if (kap[0] == 0 && kap[1] == 0) continue;
        const std::complex<double>* w = dw.data() + lat.site_index(kap) * d;
        std::array<int, 3> n{0, 0, 0};
        for (n[0] = -N; n[0] <= N; ++n[0])
          for (n[1] = -N; n[1] <= N; ++n[1]) {
            std::array<int, 3> mm{n[0] - kap[0], n[1] - kap[1], 0};
            const std::complex<double>* u = ws.u_pad.data() + ws.pad_index(mm) * d;
            std::complex<double> t1{0.0, 0.0}, t2{0.0, 0.0};
            for (int i = 0; i < d; ++i) {
              t1 += w[i] * static_cast<double>(mm[i]);
              t2 += u[i] * static_cast<double>(kap[i]);
            }
            auto* o = ws.conv.data() + lat.site_index(n) * d;
            for (int i = 0; i < d; ++i) o[i] += t1 * u[i] - t2 * w[i];
          }
      }
  }

  // zero-mode output stays absent
  std::array<int, 3> zero{0, 0, 0};
  auto* z = ws.conv.data() + lat.site_index(zero) * d;
  for (int i = 0; i < d; ++i) z[i] = {};
}

inline void check_stability(const Lattice& lat, const NoiseBasis& nb, double nu, double dt) {
  const double corner = two_pi * two_pi * lat.d * lat.n_max * lat.n_max;
  if (!(dt > 0.0)) throw domain_error("ito_step: dt must be positive");
  if (dt * (nu + 0.5 * nb.c0_truncated) * corner > 0.5)
    throw domain_error("ito_step: explicit-scheme stability guard violated");
}

/// One Euler-Maruyama step, in place.
inline void ito_step_inplace(SpectralField& m, const NoiseBasis& nb, double nu, double dt,
                             RngStream& rng, StepWorkspace& ws) {
  check_stability(m.lat, nb, nu, dt);
  assemble_increment(nb, m.lat, dt, rng, ws.dw);
  convolve_b(m, ws.dw, ws);
  const Lattice& lat = m.lat;
  const int d = lat.d;
  const double rate = nu + 0.5 * nb.c0_truncated;
  const std::complex<double> i2pi(0.0, two_pi);
  for (std::size_t site = 0; site < lat.sites(); ++site) {
    const double decay = 1.0 - dt * rate * ws.lap_rate[site];
    for (int i = 0; i < d; ++i) {
      auto& c = m.c[site * d + i];
      c = c * decay - i2pi * ws.conv[site * d + i];
    }
  }
}

}  // namespace detail

/// One Euler-Maruyama step of dM = -B[M] dW + (nu + c0/2) Lap M dt.
inline SpectralField ito_step(const SpectralField& m, const NoiseBasis& nb, double nu,
                              double dt, RngStream& rng) {
  detail::StepWorkspace ws(m.lat);
  SpectralField out = m;
  detail::ito_step_inplace(out, nb, nu, dt, rng, ws);
  return out;
}

inline SpectralField make_initial_field(const Lattice& lat, const InitSpec& init,
                                        std::uint64_t seed) {
  if (init.kind == InitSpec::Kind::single_mode) return single_mode_field(lat, init.k0);
  RngStream rng = RngStream::derived(seed, 0x1217);
  return broadband_field(lat, init.gamma, rng);
}

/// Evolve n_paths independent realizations from a shared initial field and
/// report ensemble means and standard errors of the three tracked norms at
/// the requested output times.  Paths run in parallel, each on its own
/// derived stream; the reduction is in fixed path order, so results are
/// bit-identical for a given (config, seed) regardless of thread count.
inline NormSeries run_ensemble(const SimConfig& cfg) {
  validate_basic(cfg.params);
  if (cfg.n_paths < 2) throw domain_error("run_ensemble: need at least 2 paths");
  if (cfg.lat.d != cfg.params.d) throw domain_error("run_ensemble: lattice/params d mismatch");
  const NoiseBasis nb = build_noise_basis(cfg.lat, cfg.params.alpha);

  // honor the stability guard by halving the requested step
  double dt = cfg.dt;
  for (int i = 0; i < 60; ++i) {
    try {
      detail::check_stability(cfg.lat, nb, cfg.nu, dt);
      break;
    } catch (const domain_error&) {
      dt *= 0.5;
    }
  }
  detail::check_stability(cfg.lat, nb, cfg.nu, dt);

  std::vector<double> out_times = cfg.output_times;
  if (out_times.empty()) out_times = {0.0, cfg.t_final};
  std::sort(out_times.begin(), out_times.end());

  const SpectralField m0 = make_initial_field(cfg.lat, cfg.init, cfg.seed);
  const double s = cfg.params.s;
  const double gain_exp = -s + 1.0 - cfg.params.alpha;
  const auto w_hs = detail::weight_table(cfg.lat, -s);
  const auto w_gain = detail::weight_table(cfg.lat, gain_exp);

  const std::size_t n_out = out_times.size();
  std::vector<double> hs(cfg.n_paths * n_out), gain(cfg.n_paths * n_out),
      l2(cfg.n_paths * n_out), gain_int(cfg.n_paths, 0.0);
  const long n_steps = std::lround(std::ceil(cfg.t_final / dt - 1e-9));

  parallel_for(cfg.n_paths, [&](std::size_t p) {
    RngStream rng = RngStream::derived(cfg.seed, 1000 + p);
    SpectralField m = m0;
    detail::StepWorkspace ws(cfg.lat);
    const int dcomp = cfg.lat.d;
    auto weighted = [&](const std::vector<double>& w) {
      double acc = 0.0;
      for (std::size_t site = 0; site < cfg.lat.sites(); ++site) {
        double e = 0.0;
        for (int i = 0; i < dcomp; ++i) e += std::norm(m.c[site * dcomp + i]);
        acc += w[site] * e;
      }
      return acc;
    };
    double t = 0.0;
    std::size_t next_out = 0;
    const auto record = [&](std::size_t oi) {
      hs[p * n_out + oi] = weighted(w_hs);
      gain[p * n_out + oi] = weighted(w_gain);
      l2[p * n_out + oi] = m.l2_norm_sq();
    };
    while (next_out < n_out && out_times[next_out] <= 0.5 * dt) record(next_out++);
    for (long step = 0; step < n_steps; ++step) {
      gain_int[p] += dt * weighted(w_gain);
      detail::ito_step_inplace(m, nb, cfg.nu, dt, rng, ws);
      t = (step + 1) * dt;
      while (next_out < n_out && out_times[next_out] <= t + 0.5 * dt) record(next_out++);
    }
    while (next_out < n_out) record(next_out++);
  });

  NormSeries ns;
  ns.times = out_times;
  ns.ensemble_size = cfg.n_paths;
  ns.dt_used = dt;
  ns.t_used = n_steps * dt;
  {
    double mu = 0.0;
    for (double v : gain_int) mu += v;
    mu /= cfg.n_paths;
    double var = 0.0;
    for (double v : gain_int) var += (v - mu) * (v - mu);
    var /= std::max(1, cfg.n_paths - 1);
    ns.mean_gain_time_integral = mu;
    ns.stderr_gain_time_integral = std::sqrt(var / cfg.n_paths);
  }
  auto reduce = [&](const std::vector<double>& src, std::vector<double>& mean,
                    std::vector<double>& se) {
    mean.assign(n_out, 0.0);
    se.assign(n_out, 0.0);
    for (std::size_t oi = 0; oi < n_out; ++oi) {
      double mu = 0.0;
      for (int p = 0; p < cfg.n_paths; ++p) mu += src[p * n_out + oi];
      mu /= cfg.n_paths;
      double var = 0.0;
      for (int p = 0; p < cfg.n_paths; ++p) {
        const double dev = src[p * n_out + oi] - mu;
        var += dev * dev;
      }
      var /= std::max(1, cfg.n_paths - 1);
      mean[oi] = mu;
      se[oi] = std::sqrt(var / cfg.n_paths);
    }
  };
  reduce(hs, ns.mean_hs_norm_sq, ns.stderr_hs);
  reduce(gain, ns.mean_gain_norm_sq, ns.stderr_gain);
  reduce(l2, ns.mean_l2_sq, ns.stderr_l2);
  return ns;
}

/// Ensemble of independent one-step increments of ||M||^2_{H^{-s}} from a
/// fixed field, divided by dt: the empirical counterpart of exact_drift.
struct DriftEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_increments = 0;
};

inline DriftEstimate one_step_drift_ensemble(const SpectralField& m0, const NoiseBasis& nb,
                                             double nu, double s, double dt,
                                             std::size_t n_increments, std::uint64_t seed) {
  detail::check_stability(m0.lat, nb, nu, dt);
  const double base = m0.sobolev_norm_sq(-s);
  constexpr std::size_t n_chunks = 64;
  const std::size_t per_chunk = (n_increments + n_chunks - 1) / n_chunks;
  std::vector<double> sum(n_chunks, 0.0), sum2(n_chunks, 0.0), count(n_chunks, 0.0);

  parallel_for(n_chunks, [&](std::size_t ci) {
    detail::StepWorkspace ws(m0.lat);
    double acc = 0.0, acc2 = 0.0;
    std::size_t done = 0;
    for (std::size_t i = ci * per_chunk; i < std::min(n_increments, (ci + 1) * per_chunk);
         ++i) {
      RngStream rng = RngStream::derived(seed, i);
      SpectralField m = m0;
      detail::ito_step_inplace(m, nb, nu, dt, rng, ws);
      const double inc = (m.sobolev_norm_sq(-s) - base) / dt;
      acc += inc;
      acc2 += inc * inc;
      ++done;
    }
    sum[ci] = acc;
    sum2[ci] = acc2;
    count[ci] = static_cast<double>(done);
  });

  double n = 0.0, acc = 0.0, acc2 = 0.0;
  for (std::size_t ci = 0; ci < n_chunks; ++ci) {
    n += count[ci];
    acc += sum[ci];
    acc2 += sum2[ci];
  }
  DriftEstimate est;
  est.n_increments = static_cast<std::size_t>(n);
  est.mean = acc / n;
  est.std_error = std::sqrt(std::max(0.0, acc2 / n - est.mean * est.mean) / n);
  return est;
}

}  // namespace kklab
