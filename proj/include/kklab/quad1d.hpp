#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <type_traits>

namespace kklab {

/// Outcome of a 1-d quadrature: value, absolute error estimate, evaluation
/// count and whether the requested tolerance was actually met.
template <class T>
struct Quad1dResult {
  T value{};
  double error = 0.0;
  std::size_t evals = 0;
  bool converged = true;

  Quad1dResult& operator+=(const Quad1dResult& o) {
    value += o.value;
    error += o.error;
    evals += o.evals;
    converged = converged && o.converged;
    return *this;
  }
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights (positive half), QUADPACK values.
inline constexpr double gk15_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk15_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk15_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T, class F>
void gk15_panel(const F& f, double a, double b, T& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T resk{};
  T resg{};
  for (int i = 0; i < 8; ++i) {
    const double dx = h * gk15_nodes[i];
    if (i == 7) {
      const T fc = f(c);
      resk += gk15_wk[7] * fc;
      resg += gk15_wg[3] * fc;
    } else {
      const T fv = f(c - dx) + f(c + dx);
      resk += gk15_wk[i] * fv;
      if (i % 2 == 1) resg += gk15_wg[i / 2] * fv;
    }
  }
  kronrod = resk * h;
  err = std::abs((resk - resg) * h);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod 15 on [a, b] by recursive bisection.
template <class T, class F>
Quad1dResult<T> adaptive_gk(const F& f, double a, double b, double abs_tol, double rel_tol,
                            int max_depth = 52) {
  struct Worker {
    const F& f;
    double rel_tol;
    std::size_t evals = 0;
    bool converged = true;

    Quad1dResult<T> run(double a, double b, double tol, int depth) {
      T val;
      double err;
      detail::gk15_panel<T>(f, a, b, val, err);
      evals += 15;
      if (err <= tol || err <= rel_tol * std::abs(val) || b - a < 1e-300) {
        return {val, err, 0, true};
      }
      if (depth <= 0) {
        converged = false;
        return {val, err, 0, false};
      }
      const double m = 0.5 * (a + b);
      Quad1dResult<T> left = run(a, m, 0.5 * tol, depth - 1);
      left += run(m, b, 0.5 * tol, depth - 1);
      return left;
    }
  } w{f, rel_tol};
  Quad1dResult<T> r = w.run(a, b, abs_tol, max_depth);
  r.evals = w.evals;
  r.converged = w.converged;
  return r;
}

/// tanh-sinh quadrature on (a, b); robust for integrable endpoint
/// singularities.  Doubles the node density until two successive levels agree.
///
/// The integrand may be called either as f(x) or as f(x, dist_a, dist_b),
/// where dist_a = x - a and dist_b = b - x are computed without cancellation;
/// integrands singular at an endpoint should use the distances.
template <class T, class F>
Quad1dResult<T> tanh_sinh(const F& f, double a, double b, double abs_tol, double rel_tol,
                          int max_level = 14) {
  constexpr bool wants_dist = std::is_invocable_v<F, double, double, double>;
  auto eval = [&](double x, double da, double db) -> T {
    if constexpr (wants_dist)
      return f(x, da, db);
    else
      return f(x);
  };

  const double c = 0.5 * (a + b);
  const double h0 = 0.5 * (b - a);
  const double half_pi = 0.5 * std::numbers::pi;
  const double len = b - a;

  std::size_t evals = 0;
  auto node_sum = [&](double step, bool odd_only, double negligible) {
    T sum{};
    for (int sign = -1; sign <= 1; sign += 2) {
      int small_run = 0;
      for (int k = 1; k <= 8000; ++k) {
        if (odd_only && k % 2 == 0) continue;
        const double t = k * step;
        const double u = half_pi * std::sinh(t);
        const double eu = std::exp(-u);
        // 1 - tanh(u) = 2 e^{-2u} / (1 + e^{-2u}); sech(u) = 2 e^{-u}/(1+e^{-2u})
        const double q = 2.0 * eu * eu / (1.0 + eu * eu);
        const double sech = 2.0 * eu / (1.0 + eu * eu);
        const double w = half_pi * std::cosh(t) * sech * sech;
        const double d = h0 * q;  // distance to the endpoint this node approaches
        if (d <= 0.0 || w <= 0.0) break;
        const double x = (sign > 0) ? b - d : a + d;
        if constexpr (!wants_dist) {
          // plain f(x) integrands cannot see past double rounding at the ends
          if (!(x > a && x < b)) break;
        }
        T fv;
        if (sign > 0) {
          fv = eval(x, len - d, d);
        } else {
          fv = eval(x, d, len - d);
        }
        ++evals;
        if (!(std::abs(w * fv) >= 0.0)) {
          // non-finite deep in the tail: drop the node, the weight is negligible
          if (w < 1e-200) break;
        }
        sum += w * fv;
        if (std::abs(w * fv) < negligible) {
          if (++small_run >= 2) break;
        } else {
          small_run = 0;
        }
      }
    }
    return sum;
  };

  const double negligible = 1e-6 * abs_tol;
  double h = 1.0;
  T acc = half_pi * eval(c, c - a, b - c);
  ++evals;
  acc += node_sum(h, false, negligible);
  T prev = acc * (h * h0);
  double err = std::abs(prev);
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    acc += node_sum(h, true, negligible);
    T cur = acc * (h * h0);
    err = std::abs(cur - prev);
    prev = cur;
    if (err <= abs_tol || err <= rel_tol * std::abs(cur)) {
      return {cur, err, evals, true};
    }
  }
  return {prev, err, evals, false};
}

}  // namespace kklab
