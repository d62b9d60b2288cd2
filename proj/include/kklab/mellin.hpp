#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kklab/angular_kernel.hpp"
#include "kklab/errors.hpp"
#include "kklab/quad1d.hpp"
#include "kklab/result.hpp"
#include "kklab/specfun.hpp"

namespace kklab {

enum class MellinFamily { lorentzian, angular };

/// One term of a residue expansion: coefficient * lambda^{power_of_lambda},
/// the residue sitting at Re z = location.
struct ResidueTerm {
  double location = 0.0;
  double coefficient = 0.0;
  double power_of_lambda = 0.0;
};

/// Closed-form Mellin transforms of the two function families the asymptotic
/// expansion needs:
///
///   lorentzian(b):  h(t) = (1 + t^2)^{-b},
///       M[h, z] = Gamma(z/2) Gamma(b - z/2) / (2 Gamma(b)),   strip (0, 2b)
///
///   angular(a, b, s):  f_{a,b,s}(t) = t^a int_0^pi sin^b / (1-2t cos+t^2)^s,
///       M[f, z] = sqrt(pi) G((b-2s+2)/2) G((b+1)/2) / (2 G(s))
///                 * G((2s-z-a)/2) G((z+a)/2)
///                   / [ G((b-a-z+2)/2) G((b+a-2s+2+z)/2) ],  strip (-a, 2s-a)
///
/// Both continue meromorphically with only simple poles.
struct MellinClosedForm {
  MellinFamily kind = MellinFamily::lorentzian;
  double a = 0.0;  // unused by lorentzian
  double b = 1.0;
  double s = 1.0;  // unused by lorentzian

  static MellinClosedForm lorentzian(double b) {
    if (!(b > 0.0)) throw domain_error("mellin lorentzian: need b > 0");
    MellinClosedForm m;
    m.kind = MellinFamily::lorentzian;
    m.b = b;
    return m;
  }

  static MellinClosedForm angular(double a, double b, double s) {
    if (!(b > 0.0) || !(s > 0.0)) throw domain_error("mellin angular: need b > 0, s > 0");
    if (!(b > 2.0 * s - 1.0))
      throw domain_error("mellin angular: need b > 2s - 1 for integrability");
    MellinClosedForm m;
    m.kind = MellinFamily::angular;
    m.a = a;
    m.b = b;
    m.s = s;
    return m;
  }

  std::pair<double, double> fundamental_strip() const {
    if (kind == MellinFamily::lorentzian) return {0.0, 2.0 * b};
    return {-a, 2.0 * s - a};
  }

  /// Analytic continuation at z; throws pole_error on the pole lattice.
  Complex value(Complex z) const {
    if (kind == MellinFamily::lorentzian) {
      const Complex half = 0.5 * z;
      if (gamma_pole_near(half) || gamma_pole_near(Complex(b, 0.0) - half))
        throw pole_error("mellin lorentzian: z on pole lattice");
      return std::exp(log_gamma(half) + log_gamma(Complex(b, 0.0) - half)) /
             (2.0 * gamma_real(b));
    }
    const Complex n1 = 0.5 * (Complex(2.0 * s - a, 0.0) - z);
    const Complex n2 = 0.5 * (z + a);
    const Complex d1 = 0.5 * (Complex(b - a + 2.0, 0.0) - z);
    const Complex d2 = 0.5 * (Complex(b + a - 2.0 * s + 2.0, 0.0) + z);
    if (gamma_pole_near(n1) || gamma_pole_near(n2))
      throw pole_error("mellin angular: z on pole lattice");
    return prefactor() * std::exp(log_gamma(n1) + log_gamma(n2)) * reciprocal_gamma(d1) *
           reciprocal_gamma(d2);
  }

  /// The defining function itself (t > 0).
  double function_at(double t) const {
    if (kind == MellinFamily::lorentzian) return std::pow(1.0 + t * t, -b);
    return angular_kernel(a, b, s, t);
  }

  /// Residue of the analytic continuation at a simple pole z0 (which must be
  /// a member of the pole lattice).  Returns 0 when a denominator zero
  /// cancels the would-be pole.
  double residue_at(double z0) const {
    if (kind == MellinFamily::lorentzian) {
      // z = -2n:   res = (-1)^n Gamma(b+n) / (n! Gamma(b))
      // z = 2b+2n: res = -(-1)^n Gamma(b+n) / (n! Gamma(b))
      const double tn_low = -0.5 * z0;
      const double tn_high = 0.5 * (z0 - 2.0 * b);
      if (is_index(tn_low)) {
        const int n = static_cast<int>(std::lround(tn_low));
        return parity(n) * gamma_real(b + n) / (factorial(n) * gamma_real(b));
      }
      if (is_index(tn_high)) {
        const int n = static_cast<int>(std::lround(tn_high));
        return -parity(n) * gamma_real(b + n) / (factorial(n) * gamma_real(b));
      }
      throw domain_error("mellin lorentzian: z0 is not on the pole lattice");
    }
    // angular: poles at z0 = 2s - a + 2n and z0 = -a - 2n
    const double tn_up = 0.5 * (z0 - (2.0 * s - a));
    const double tn_dn = -0.5 * (z0 + a);
    if (is_index(tn_up)) {
      const int n = static_cast<int>(std::lround(tn_up));
      const double g2 = gamma_real(s + n);  // Gamma((z0+a)/2)
      const double rg =
          reciprocal_gamma(Complex(0.5 * (b - 2.0 * s + 2.0) - n, 0.0)).real() *
          reciprocal_gamma(Complex(0.5 * b + 1.0 + n, 0.0)).real();
      return -2.0 * parity(n) / factorial(n) * prefactor() * g2 * rg;
    }
    if (is_index(tn_dn)) {
      const int n = static_cast<int>(std::lround(tn_dn));
      const double g1 = gamma_real(s + n);  // Gamma((2s-a-z0)/2)
      const double rg =
          reciprocal_gamma(Complex(0.5 * b + 1.0 + n, 0.0)).real() *
          reciprocal_gamma(Complex(0.5 * (b - 2.0 * s + 2.0) - n, 0.0)).real();
      return 2.0 * parity(n) / factorial(n) * prefactor() * g1 * rg;
    }
    throw domain_error("mellin angular: z0 is not on the pole lattice");
  }

  /// All pole locations in the open interval (lo, hi).
  std::vector<double> poles_in(double lo, double hi) const {
    std::vector<double> out;
    auto push_arith = [&](double start, double step) {
      for (double z = start;; z += step) {
        if (step > 0.0 && z >= hi) break;
        if (step < 0.0 && z <= lo) break;
        if (z > lo && z < hi) out.push_back(z);
        if (std::abs(z) > 1e6) break;
      }
    };
    if (kind == MellinFamily::lorentzian) {
      push_arith(0.0, -2.0);
      push_arith(2.0 * b, 2.0);
    } else {
      push_arith(-a, -2.0);
      push_arith(2.0 * s - a, 2.0);
    }
    return out;
  }

 private:
  static bool is_index(double t, double tol = 1e-9) {
    return t > -tol && std::abs(t - std::lround(t)) < tol;
  }
  static double parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }
  static double factorial(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
  }
  double prefactor() const {
    return std::sqrt(std::numbers::pi) * gamma_real(0.5 * (b - 2.0 * s + 2.0)) *
           gamma_real(0.5 * (b + 1.0)) / (2.0 * gamma_real(s));
  }
};

/// M[(1+t^2)^{-b}, z], continued meromorphically.
inline Complex mellin_lorentzian(double b, Complex z) {
  return MellinClosedForm::lorentzian(b).value(z);
}

/// M[f_{a,b,s}, z], continued meromorphically.
inline Complex mellin_angular(double a, double b, double s, Complex z) {
  return MellinClosedForm::angular(a, b, s).value(z);
}

/// Numeric Mellin transform int_0^inf t^{z-1} f(t) dt, for Re(z) inside the
/// caller-declared strip.  The integral is split at t = 1 with the tolerance
/// budget shared 50/50, and the outer half-line is folded back to (0,1] via
/// t -> 1/t.  Both endpoint exponents are factored out analytically:
/// f(t) = t^{growth} f0(t) near 0 and f(1/r) = r^{decay} finf(r) near 0, with
/// f0, finf bounded, so every power lives inside a single complex exponential
/// and no intermediate over- or underflows.
inline ComplexIntegralResult numeric_mellin_split(
    const std::function<double(double)>& f0, double growth,
    const std::function<double(double)>& finf, double decay, Complex z,
    std::pair<double, double> strip_hint, double tol = 1e-10) {
  if (!(z.real() > strip_hint.first && z.real() < strip_hint.second))
    throw domain_error("numeric_mellin: Re(z) outside the declared strip");

  // inner: int_0^1 t^{z-1+growth} f0(t) dt, singular only at t -> 0
  auto inner = [&](double /*t*/, double da, double /*db*/) -> Complex {
    const double fv = f0(da);
    if (fv == 0.0) return Complex(0.0, 0.0);
    return std::exp((z - 1.0 + growth) * std::log(da)) * fv;
  };
  // outer: int_0^1 r^{decay - z - 1} finf(r) dr, singular only at r -> 0
  auto outer = [&](double /*r*/, double da, double /*db*/) -> Complex {
    const double fv = finf(da);
    if (fv == 0.0) return Complex(0.0, 0.0);
    return std::exp((Complex(decay, 0.0) - z - 1.0) * std::log(da)) * fv;
  };
  auto qi = tanh_sinh<Complex>(inner, 0.0, 1.0, 0.5 * tol, 0.1 * tol);
  auto qo = tanh_sinh<Complex>(outer, 0.0, 1.0, 0.5 * tol, 0.1 * tol);

  ComplexIntegralResult r;
  r.value = qi.value + qo.value;
  r.error_estimate = qi.error + qo.error;
  r.samples_or_evals = qi.evals + qo.evals;
  r.converged = qi.converged && qo.converged;
  return r;
}

/// Numeric Mellin transform of a closed-form family, used to validate the
/// Gamma-ratio formulas by quadrature.
inline ComplexIntegralResult numeric_mellin(const MellinClosedForm& fam, Complex z,
                                            double tol = 1e-10) {
  if (fam.kind == MellinFamily::lorentzian) {
    const double b = fam.b;
    return numeric_mellin_split([b](double t) { return std::pow(1.0 + t * t, -b); }, 0.0,
                                [b](double r) { return std::pow(r * r + 1.0, -b); }, 2.0 * b, z,
                                fam.fundamental_strip(), tol);
  }
  const double a = fam.a, b = fam.b, s = fam.s;
  auto reduced = [b, s](double t) { return angular_kernel(0.0, b, s, t); };
  // f(t) = t^a [angular](t); f(1/r) = r^{2s-a} [angular](r) by reflection
  return numeric_mellin_split(reduced, a, reduced, 2.0 * s - a, z, fam.fundamental_strip(),
                              tol);
}

/// Generic-handle variant; `decay` is the power p with f(t) ~ t^{-p} at
/// infinity, so the fold stays finite (pass 0 for compactly bounded data).
inline ComplexIntegralResult numeric_mellin(const std::function<double(double)>& f, Complex z,
                                            std::pair<double, double> strip_hint, double decay,
                                            double tol = 1e-10) {
  return numeric_mellin_split(
      f, 0.0, [&f, decay](double r) { return f(1.0 / r) * std::pow(r, -decay); }, decay, z,
      strip_hint, tol);
}

/// Residue expansion of int_0^inf h(lambda t) f(t) dt across the contour
/// strip r < Re z < r_prime:
///
///   integral = sum over poles z0 of res{ -lambda^{-z} M[h,z] M[f,1-z] }
///              + O(lambda^{-r_prime}).
///
/// Simple-pole calculus gives coefficient -res_h(z0) M[f, 1-z0] at poles of
/// M[h, .], and +M[h, z0] res_f(1-z0) at poles of M[f, 1-.].
struct ParsevalExpansion {
  std::vector<ResidueTerm> leading;
  double remainder_bound_exponent = 0.0;

  double evaluate(double lambda) const {
    double v = 0.0;
    for (const auto& t : leading) v += t.coefficient * std::pow(lambda, t.power_of_lambda);
    return v;
  }
};

inline ParsevalExpansion parseval_expand(const MellinClosedForm& h, const MellinClosedForm& f,
                                         double lambda, double r, double r_prime) {
  if (!(lambda > 1.0)) throw domain_error("parseval_expand: need lambda > 1");
  if (!(r_prime > r)) throw domain_error("parseval_expand: need r' > r");
  const auto hs = h.fundamental_strip();
  const auto fs = f.fundamental_strip();
  // M[f, 1-z] converges for 1 - fs.second < Re z < 1 - fs.first
  const double lo = std::max(hs.first, 1.0 - fs.second);
  const double hi = std::min(hs.second, 1.0 - fs.first);
  if (!(r > lo && r < hi))
    throw domain_error("parseval_expand: r not inside the common fundamental strip");

  constexpr double contour_tol = 1e-9;
  std::vector<ResidueTerm> terms;
  for (double z0 : h.poles_in(r, r_prime)) {
    if (std::abs(z0 - r) < contour_tol || std::abs(z0 - r_prime) < contour_tol)
      throw domain_error("parseval_expand: pole on contour");
    for (double w0 : f.poles_in(1.0 - r_prime, 1.0 - r))
      if (std::abs((1.0 - z0) - w0) < contour_tol)
        throw domain_error("parseval_expand: coincident poles, not simple");
    const double coeff = -h.residue_at(z0) * f.value(Complex(1.0 - z0, 0.0)).real();
    terms.push_back({z0, coeff, -z0});
  }
  for (double w0 : f.poles_in(1.0 - r_prime, 1.0 - r)) {
    const double z0 = 1.0 - w0;
    if (std::abs(z0 - r) < contour_tol || std::abs(z0 - r_prime) < contour_tol)
      throw domain_error("parseval_expand: pole on contour");
    const double res = f.residue_at(w0);
    if (res == 0.0) continue;  // cancelled by a denominator zero
    const double coeff = h.value(Complex(z0, 0.0)).real() * res;
    terms.push_back({z0, coeff, -z0});
  }
  std::sort(terms.begin(), terms.end(),
            [](const ResidueTerm& x, const ResidueTerm& y) { return x.location < y.location; });

  ParsevalExpansion out;
  out.leading = std::move(terms);
  out.remainder_bound_exponent = -r_prime;
  return out;
}

/// Direct quadrature of int_0^inf h(lambda t) f(t) dt; the oracle side of the
/// Parseval checks.
inline IntegralResult mellin_pair_direct(const MellinClosedForm& h, const MellinClosedForm& f,
                                         double lambda, double tol = 1e-11) {
  if (h.kind != MellinFamily::lorentzian || f.kind != MellinFamily::angular)
    throw domain_error("mellin_pair_direct expects a lorentzian h and an angular f");
  // split at the two scales 1/lambda and 1, fold the tail to (0,1]
  auto g = [&](double t) { return h.function_at(lambda * t) * f.function_at(t); };
  // h(lambda/r) f(1/r) / r^2 with all powers of r combined:
  //   lambda^{-2 b_h} r^{2 b_h + 2 s_f - a_f - 2} (1 + r^2/lambda^2)^{-b_h} A(r)
  const double tail_exp = 2.0 * h.b + 2.0 * f.s - f.a - 2.0;
  const double tail_scale = std::pow(lambda, -2.0 * h.b);
  auto g_tail = [&](double r) {
    return tail_scale * std::pow(r, tail_exp) *
           std::pow(1.0 + (r / lambda) * (r / lambda), -h.b) *
           angular_kernel(0.0, f.b, f.s, r);
  };
  auto seg1 = tanh_sinh<double>([&](double t) { return g(t); }, 0.0, 1.0 / lambda, 0.2 * tol,
                                0.1 * tol);
  auto seg2 =
      tanh_sinh<double>([&](double t) { return g(t); }, 1.0 / lambda, 1.0, 0.2 * tol, 0.1 * tol);
  auto seg3 = tanh_sinh<double>(
      [&](double /*r*/, double da, double /*db*/) { return g_tail(da); }, 0.0, 1.0, 0.2 * tol,
      0.1 * tol);

  IntegralResult out;
  out.value = seg1.value + seg2.value + seg3.value;
  out.error_estimate = seg1.error + seg2.error + seg3.error;
  out.samples_or_evals = seg1.evals + seg2.evals + seg3.evals;
  out.converged = seg1.converged && seg2.converged && seg3.converged;
  out.method = Method::adaptive_quadrature;
  return out;
}

}  // namespace kklab
