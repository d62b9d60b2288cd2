#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "kklab/mellin.hpp"
#include "kklab/constants_region.hpp"
#include "kklab/symbol_integrals.hpp"
#include "oracles.hpp"

using namespace kklab;
using std::numbers::pi;

namespace {

// Poisson closed form: M[f_{0,2,1}, z] = pi / (z (2 - z)) on 0 < Re z < 2
double poisson_mellin(double z) { return pi / (z * (2.0 - z)); }

}  // namespace

TEST_CASE("lorentzian closed form at elementary points") {
  auto h1 = MellinClosedForm::lorentzian(1.0);
  CHECK(h1.value(Complex(1.0, 0.0)).real() == doctest::Approx(0.5 * pi).epsilon(1e-14));
  CHECK(mellin_lorentzian(1.0, Complex(1.0, 0.0)).real() ==
        doctest::Approx(0.5 * pi).epsilon(1e-14));
  CHECK(mellin_angular(0.0, 2.0, 1.0, Complex(1.0, 0.0)).real() ==
        doctest::Approx(pi).epsilon(1e-13));
  auto h74 = MellinClosedForm::lorentzian(1.75);
  CHECK(h74.value(Complex(3.0, 0.0)).real() == doctest::Approx(1.7479).epsilon(1e-4));
  CHECK(h74.value(Complex(3.0, 0.0)).real() ==
        doctest::Approx(gamma_real(1.5) * gamma_real(0.25) / (2.0 * gamma_real(1.75)))
            .epsilon(1e-14));
}

TEST_CASE("lorentzian residue at the first pole is -1, analytically and numerically") {
  oracle::Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const double b = rng.uniform(0.3, 4.0);
    auto h = MellinClosedForm::lorentzian(b);
    CHECK(h.residue_at(2.0 * b) == doctest::Approx(-1.0).epsilon(1e-12));
    // contour-free limit (z - z0) M(z)
    const double eps = 1e-7;
    const Complex z0(2.0 * b, 0.0);
    const Complex probe = (Complex(eps, 0.0)) * h.value(z0 + Complex(eps, 0.0));
    CHECK(probe.real() == doctest::Approx(-1.0).epsilon(1e-5));
  }
}

TEST_CASE("angular closed form reproduces the Poisson kernel values") {
  auto f = MellinClosedForm::angular(0.0, 2.0, 1.0);
  for (double z : {0.25, 0.5, 1.0, 1.5, 1.9}) {
    CHECK(f.value(Complex(z, 0.0)).real() == doctest::Approx(poisson_mellin(z)).epsilon(1e-13));
  }
  CHECK(f.fundamental_strip().first == doctest::Approx(0.0));
  CHECK(f.fundamental_strip().second == doctest::Approx(2.0));
}

TEST_CASE("numeric Mellin agrees with closed forms inside the strips") {
  // lorentzian grid
  oracle::Rng rng(11);
  for (int i = 0; i < 12; ++i) {
    const double b = rng.uniform(0.4, 3.0);
    auto h = MellinClosedForm::lorentzian(b);
    const Complex z(rng.uniform(0.1, 2.0 * b - 0.1), rng.uniform(-1.5, 1.5));
    const auto num = numeric_mellin(h, z, 1e-10);
    REQUIRE(num.converged);
    CHECK(std::abs(num.value - h.value(z)) <= 1e-7 * std::abs(h.value(z)));
  }
  // angular family at the parameters the expansion uses
  for (auto [a, b, s] : {std::array<double, 3>{4.0, 3.0, 1.25},
                         std::array<double, 3>{4.0, 5.0, 2.25},
                         std::array<double, 3>{0.0, 2.0, 1.0}}) {
    auto f = MellinClosedForm::angular(a, b, s);
    const auto strip = f.fundamental_strip();
    for (int i = 0; i < 4; ++i) {
      const double re = strip.first + (strip.second - strip.first) * (i + 1) / 5.0;
      const Complex z(re, (i % 2 == 0) ? 0.0 : 0.7);
      const auto num = numeric_mellin(f, z, 1e-9);
      REQUIRE(num.converged);
      CHECK(std::abs(num.value - f.value(z)) <= 1e-7 * std::abs(f.value(z)));
    }
  }
}

TEST_CASE("generic integrand handle: Poisson kernel as a plain function") {
  auto f = [](double t) { return 0.5 * pi * std::min(1.0, 1.0 / (t * t)); };
  const auto num = numeric_mellin(f, Complex(1.0, 0.0), {0.0, 2.0}, 2.0, 1e-10);
  CHECK(num.converged);
  CHECK(num.value.real() == doctest::Approx(pi).epsilon(1e-8));
  CHECK_THROWS_AS(numeric_mellin(f, Complex(2.5, 0.0), {0.0, 2.0}, 2.0), domain_error);
}

TEST_CASE("pole locations of the angular transform sit on the stated lattice") {
  const double a = 4.0, b = 3.0, s = 1.25;
  auto f = MellinClosedForm::angular(a, b, s);
  // probe |M| near candidate points: huge on the pole lattice, modest off it
  for (int n = 0; n < 3; ++n) {
    const double up = 2.0 * s - a + 2.0 * n;
    const double dn = -a - 2.0 * n;
    for (double z0 : {up, dn}) {
      const double near = std::abs(f.value(Complex(z0 + 1e-8, 0.0)));
      const double off = std::abs(f.value(Complex(z0 + 0.5, 1.0)));
      CHECK(near > 1e5 * off);
    }
  }
  const auto poles = f.poles_in(-9.0, 2.0 * s - a + 5.0);
  for (double z0 : poles) {
    const bool upper = std::abs(std::remainder(z0 - (2.0 * s - a), 2.0)) < 1e-9 &&
                       z0 >= 2.0 * s - a - 1e-9;
    const bool lower =
        std::abs(std::remainder(z0 + a, 2.0)) < 1e-9 && z0 <= -a + 1e-9;
    CHECK((upper || lower));
  }
}

TEST_CASE("parseval expansion of the stretching integral, d=3 s=1.25 alpha=0.25") {
  const double d = 3.0, s = 1.25, alpha = 0.25;
  auto h = MellinClosedForm::lorentzian(0.5 * d + alpha);
  auto f = MellinClosedForm::angular(d + 1.0, d, s);
  const double r = d + 2.0 - 2.0 * s + 0.1;       // inside (d+2-2s, d+2 alpha)
  const double rp = d + 2.0 + 2.0 * alpha - 0.3;  // inside (d+2, d+2+2 alpha)
  auto two_terms = parseval_expand(h, f, 32.0, r, rp);

  REQUIRE(two_terms.leading.size() == 2);
  CHECK(two_terms.leading[0].location == doctest::Approx(d + 2.0 * alpha).epsilon(1e-12));
  CHECK(two_terms.leading[0].power_of_lambda == doctest::Approx(-(d + 2.0 * alpha)));
  // leading coefficient = M[f_{d+1,d,s}, 1-d-2 alpha]
  CHECK(two_terms.leading[0].coefficient ==
        doctest::Approx(f.value(Complex(1.0 - d - 2.0 * alpha, 0.0)).real()).epsilon(1e-12));
  CHECK(two_terms.leading[1].location == doctest::Approx(d + 2.0));
  CHECK(two_terms.remainder_bound_exponent == doctest::Approx(-rp));

  // remainder bound K lambda^{-r'} with a stable fitted K across the grid
  double k_fitted = -1.0;
  for (double lam : {8.0, 16.0, 32.0, 64.0}) {
    const auto direct = mellin_pair_direct(h, f, lam, 1e-12);
    REQUIRE(direct.converged);
    const double resid = std::abs(direct.value - two_terms.evaluate(lam));
    const double k_here = resid * std::pow(lam, rp);
    if (k_fitted < 0.0) {
      k_fitted = k_here;
    } else {
      CHECK(k_here < 10.0 * k_fitted + 1e-10);
      CHECK(k_here > 0.1 * k_fitted - 1e-10);
    }
  }

  // widening the contour past the poles at d+2a+2 and d+4 reaches 1e-4
  // relative agreement with direct quadrature at lambda = 32
  auto four_terms = parseval_expand(h, f, 32.0, r, 7.2);
  REQUIRE(four_terms.leading.size() == 4);
  for (double lam : {16.0, 32.0, 64.0}) {
    const auto direct = mellin_pair_direct(h, f, lam, 1e-12);
    const double resid = std::abs(direct.value - four_terms.evaluate(lam));
    CHECK(resid <= 1e-4 * std::abs(direct.value) + 1e-14);
  }
}

TEST_CASE("the expansion coefficients recombine into c_str and c_mix") {
  for (auto [dd, s, alpha] : {std::array<double, 3>{3.0, 1.25, 0.25},
                              std::array<double, 3>{4.0, 1.6, 0.3},
                              std::array<double, 3>{3.0, 1.4, 0.2}}) {
    const int d = static_cast<int>(dd);
    const ModelParams p{d, s, alpha};
    const auto ac = asymptotic_constants(p);
    auto f_str = MellinClosedForm::angular(d + 1.0, d, s);
    const double pref = detail::sphere_prefactor_str(d);
    const double cstr = pref * f_str.value(Complex(1.0 - d - 2.0 * alpha, 0.0)).real();
    CHECK(std::abs(cstr - ac.c_str) <= 1e-10 * std::abs(ac.c_str));

    auto f_mix = MellinClosedForm::angular(d + 1.0, d + 2.0, s + 1.0);
    const double cmix = pref * (2.0 * s / (d + 1.0)) *
                        f_mix.value(Complex(1.0 - d - 2.0 * alpha, 0.0)).real();
    CHECK(std::abs(cmix - ac.c_mix) <= 1e-10 * std::abs(ac.c_mix));
  }
}

TEST_CASE("parseval guards: contour and strip misuse") {
  auto h = MellinClosedForm::lorentzian(1.75);
  auto f = MellinClosedForm::angular(4.0, 3.0, 1.25);
  CHECK_THROWS_AS(parseval_expand(h, f, 32.0, 3.5, 5.2), domain_error);  // pole on r
  CHECK_THROWS_AS(parseval_expand(h, f, 32.0, 0.5, 5.2), domain_error);  // r outside strip
  CHECK_THROWS_AS(parseval_expand(h, f, 0.5, 2.6, 5.2), domain_error);   // lambda <= 1
}
