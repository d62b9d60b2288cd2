#pragma once

#include <complex>
#include <cstddef>

namespace kklab {

enum class Method { adaptive_quadrature, monte_carlo };

/// A numeric integral value with an absolute error estimate.  Monte Carlo
/// results carry a batched standard error; quadrature results carry the
/// accumulated panel estimate.  `converged = false` flags stalled refinement
/// or exploding batch variance instead of silently returning garbage.
struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  Method method = Method::adaptive_quadrature;
  std::size_t samples_or_evals = 0;
  bool converged = true;
};

/// Same contract for complex-valued integrals (numeric Mellin transforms).
struct ComplexIntegralResult {
  std::complex<double> value{};
  double error_estimate = 0.0;
  Method method = Method::adaptive_quadrature;
  std::size_t samples_or_evals = 0;
  bool converged = true;
};

}  // namespace kklab
