#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "kklab/errors.hpp"

namespace kklab {

/// Ordinary least squares of log y against log x.
struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;  // log-prefactor
  double prefactor() const { return std::exp(intercept); }
};

inline PowerLawFit fit_powerlaw(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw domain_error("fit_powerlaw: need matching samples, at least two");
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw domain_error("fit_powerlaw: data must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  PowerLawFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace kklab
