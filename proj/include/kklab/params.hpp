#pragma once

#include <cmath>
#include <string>

#include "kklab/errors.hpp"

namespace kklab {

/// The model triple (d, s, alpha): spatial dimension, Sobolev index of the
/// H^{-s} norm under study, and the spatial roughness exponent of the noise.
struct ModelParams {
  int d = 3;
  double s = 1.25;
  double alpha = 0.25;
};

/// Where a parameter point sits relative to the admissible ellipse.
enum class Admissibility { inside, boundary, outside };

inline void require_dimension(int d) {
  if (d < 2) throw domain_error("dimension d must be >= 2");
}

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("alpha must satisfy 0 < alpha < 1");
}

/// 0 < s < d/2, required whenever s indexes a homogeneous Sobolev norm.
inline void require_sobolev_index(const ModelParams& p) {
  if (!(p.s > 0.0 && p.s < 0.5 * p.d)) throw domain_error("s must satisfy 0 < s < d/2");
}

/// s + alpha > 1, required before Gamma(s + alpha - 1) enters any constant.
inline void require_gamma_window(const ModelParams& p) {
  if (!(p.s + p.alpha > 1.0)) throw domain_error("s + alpha must exceed 1");
}

inline void validate_basic(const ModelParams& p) {
  require_dimension(p.d);
  require_alpha(p.alpha);
  require_sobolev_index(p);
}

}  // namespace kklab
