#pragma once

#include <stdexcept>
#include <string>

namespace kklab {

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
 public:
  explicit domain_error(const std::string& msg) : std::domain_error(msg) {}
};

/// Evaluation requested at (or too close to) a pole.
class pole_error : public domain_error {
 public:
  explicit pole_error(const std::string& msg) : domain_error(msg) {}
};

/// An integral that provably diverges for the given parameters.
class divergence_error : public domain_error {
 public:
  explicit divergence_error(const std::string& msg) : domain_error(msg) {}
};

/// Adaptive refinement stalled before reaching the requested tolerance.
class nonconvergence_error : public std::runtime_error {
 public:
  explicit nonconvergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kklab
