#pragma once

#include <memory>
#include <span>

#include "psvrg/vector.hpp"

namespace psvrg {

/// Closed convex regularizer R with a cheap proximal mapping
///   prox(y, t) = argmin_x { 0.5 * ||x - y||^2 + t * R(x) }.
class Regularizer {
 public:
  virtual ~Regularizer() = default;

  /// Extended value: +infinity outside dom(R).
  virtual double value(std::span<const double> x) const = 0;

  /// Writes prox(y, t) into `out` (same length as y; may alias y).
  virtual void prox_into(std::span<const double> y, double t, std::span<double> out) const = 0;

  /// Strong convexity modulus of R.
  virtual double mu() const = 0;

  DenseVector prox(std::span<const double> y, double t) const {
    DenseVector out(y.size());
    prox_into(y, t, out);
    return out;
  }
};

using RegularizerPtr = std::shared_ptr<const Regularizer>;

}  // namespace psvrg
