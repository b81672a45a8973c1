#pragma once

#include <span>

#include "psvrg/regularizer.hpp"
#include "psvrg/vector.hpp"

namespace psvrg {

// Closed-form proximal mappings. All throw ArgumentError on negative steps or
// weights and on mismatched lengths.

/// Soft-threshold: sign(y_j) * max(|y_j| - t*l1, 0). Ties map to exactly 0.
DenseVector prox_l1(std::span<const double> y, double t, double l1);
/// y / (1 + t*l2)
DenseVector prox_sq_l2(std::span<const double> y, double t, double l2);
/// prox_l1(y, t, l1) / (1 + t*l2)
DenseVector prox_elastic_net(std::span<const double> y, double t, double l1, double l2);
/// Componentwise clamp. Independent of t, since the indicator is scale free.
DenseVector prox_box(std::span<const double> y, double t, std::span<const double> lo,
                     std::span<const double> hi);
/// prox of (eps/2)||x||^2 + R(x) with step eta:
///   base.prox(y / (1 + eta*eps), eta / (1 + eta*eps)).
DenseVector prox_eps_shifted(const Regularizer& base, double eps, std::span<const double> y,
                             double eta);

class ZeroRegularizer final : public Regularizer {
 public:
  double value(std::span<const double>) const override { return 0.0; }
  void prox_into(std::span<const double> y, double t, std::span<double> out) const override;
  double mu() const override { return 0.0; }
};

/// l1 * ||x||_1 + (l2/2) * ||x||^2. Covers lasso (l2 = 0) and ridge (l1 = 0).
class ElasticNet final : public Regularizer {
 public:
  ElasticNet(double l1, double l2);
  double value(std::span<const double> x) const override;
  void prox_into(std::span<const double> y, double t, std::span<double> out) const override;
  double mu() const override { return l2_; }
  double l1() const noexcept { return l1_; }
  double l2() const noexcept { return l2_; }

 private:
  double l1_;
  double l2_;
};

/// Indicator of the box [lo, hi].
class BoxIndicator final : public Regularizer {
 public:
  BoxIndicator(DenseVector lo, DenseVector hi);
  BoxIndicator(std::size_t dim, double lo, double hi);
  double value(std::span<const double> x) const override;
  void prox_into(std::span<const double> y, double t, std::span<double> out) const override;
  double mu() const override { return 0.0; }
  std::span<const double> lo() const noexcept { return lo_; }
  std::span<const double> hi() const noexcept { return hi_; }

 private:
  DenseVector lo_;
  DenseVector hi_;
};

/// R_eps(x) = (eps/2)||x||^2 + R(x) for the non-strongly-convex reduction.
class EpsShifted final : public Regularizer {
 public:
  EpsShifted(RegularizerPtr base, double eps);
  double value(std::span<const double> x) const override;
  void prox_into(std::span<const double> y, double t, std::span<double> out) const override;
  double mu() const override { return base_->mu() + eps_; }
  const Regularizer& base() const noexcept { return *base_; }
  double eps() const noexcept { return eps_; }

 private:
  RegularizerPtr base_;
  double eps_;
};

}  // namespace psvrg
