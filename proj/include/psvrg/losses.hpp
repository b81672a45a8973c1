#pragma once

#include <span>
#include <vector>

#include "psvrg/problem.hpp"
#include "psvrg/vector.hpp"

namespace psvrg {

struct Example {
  SparseVector features;
  double label = 0.0;
};

/// Where the ridge term (l2/2)||x||^2 lives.
enum class SplittingMode {
  L2InSmooth,  ///< added to every f_i; R = l1 * ||x||_1
  L2InReg,     ///< kept in R = l1 * ||x||_1 + (l2/2)||x||^2
};

enum class LossKind { Logistic, LeastSquares };

/// f(x) = phi(a^T x) + [L2InSmooth] (l2/2)||x||^2 for a linear predictor.
class LinearModelComponent : public SmoothComponent {
 public:
  LinearModelComponent(SparseVector features, double label, double l2, SplittingMode mode);

  const SparseVector& features() const noexcept { return features_; }
  double label() const noexcept { return label_; }
  double l2_in_smooth() const noexcept { return l2_; }

  double value(std::span<const double> x) const override;
  void add_gradient(std::span<const double> x, double scale, std::span<double> out) const override;
  void add_gradient_difference(std::span<const double> x, std::span<const double> y, double scale,
                               std::span<double> out) const override;

 protected:
  virtual double link_value(double margin) const = 0;
  virtual double link_derivative(double margin) const = 0;

  SparseVector features_;
  double label_;
  double l2_;
};

/// log(1 + exp(-b a^T x)); L = ||a||^2 / 4 (+ l2).
class LogisticComponent final : public LinearModelComponent {
 public:
  LogisticComponent(SparseVector features, double label, double l2, SplittingMode mode);
  double lipschitz_bound() const override { return lipschitz_; }

 protected:
  double link_value(double margin) const override;
  double link_derivative(double margin) const override;

 private:
  double lipschitz_;
};

/// (1/2)(a^T x - b)^2; L = ||a||^2 (+ l2).
class LeastSquaresComponent final : public LinearModelComponent {
 public:
  LeastSquaresComponent(SparseVector features, double label, double l2, SplittingMode mode);
  double lipschitz_bound() const override { return lipschitz_; }

 protected:
  double link_value(double margin) const override;
  double link_derivative(double margin) const override;

 private:
  double lipschitz_;
};

/// Lipschitz bound assigned to components whose feature row is all zero, so
/// that Lipschitz-weighted sampling stays well defined.
inline constexpr double kZeroRowLipschitzFloor = 1e-12;

ComponentPtr logistic_component(const Example& example, double l2, SplittingMode mode);
ComponentPtr least_squares_component(const Example& example, double l2, SplittingMode mode);

/// Regularized ERM problem: loss over all examples plus l1/l2 placed per `mode`.
/// Declares (mu_F, mu_R) = (l2, 0) for L2InSmooth and (0, l2) for L2InReg.
CompositeProblem make_erm_problem(std::span<const Example> examples, std::size_t dimension,
                                  LossKind loss, double l1, double l2, SplittingMode mode);

}  // namespace psvrg
