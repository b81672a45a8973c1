#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

#include "psvrg/regularizer.hpp"
#include "psvrg/vector.hpp"

namespace psvrg {

/// One smooth term f_i of F(x) = (1/n) sum_i f_i(x).
class SmoothComponent {
 public:
  virtual ~SmoothComponent() = default;

  virtual double value(std::span<const double> x) const = 0;

  /// out += scale * grad f_i(x)
  virtual void add_gradient(std::span<const double> x, double scale,
                            std::span<double> out) const = 0;

  /// out += scale * (grad f_i(x) - grad f_i(y)); adds exactly zero when x == y.
  virtual void add_gradient_difference(std::span<const double> x, std::span<const double> y,
                                       double scale, std::span<double> out) const {
    if (std::equal(x.begin(), x.end(), y.begin(), y.end())) return;
    add_gradient(x, scale, out);
    add_gradient(y, -scale, out);
  }

  /// Lipschitz constant of the gradient.
  virtual double lipschitz_bound() const = 0;

  DenseVector gradient(std::span<const double> x) const {
    DenseVector g(x.size(), 0.0);
    add_gradient(x, 1.0, g);
    return g;
  }
};

using ComponentPtr = std::shared_ptr<const SmoothComponent>;

/// P(x) = F(x) + R(x). Immutable after construction, so one instance may be
/// shared by concurrent solver runs.
class CompositeProblem {
 public:
  /// `mu_f` and `mu_r` are caller-declared strong convexity moduli of F and R.
  /// `lipschitz` overrides the per-component bounds when non-empty.
  CompositeProblem(std::vector<ComponentPtr> components, RegularizerPtr regularizer,
                   std::size_t dimension, double mu_f, double mu_r,
                   std::vector<double> lipschitz = {});

  std::size_t size() const noexcept { return components_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const SmoothComponent& component(std::size_t i) const;
  const Regularizer& regularizer() const noexcept { return *regularizer_; }
  const RegularizerPtr& regularizer_ptr() const noexcept { return regularizer_; }
  const std::vector<ComponentPtr>& components() const noexcept { return components_; }

  std::span<const double> lipschitz() const noexcept { return lipschitz_; }
  double lipschitz_max() const noexcept { return lipschitz_max_; }
  /// (1/n) sum L_i, the usable bound on the Lipschitz constant of grad F.
  double lipschitz_mean() const noexcept { return lipschitz_mean_; }
  double mu_f() const noexcept { return mu_f_; }
  double mu_r() const noexcept { return mu_r_; }
  /// mu_F + mu_R, the strong convexity guaranteed by the declared moduli.
  double mu() const noexcept { return mu_f_ + mu_r_; }

  /// Same components and data, different regularizer.
  CompositeProblem with_regularizer(RegularizerPtr regularizer, double mu_r) const;

  double smooth_value(std::span<const double> x) const;
  /// P(x); +infinity when x is outside dom(R).
  double objective(std::span<const double> x) const;
  DenseVector full_gradient(std::span<const double> x) const;
  /// Writes grad F(x) into out, summing components left to right.
  void full_gradient_into(std::span<const double> x, std::span<double> out) const;
  DenseVector component_gradient(std::size_t i, std::span<const double> x) const;

 private:
  void check_dim(std::span<const double> x) const;

  std::vector<ComponentPtr> components_;
  RegularizerPtr regularizer_;
  std::size_t dimension_;
  double mu_f_;
  double mu_r_;
  std::vector<double> lipschitz_;
  double lipschitz_max_ = 0.0;
  double lipschitz_mean_ = 0.0;
};

}  // namespace psvrg
