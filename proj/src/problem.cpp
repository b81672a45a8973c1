#include "psvrg/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "psvrg/error.hpp"
#include "psvrg/kernels.hpp"

namespace psvrg {

CompositeProblem::CompositeProblem(std::vector<ComponentPtr> components,
                                   RegularizerPtr regularizer, std::size_t dimension,
                                   double mu_f, double mu_r, std::vector<double> lipschitz)
    : components_(std::move(components)),
      regularizer_(std::move(regularizer)),
      dimension_(dimension),
      mu_f_(mu_f),
      mu_r_(mu_r),
      lipschitz_(std::move(lipschitz)) {
  if (components_.empty()) throw ArgumentError("problem needs at least one component");
  if (!regularizer_) throw ArgumentError("problem needs a regularizer");
  if (dimension_ == 0) throw ArgumentError("dimension must be positive");
  if (!(mu_f_ >= 0.0) || !(mu_r_ >= 0.0))
    throw ArgumentError("strong convexity moduli must be nonnegative");
  for (const auto& c : components_)
    if (!c) throw ArgumentError("null component");
  if (lipschitz_.empty()) {
    lipschitz_.reserve(components_.size());
    for (const auto& c : components_) lipschitz_.push_back(c->lipschitz_bound());
  } else if (lipschitz_.size() != components_.size()) {
    throw ArgumentError("one Lipschitz constant per component is required");
  }
  double sum = 0.0;
  for (double l : lipschitz_) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ArgumentError("Lipschitz constants must be positive");
    sum += l;
    lipschitz_max_ = std::max(lipschitz_max_, l);
  }
  lipschitz_mean_ = sum / static_cast<double>(lipschitz_.size());
}

const SmoothComponent& CompositeProblem::component(std::size_t i) const {
  if (i >= components_.size())
    throw ArgumentError("component index " + std::to_string(i) + " out of range");
  return *components_[i];
}

CompositeProblem CompositeProblem::with_regularizer(RegularizerPtr regularizer, double mu_r) const {
  return CompositeProblem(components_, std::move(regularizer), dimension_, mu_f_, mu_r, lipschitz_);
}

void CompositeProblem::check_dim(std::span<const double> x) const {
  if (x.size() != dimension_)
    throw ArgumentError("expected a vector of length " + std::to_string(dimension_) + ", got " +
                        std::to_string(x.size()));
}

double CompositeProblem::smooth_value(std::span<const double> x) const {
  check_dim(x);
  double s = 0.0;
  for (const auto& c : components_) s += c->value(x);
  return s / static_cast<double>(components_.size());
}

double CompositeProblem::objective(std::span<const double> x) const {
  check_dim(x);
  const double r = regularizer_->value(x);
  if (r == std::numeric_limits<double>::infinity()) return r;
  return smooth_value(x) + r;
}

void CompositeProblem::full_gradient_into(std::span<const double> x, std::span<double> out) const {
  check_dim(x);
  if (out.size() != dimension_) throw ArgumentError("gradient buffer has wrong length");
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& c : components_) c->add_gradient(x, 1.0, out);
  kernels::scale(1.0 / static_cast<double>(components_.size()), out);
}

DenseVector CompositeProblem::full_gradient(std::span<const double> x) const {
  DenseVector g(dimension_);
  full_gradient_into(x, g);
  return g;
}

DenseVector CompositeProblem::component_gradient(std::size_t i, std::span<const double> x) const {
  check_dim(x);
  return component(i).gradient(x);
}

}  // namespace psvrg
