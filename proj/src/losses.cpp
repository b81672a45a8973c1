#include "psvrg/losses.hpp"

#include <cmath>
#include <memory>

#include "psvrg/error.hpp"
#include "psvrg/kernels.hpp"
#include "psvrg/prox.hpp"

namespace psvrg {
namespace {

// log(1 + exp(u)) without overflow.
double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double with_floor(double l) { return l > 0.0 ? l : kZeroRowLipschitzFloor; }

}  // namespace

LinearModelComponent::LinearModelComponent(SparseVector features, double label, double l2,
                                           SplittingMode mode)
    : features_(std::move(features)), label_(label), l2_(mode == SplittingMode::L2InSmooth ? l2 : 0.0) {
  if (!(l2 >= 0.0)) throw ArgumentError("l2 must be nonnegative");
  if (!std::isfinite(label)) throw ArgumentError("label must be finite");
}

double LinearModelComponent::value(std::span<const double> x) const {
  if (x.size() < features_.dim()) throw ArgumentError("point shorter than feature dimension");
  const auto idx = features_.indices();
  const auto val = features_.values();
  const double t = kernels::active().sparse_dot(idx.data(), val.data(), idx.size(), x.data());
  double v = link_value(t);
  if (l2_ > 0.0) v += 0.5 * l2_ * kernels::squared_norm(x);
  return v;
}

void LinearModelComponent::add_gradient(std::span<const double> x, double scale,
                                        std::span<double> out) const {
  if (x.size() < features_.dim() || out.size() != x.size())
    throw ArgumentError("gradient arguments have mismatched lengths");
  const auto& k = kernels::active();
  const auto idx = features_.indices();
  const auto val = features_.values();
  const double t = k.sparse_dot(idx.data(), val.data(), idx.size(), x.data());
  k.sparse_axpy(scale * link_derivative(t), idx.data(), val.data(), idx.size(), out.data());
  if (l2_ > 0.0) k.axpy(scale * l2_, x.data(), out.data(), x.size());
}

void LinearModelComponent::add_gradient_difference(std::span<const double> x,
                                                   std::span<const double> y, double scale,
                                                   std::span<double> out) const {
  if (x.size() < features_.dim() || y.size() != x.size() || out.size() != x.size())
    throw ArgumentError("gradient arguments have mismatched lengths");
  const auto& k = kernels::active();
  const auto idx = features_.indices();
  const auto val = features_.values();
  const double tx = k.sparse_dot(idx.data(), val.data(), idx.size(), x.data());
  const double ty = k.sparse_dot(idx.data(), val.data(), idx.size(), y.data());
  const double coef = link_derivative(tx) - link_derivative(ty);
  if (coef != 0.0) k.sparse_axpy(scale * coef, idx.data(), val.data(), idx.size(), out.data());
  if (l2_ > 0.0)
    for (std::size_t j = 0; j < x.size(); ++j) out[j] += scale * l2_ * (x[j] - y[j]);
}

LogisticComponent::LogisticComponent(SparseVector features, double label, double l2,
                                     SplittingMode mode)
    : LinearModelComponent(std::move(features), label, l2, mode) {
  if (label != 1.0 && label != -1.0) throw ArgumentError("logistic labels must be +1 or -1");
  lipschitz_ = with_floor(features_.squared_norm() / 4.0 + l2_);
}

double LogisticComponent::link_value(double t) const { return softplus(-label_ * t); }

double LogisticComponent::link_derivative(double t) const {
  return -label_ * sigmoid(-label_ * t);
}

LeastSquaresComponent::LeastSquaresComponent(SparseVector features, double label, double l2,
                                             SplittingMode mode)
    : LinearModelComponent(std::move(features), label, l2, mode) {
  lipschitz_ = with_floor(features_.squared_norm() + l2_);
}

double LeastSquaresComponent::link_value(double t) const {
  const double r = t - label_;
  return 0.5 * r * r;
}

double LeastSquaresComponent::link_derivative(double t) const { return t - label_; }

ComponentPtr logistic_component(const Example& example, double l2, SplittingMode mode) {
  return std::make_shared<LogisticComponent>(example.features, example.label, l2, mode);
}

ComponentPtr least_squares_component(const Example& example, double l2, SplittingMode mode) {
  return std::make_shared<LeastSquaresComponent>(example.features, example.label, l2, mode);
}

CompositeProblem make_erm_problem(std::span<const Example> examples, std::size_t dimension,
                                  LossKind loss, double l1, double l2, SplittingMode mode) {
  if (!(l1 >= 0.0) || !(l2 >= 0.0)) throw ArgumentError("regularization weights must be nonnegative");
  std::vector<ComponentPtr> components;
  components.reserve(examples.size());
  for (const auto& ex : examples) {
    if (ex.features.dim() > dimension) throw ArgumentError("example dimension exceeds problem dimension");
    components.push_back(loss == LossKind::Logistic ? logistic_component(ex, l2, mode)
                                                    : least_squares_component(ex, l2, mode));
  }
  const bool in_reg = mode == SplittingMode::L2InReg;
  auto reg = std::make_shared<ElasticNet>(l1, in_reg ? l2 : 0.0);
  return CompositeProblem(std::move(components), std::move(reg), dimension, in_reg ? 0.0 : l2,
                          in_reg ? l2 : 0.0);
}

}  // namespace psvrg
