#include "psvrg/prox.hpp"

#include <cmath>
#include <limits>

#include "psvrg/error.hpp"
#include "psvrg/kernels.hpp"

namespace psvrg {
namespace {

void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError(std::string(what) + " must be a finite nonnegative number");
}

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("vector lengths differ");
}

}  // namespace

DenseVector prox_l1(std::span<const double> y, double t, double l1) {
  return prox_elastic_net(y, t, l1, 0.0);
}

DenseVector prox_sq_l2(std::span<const double> y, double t, double l2) {
  require_nonneg(t, "step");
  require_nonneg(l2, "l2");
  DenseVector out(y.begin(), y.end());
  const double denom = 1.0 + t * l2;
  if (denom != 1.0)
    for (auto& v : out) v /= denom;
  return out;
}

DenseVector prox_elastic_net(std::span<const double> y, double t, double l1, double l2) {
  require_nonneg(t, "step");
  require_nonneg(l1, "l1");
  require_nonneg(l2, "l2");
  DenseVector out(y.size());
  kernels::active().soft_threshold(y.data(), t * l1, 1.0 + t * l2, out.data(), y.size());
  return out;
}

DenseVector prox_box(std::span<const double> y, double t, std::span<const double> lo,
                     std::span<const double> hi) {
  require_nonneg(t, "step");
  require_same_length(y, lo);
  require_same_length(y, hi);
  for (std::size_t j = 0; j < lo.size(); ++j)
    if (lo[j] > hi[j]) throw ArgumentError("box lower bound exceeds upper bound");
  DenseVector out(y.size());
  kernels::active().clamp(y.data(), lo.data(), hi.data(), out.data(), y.size());
  return out;
}

DenseVector prox_eps_shifted(const Regularizer& base, double eps, std::span<const double> y,
                             double eta) {
  if (!(eps > 0.0) || !(eta > 0.0)) throw ArgumentError("eps and eta must be positive");
  const double s = 1.0 + eta * eps;
  DenseVector shifted(y.begin(), y.end());
  for (auto& v : shifted) v /= s;
  base.prox_into(shifted, eta / s, shifted);
  return shifted;
}

void ZeroRegularizer::prox_into(std::span<const double> y, double, std::span<double> out) const {
  require_same_length(y, out);
  if (out.data() != y.data()) std::copy(y.begin(), y.end(), out.begin());
}

ElasticNet::ElasticNet(double l1, double l2) : l1_(l1), l2_(l2) {
  require_nonneg(l1, "l1");
  require_nonneg(l2, "l2");
}

double ElasticNet::value(std::span<const double> x) const {
  double abs_sum = 0.0;
  if (l1_ > 0.0)
    for (double v : x) abs_sum += std::fabs(v);
  return l1_ * abs_sum + (l2_ > 0.0 ? 0.5 * l2_ * kernels::squared_norm(x) : 0.0);
}

void ElasticNet::prox_into(std::span<const double> y, double t, std::span<double> out) const {
  require_same_length(y, out);
  kernels::active().soft_threshold(y.data(), t * l1_, 1.0 + t * l2_, out.data(), y.size());
}

BoxIndicator::BoxIndicator(DenseVector lo, DenseVector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  require_same_length(lo_, hi_);
  for (std::size_t j = 0; j < lo_.size(); ++j)
    if (!(lo_[j] <= hi_[j])) throw ArgumentError("box lower bound exceeds upper bound");
}

BoxIndicator::BoxIndicator(std::size_t dim, double lo, double hi)
    : BoxIndicator(DenseVector(dim, lo), DenseVector(dim, hi)) {}

double BoxIndicator::value(std::span<const double> x) const {
  require_same_length(x, lo_);
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!(x[j] >= lo_[j] && x[j] <= hi_[j])) return std::numeric_limits<double>::infinity();
  return 0.0;
}

void BoxIndicator::prox_into(std::span<const double> y, double, std::span<double> out) const {
  require_same_length(y, lo_);
  require_same_length(y, out);
  kernels::active().clamp(y.data(), lo_.data(), hi_.data(), out.data(), y.size());
}

EpsShifted::EpsShifted(RegularizerPtr base, double eps) : base_(std::move(base)), eps_(eps) {
  if (!base_) throw ArgumentError("null base regularizer");
  if (!(eps_ > 0.0)) throw ArgumentError("eps must be positive");
}

double EpsShifted::value(std::span<const double> x) const {
  const double r = base_->value(x);
  if (r == std::numeric_limits<double>::infinity()) return r;
  return r + 0.5 * eps_ * kernels::squared_norm(x);
}

void EpsShifted::prox_into(std::span<const double> y, double t, std::span<double> out) const {
  require_same_length(y, out);
  const double s = 1.0 + t * eps_;
  for (std::size_t j = 0; j < y.size(); ++j) out[j] = y[j] / s;
  base_->prox_into(out, t / s, out);
}

}  // namespace psvrg
