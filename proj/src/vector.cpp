#include "psvrg/vector.hpp"

#include <cmath>
#include <limits>

#include "psvrg/error.hpp"

namespace psvrg {

SparseVector::SparseVector(std::size_t dim,
                           std::span<const std::pair<std::uint32_t, double>> entries)
    : dim_(dim) {
  indices_.reserve(entries.size());
  values_.reserve(entries.size());
  std::int64_t prev = -1;
  for (const auto& [idx, val] : entries) {
    if (idx >= dim) throw ArgumentError("sparse index out of range");
    if (static_cast<std::int64_t>(idx) <= prev)
      throw ArgumentError("sparse indices must be strictly increasing");
    prev = idx;
    if (!std::isfinite(val)) throw ArgumentError("sparse value is not finite");
    if (val == 0.0) continue;
    indices_.push_back(idx);
    values_.push_back(val);
  }
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  if (dense.size() > std::numeric_limits<std::uint32_t>::max())
    throw ArgumentError("dimension too large for 32-bit sparse indices");
  SparseVector out(dense.size());
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) {
      out.indices_.push_back(static_cast<std::uint32_t>(j));
      out.values_.push_back(dense[j]);
    }
  }
  return out;
}

void SparseVector::set_dim(std::size_t dim) {
  if (dim < dim_) throw ArgumentError("sparse dimension can only grow");
  dim_ = dim;
}

void SparseVector::scale(double factor) {
  if (factor == 0.0) {
    indices_.clear();
    values_.clear();
    return;
  }
  for (auto& v : values_) v *= factor;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

DenseVector SparseVector::to_dense() const {
  DenseVector out(dim_, 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k) out[indices_[k]] = values_[k];
  return out;
}

}  // namespace psvrg
