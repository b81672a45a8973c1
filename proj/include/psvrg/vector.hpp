#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace psvrg {

using DenseVector = std::vector<double>;

/// Sparse vector with strictly increasing indices and no stored zeros.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  /// Builds from (index, value) pairs. Pairs must have strictly increasing
  /// indices below `dim`; zero values are dropped.
  SparseVector(std::size_t dim, std::span<const std::pair<std::uint32_t, double>> entries);

  static SparseVector from_dense(std::span<const double> dense);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return indices_.size(); }
  std::span<const std::uint32_t> indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Raises the dimension; lowering it is rejected.
  void set_dim(std::size_t dim);
  void scale(double factor);
  double squared_norm() const;
  DenseVector to_dense() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

}  // namespace psvrg
