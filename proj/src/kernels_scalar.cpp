#include <cmath>

#include "psvrg/kernels.hpp"

namespace psvrg::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(const double* a, std::size_t n) { return dot(a, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void waxpy(double alpha, const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void soft_threshold(const double* y, double threshold, double denom, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(y[i]);
    out[i] = a > threshold ? std::copysign((a - threshold) / denom, y[i]) : 0.0;
  }
}

void clamp(const double* y, const double* lo, const double* hi, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = y[i] < lo[i] ? lo[i] : y[i];
    out[i] = v > hi[i] ? hi[i] : v;
  }
}

double sparse_dot(const std::uint32_t* idx, const double* val, std::size_t nnz, const double* x) {
  double s = 0.0;
  for (std::size_t k = 0; k < nnz; ++k) s += val[k] * x[idx[k]];
  return s;
}

void sparse_axpy(double alpha, const std::uint32_t* idx, const double* val, std::size_t nnz,
                 double* y) {
  for (std::size_t k = 0; k < nnz; ++k) y[idx[k]] = y[idx[k]] + alpha * val[k];
}

std::size_t count_nonzero(const double* x, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += (x[i] != 0.0);
  return c;
}

bool all_finite(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

constexpr KernelTable kScalar{
    "scalar",   dot,   squared_norm, axpy,       waxpy,         scale, soft_threshold,
    clamp,      sparse_dot, sparse_axpy, count_nonzero, all_finite,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace psvrg::kernels
