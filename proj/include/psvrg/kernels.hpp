#pragma once

// Dense and sparse arithmetic kernels used by every inner loop.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active table is chosen once at first use from the CPU's
// capabilities; PSVRG_KERNELS=scalar in the environment forces the reference
// path. Elementwise kernels round identically in both paths. Reductions
// (dot, squared norm, sparse dot) use a different but fixed summation order
// per ISA, so results are deterministic for a given ISA.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace psvrg::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_norm)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = y + alpha * x
  void (*waxpy)(double alpha, const double* x, const double* y, double* out, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
  // out = sign(y) * max(|y| - threshold, 0) / denom, with +0 below threshold
  void (*soft_threshold)(const double* y, double threshold, double denom, double* out,
                         std::size_t n);
  void (*clamp)(const double* y, const double* lo, const double* hi, double* out, std::size_t n);
  double (*sparse_dot)(const std::uint32_t* idx, const double* val, std::size_t nnz,
                       const double* x);
  void (*sparse_axpy)(double alpha, const std::uint32_t* idx, const double* val, std::size_t nnz,
                      double* y);
  std::size_t (*count_nonzero)(const double* x, std::size_t n);
  bool (*all_finite)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();
bool isa_supported(Isa isa);
const KernelTable& table_for(Isa isa);
std::vector<Isa> supported_isas();

/// Active table. Switching is meant for tests and benchmarks; it is not
/// synchronized with concurrent solver runs.
const KernelTable& active();
Isa active_isa();
void set_active_isa(Isa isa);
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double squared_norm(std::span<const double> a) {
  return active().squared_norm(a.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void waxpy(double alpha, std::span<const double> x, std::span<const double> y,
                  std::span<double> out) {
  active().waxpy(alpha, x.data(), y.data(), out.data(), x.size());
}
inline void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }
inline std::size_t count_nonzero(std::span<const double> x) {
  return active().count_nonzero(x.data(), x.size());
}
inline bool all_finite(std::span<const double> x) {
  return active().all_finite(x.data(), x.size());
}

}  // namespace psvrg::kernels
