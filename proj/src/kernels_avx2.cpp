// Compiled with -mavx2 only (no FMA) so elementwise results match the scalar
// reference bit for bit.
#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace psvrg::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(const double* a, std::size_t n) { return dot(a, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void waxpy(double alpha, const double* x, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = y[i] + alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void soft_threshold(const double* y, double threshold, double denom, double* out, std::size_t n) {
  const __m256d sign_bit = _mm256_set1_pd(-0.0);
  const __m256d thr = _mm256_set1_pd(threshold);
  const __m256d den = _mm256_set1_pd(denom);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(y + i);
    const __m256d a = _mm256_andnot_pd(sign_bit, v);
    const __m256d keep = _mm256_cmp_pd(a, thr, _CMP_GT_OQ);
    const __m256d mag = _mm256_div_pd(_mm256_sub_pd(a, thr), den);
    const __m256d signed_mag = _mm256_or_pd(mag, _mm256_and_pd(sign_bit, v));
    _mm256_storeu_pd(out + i, _mm256_and_pd(keep, signed_mag));
  }
  for (; i < n; ++i) {
    const double a = std::fabs(y[i]);
    out[i] = a > threshold ? std::copysign((a - threshold) / denom, y[i]) : 0.0;
  }
}

void clamp(const double* y, const double* lo, const double* hi, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // max/min with the bound as the second operand mirror the scalar comparisons.
    const __m256d v = _mm256_loadu_pd(y + i);
    const __m256d l = _mm256_loadu_pd(lo + i);
    const __m256d h = _mm256_loadu_pd(hi + i);
    const __m256d up = _mm256_blendv_pd(v, l, _mm256_cmp_pd(v, l, _CMP_LT_OQ));
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(up, h, _mm256_cmp_pd(up, h, _CMP_GT_OQ)));
  }
  for (; i < n; ++i) {
    const double v = y[i] < lo[i] ? lo[i] : y[i];
    out[i] = v > hi[i] ? hi[i] : v;
  }
}

double sparse_dot(const std::uint32_t* idx, const double* val, std::size_t nnz, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= nnz; k += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
    const __m256d gathered = _mm256_i32gather_pd(x, vi, 8);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(val + k), gathered));
  }
  double s = hsum(acc);
  for (; k < nnz; ++k) s += val[k] * x[idx[k]];
  return s;
}

// AVX2 has no scatter; the scalar loop is already bandwidth bound here.
void sparse_axpy(double alpha, const std::uint32_t* idx, const double* val, std::size_t nnz,
                 double* y) {
  for (std::size_t k = 0; k < nnz; ++k) y[idx[k]] = y[idx[k]] + alpha * val[k];
}

std::size_t count_nonzero(const double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int eq = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_EQ_OQ));
    c += 4 - static_cast<std::size_t>(__builtin_popcount(eq));
  }
  for (; i < n; ++i) c += (x[i] != 0.0);
  return c;
}

bool all_finite(const double* x, std::size_t n) {
  // x - x is NaN exactly when x is NaN or infinite.
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_or_pd(acc, _mm256_cmp_pd(_mm256_sub_pd(v, v), _mm256_setzero_pd(), _CMP_UNORD_Q));
  }
  if (_mm256_movemask_pd(acc) != 0) return false;
  for (; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

constexpr KernelTable kAvx2{
    "avx2",     dot,   squared_norm, axpy,       waxpy,         scale, soft_threshold,
    clamp,      sparse_dot, sparse_axpy, count_nonzero, all_finite,
};

}  // namespace

const KernelTable& avx2_table() { return kAvx2; }

}  // namespace psvrg::kernels
