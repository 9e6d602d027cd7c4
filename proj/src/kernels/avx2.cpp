// Compiled with -mavx2 -mfma. Only reached after a runtime cpuid check.

#include <immintrin.h>

#include "sapgan/kernels/kernels.hpp"

namespace sapgan::kernels::avx2 {
namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d high64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
}

inline void axpy_f32(std::size_t n, float a, const float* x, float* y) {
  std::size_t i = 0;
  __m256 va = _mm256_set1_ps(a);
  for (; i + 16 <= n; i += 16) {
    __m256 y0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
    __m256 y1 = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8));
    _mm256_storeu_ps(y + i, y0);
    _mm256_storeu_ps(y + i + 8, y1);
  }
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

inline float dot_f32(std::size_t n, const float* x, const float* y) {
  std::size_t i = 0;
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
  float acc = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

inline void axpy_f64(std::size_t n, double a, const double* x, double* y) {
  std::size_t i = 0;
  __m256d va = _mm256_set1_pd(a);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

inline double dot_f64(std::size_t n, const double* x, const double* y) {
  std::size_t i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <class T>
struct Prim;
template <>
struct Prim<float> {
  static void axpy(std::size_t n, float a, const float* x, float* y) { axpy_f32(n, a, x, y); }
  static float dot(std::size_t n, const float* x, const float* y) { return dot_f32(n, x, y); }
};
template <>
struct Prim<double> {
  static void axpy(std::size_t n, double a, const double* x, double* y) { axpy_f64(n, a, x, y); }
  static double dot(std::size_t n, const double* x, const double* y) { return dot_f64(n, x, y); }
};

template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      T av = a[i * k + p];
      if (av == T{0}) continue;
      Prim<T>::axpy(n, av, b + p * n, crow);
    }
  }
}

template <class T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += Prim<T>::dot(k, a + i * k, b + j * k);
}

template <class T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const T* arow = a + p * m;
    const T* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      if (arow[i] == T{0}) continue;
      Prim<T>::axpy(n, arow[i], brow, c + i * n);
    }
  }
}

}  // namespace

extern const KernelTable<float> kTableF32{Isa::avx2, Prim<float>::axpy, Prim<float>::dot, gemm_nn<float>,
                                   gemm_nt<float>, gemm_tn<float>};
extern const KernelTable<double> kTableF64{Isa::avx2, Prim<double>::axpy, Prim<double>::dot, gemm_nn<double>,
                                    gemm_nt<double>, gemm_tn<double>};

}  // namespace sapgan::kernels::avx2
