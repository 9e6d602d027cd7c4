#pragma once

// Dense inner-loop kernels used by the tensor core.
//
// Every kernel exists as a scalar reference implementation and, on x86-64
// builds, an AVX2+FMA variant. The active table is chosen once at startup
// from cpuid; SAPGAN_ISA=scalar in the environment forces the reference path.
// Matrices are row-major with explicit leading dimensions equal to their
// column count; all gemm variants accumulate into C.

#include <cstddef>
#include <span>
#include <string_view>

namespace sapgan::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

template <class T>
struct KernelTable {
  Isa isa;
  // y += a * x
  void (*axpy)(std::size_t n, T a, const T* x, T* y);
  // sum_i x[i] * y[i]
  T (*dot)(std::size_t n, const T* x, const T* y);
  // C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
};

template <class T>
const KernelTable<T>& scalar_table();

/// Returns nullptr when the AVX2 table was not compiled in or the CPU lacks AVX2/FMA.
template <class T>
const KernelTable<T>* avx2_table();

/// The table selected for this process.
template <class T>
const KernelTable<T>& active();

Isa active_isa();

/// Test hook: pins the active table. Throws if the ISA is unavailable.
void force_isa(Isa isa);

// Convenience wrappers over the active table.
template <class T>
inline void axpy(T a, std::span<const T> x, std::span<T> y) {
  active<T>().axpy(x.size(), a, x.data(), y.data());
}

template <class T>
inline T dot(std::span<const T> x, std::span<const T> y) {
  return active<T>().dot(x.size(), x.data(), y.data());
}

}  // namespace sapgan::kernels
