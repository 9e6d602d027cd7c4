#include "sapgan/kernels/kernels.hpp"

namespace sapgan::kernels {
namespace {

template <class T>
void axpy_ref(std::size_t n, T a, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class T>
T dot_ref(std::size_t n, const T* x, const T* y) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <class T>
void gemm_nn_ref(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      T av = a[i * k + p];
      if (av == T{0}) continue;
      axpy_ref(n, av, b + p * n, crow);
    }
  }
}

template <class T>
void gemm_nt_ref(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot_ref(k, a + i * k, b + j * k);
}

template <class T>
void gemm_tn_ref(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const T* arow = a + p * m;
    const T* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      if (arow[i] == T{0}) continue;
      axpy_ref(n, arow[i], brow, c + i * n);
    }
  }
}

template <class T>
constexpr KernelTable<T> kScalar{Isa::scalar, axpy_ref<T>, dot_ref<T>, gemm_nn_ref<T>, gemm_nt_ref<T>,
                                 gemm_tn_ref<T>};

}  // namespace

template <class T>
const KernelTable<T>& scalar_table() {
  return kScalar<T>;
}

template const KernelTable<float>& scalar_table<float>();
template const KernelTable<double>& scalar_table<double>();

}  // namespace sapgan::kernels
