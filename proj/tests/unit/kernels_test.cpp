#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sapgan/kernels/kernels.hpp"
#include "sapgan/tensor/rng.hpp"

using namespace sapgan;
using kernels::Isa;
using kernels::KernelTable;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
  return v;
}

template <class T>
T tol() {
  return std::is_same_v<T, float> ? T(2e-5) : T(1e-12);
}

template <class T>
void expect_close(const std::vector<T>& a, const std::vector<T>& b, T scale) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], tol<T>() * scale) << "index " << i;
}

template <class T>
class KernelEquivalence : public ::testing::Test {};
using Scalars = ::testing::Types<float, double>;
TYPED_TEST_SUITE(KernelEquivalence, Scalars);

TYPED_TEST(KernelEquivalence, AvxMatchesScalarReference) {
  using T = TypeParam;
  const KernelTable<T>* fast = kernels::avx2_table<T>();
  if (!fast) GTEST_SKIP() << "AVX2 table unavailable on this host";
  const KernelTable<T>& ref = kernels::scalar_table<T>();
  EXPECT_EQ(ref.isa, Isa::scalar);
  EXPECT_EQ(fast->isa, Isa::avx2);

  Rng rng(11);
  // Sizes straddle the vector width so both the SIMD body and the tails run.
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 100u, 257u}) {
    auto x = random_vec<T>(n, rng);
    auto y0 = random_vec<T>(n, rng);
    auto y1 = y0;
    ref.axpy(n, T(0.37), x.data(), y0.data());
    fast->axpy(n, T(0.37), x.data(), y1.data());
    expect_close(y0, y1, T(1));
    EXPECT_NEAR(ref.dot(n, x.data(), y0.data()), fast->dot(n, x.data(), y0.data()), tol<T>() * (n + 1));
  }

  for (auto [m, n, k] : std::vector<std::array<std::size_t, 3>>{
           {1, 1, 1}, {3, 5, 7}, {8, 8, 8}, {9, 17, 4}, {16, 33, 25}, {2, 64, 48}, {13, 1, 70}}) {
    const auto a = random_vec<T>(m * k, rng);
    const auto b = random_vec<T>(k * n, rng);
    const auto bt = random_vec<T>(n * k, rng);
    const auto at = random_vec<T>(k * m, rng);
    const auto c = random_vec<T>(m * n, rng);
    auto c0 = c, c1 = c;
    ref.gemm_nn(m, n, k, a.data(), b.data(), c0.data());
    fast->gemm_nn(m, n, k, a.data(), b.data(), c1.data());
    expect_close(c0, c1, T(k));
    c0 = c1 = c;
    ref.gemm_nt(m, n, k, a.data(), bt.data(), c0.data());
    fast->gemm_nt(m, n, k, a.data(), bt.data(), c1.data());
    expect_close(c0, c1, T(k));
    c0 = c1 = c;
    ref.gemm_tn(m, n, k, at.data(), b.data(), c0.data());
    fast->gemm_tn(m, n, k, at.data(), b.data(), c1.data());
    expect_close(c0, c1, T(k));
  }
}

TYPED_TEST(KernelEquivalence, ScalarGemmMatchesTripleLoop) {
  using T = TypeParam;
  const auto& ref = kernels::scalar_table<T>();
  Rng rng(5);
  const std::size_t m = 4, n = 6, k = 5;
  const auto a = random_vec<T>(m * k, rng);
  const auto b = random_vec<T>(k * n, rng);
  std::vector<T> c(m * n, T(1));
  ref.gemm_nn(m, n, k, a.data(), b.data(), c.data());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 1;
      for (std::size_t p = 0; p < k; ++p) s += double(a[i * k + p]) * double(b[p * n + j]);
      EXPECT_NEAR(c[i * n + j], s, tol<T>() * k);
    }
}

}  // namespace

TEST(KernelDispatch, ForceIsaSwitchesActiveTable) {
  const Isa before = kernels::active_isa();
  kernels::force_isa(Isa::scalar);
  EXPECT_EQ(kernels::active_isa(), Isa::scalar);
  EXPECT_EQ(&kernels::active<float>(), &kernels::scalar_table<float>());
  if (kernels::avx2_table<float>()) {
    kernels::force_isa(Isa::avx2);
    EXPECT_EQ(kernels::active<double>().isa, Isa::avx2);
  } else {
    EXPECT_THROW(kernels::force_isa(Isa::avx2), std::exception);
  }
  kernels::force_isa(before);
}

TEST(KernelDispatch, WrappersUseActiveTable) {
  std::vector<float> x{1, 2, 3}, y{1, 1, 1};
  kernels::axpy<float>(2.0f, x, y);
  EXPECT_EQ(y, (std::vector<float>{3, 5, 7}));
  EXPECT_FLOAT_EQ(kernels::dot<float>(x, y), 3 + 10 + 21);
}
