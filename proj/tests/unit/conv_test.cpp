#include <gtest/gtest.h>

#include "adjoint.hpp"
#include "oracles.hpp"
#include "sapgan/errors.hpp"
#include "sapgan/tensor/ops.hpp"

using namespace sapgan;

namespace {

std::vector<double> as_double(std::span<const float> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Conv2d, AllOnesKernelCountsWindow) {
  auto x = Tensor::full({1, 1, 4, 4}, 1.0f);
  auto w = Tensor::full({1, 1, 2, 2}, 1.0f);
  auto y = ops::conv2d(x, w, std::nullopt, {1, 0});
  ASSERT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
  for (float v : y.data()) EXPECT_EQ(v, 4.0f);

  // With padding the corners only see one tap.
  auto p = ops::conv2d(x, w, std::nullopt, {1, 1});
  ASSERT_EQ(p.shape(), (Shape{1, 1, 5, 5}));
  EXPECT_EQ(p.data()[0], 1.0f);
  EXPECT_EQ(p.data()[2], 2.0f);
  EXPECT_EQ(p.data()[12], 4.0f);
}

TEST(Conv2d, ZeroInputYieldsBias) {
  auto x = Tensor::zeros({2, 3, 5, 5});
  Rng rng(1);
  auto w = Tensor::randn({4, 3, 3, 3}, rng);
  auto b = Tensor({4}, {0.5f, -1, 2, 0});
  auto y = ops::conv2d(x, w, b, {2, 1});
  ASSERT_EQ(y.shape(), (Shape{2, 4, 3, 3}));
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_EQ(y.data()[i], b.data()[(i / 9) % 4]);
}

TEST(Conv2d, MatchesNestedLoopOracle) {
  Rng rng(2);
  for (auto d : {oracle::ConvDims{2, 3, 7, 7, 4, 3, 1, 1}, oracle::ConvDims{1, 2, 8, 8, 3, 4, 2, 1},
                 oracle::ConvDims{3, 1, 6, 5, 2, 2, 3, 0}, oracle::ConvDims{1, 5, 4, 4, 1, 4, 1, 0}}) {
    auto x = Tensor::randn({d.n, d.cin, d.h, d.w}, rng);
    auto w = Tensor::randn({d.cout, d.cin, d.k, d.k}, rng);
    auto y = ops::conv2d(x, w, std::nullopt, {d.stride, d.pad});
    const auto ref = oracle::conv2d(d, as_double(x.data()), as_double(w.data()));
    ASSERT_EQ(y.shape(), (Shape{d.n, d.cout, d.out_h(), d.out_w()}));
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(y.data()[i], ref[i], 1e-5) << i;
  }
}

TEST(Conv2d, RejectsChannelMismatch) {
  auto x = Tensor::zeros({1, 3, 4, 4});
  auto w = Tensor::zeros({2, 2, 3, 3});
  try {
    ops::conv2d(x, w, std::nullopt, {1, 1});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("3 channels"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ops::conv2d(Tensor::zeros({1, 2, 2, 2}), Tensor::zeros({1, 2, 3, 3}), std::nullopt, {1, 0}),
               ShapeError);
  EXPECT_THROW(ops::conv2d(Tensor::zeros({1, 2, 4, 4}), w, Tensor::zeros({3}), {1, 0}), ShapeError);
}

TEST(ConvTranspose2d, DoublesSpatialSize) {
  Rng rng(3);
  auto x = Tensor::randn({1, 2, 2, 2}, rng);
  auto w = Tensor::randn({2, 3, 4, 4}, rng);
  auto y = ops::conv_transpose2d(x, w, std::nullopt, {2, 1});
  EXPECT_EQ(y.shape(), (Shape{1, 3, 4, 4}));
}

TEST(ConvTranspose2d, MatchesScatterOracle) {
  Rng rng(4);
  for (auto d : {oracle::ConvDims{2, 3, 3, 3, 2, 4, 2, 1}, oracle::ConvDims{1, 2, 4, 5, 3, 3, 1, 1},
                 oracle::ConvDims{1, 1, 2, 3, 2, 3, 3, 0}}) {
    auto x = Tensor::randn({d.n, d.cin, d.h, d.w}, rng);
    auto w = Tensor::randn({d.cin, d.cout, d.k, d.k}, rng);
    auto b = Tensor::randn({d.cout}, rng);
    auto y = ops::conv_transpose2d(x, w, b, {d.stride, d.pad});
    const auto ref = oracle::conv_transpose2d(d, as_double(x.data()), as_double(w.data()));
    const std::size_t plane = y.dim(2) * y.dim(3);
    ASSERT_EQ(y.numel(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
      ASSERT_NEAR(y.data()[i], ref[i] + b.data()[(i / plane) % d.cout], 1e-5) << i;
  }
}

TEST(ConvTranspose2d, ZeroInputYieldsBias) {
  auto x = Tensor::zeros({1, 2, 3, 3});
  auto w = Tensor::full({2, 2, 4, 4}, 1.0f);
  auto b = Tensor({2}, {1.5f, -0.5f});
  auto y = ops::conv_transpose2d(x, w, b, {2, 1});
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_EQ(y.data()[i], i < 36 ? 1.5f : -0.5f);
}

TEST(ConvTranspose2d, IsAdjointOfConv2d) {
  const auto rep = adjoint::run(100, 77);
  EXPECT_EQ(rep.configs, 100u);
  EXPECT_LT(rep.max_rel_error, 1e-4) << rep.worst;
}

TEST(Conv2d, BackwardMatchesAdjointForInputGradient) {
  // d<conv(x,w), y>/dx is conv_transpose(y, w).
  Rng rng(6);
  auto x = Tensor::randn({1, 2, 6, 6}, rng, 1.0f, true);
  auto w = Tensor::randn({3, 2, 4, 4}, rng);
  auto y = Tensor::randn({1, 3, 3, 3}, rng);
  backward(ops::sum(ops::mul(ops::conv2d(x, w, std::nullopt, {2, 1}), y)));
  auto t = ops::conv_transpose2d(y, w, std::nullopt, {2, 1});
  ASSERT_EQ(t.numel(), x.numel());
  for (std::size_t i = 0; i < t.numel(); ++i) EXPECT_NEAR(x.grad()[i], t.data()[i], 1e-5);
}
