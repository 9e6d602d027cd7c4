#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "sapgan/errors.hpp"
#include "sapgan/tensor/ops.hpp"

using namespace sapgan;

namespace {

Tensor vec(std::vector<float> v, bool grad = false) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v), grad);
}

}  // namespace

TEST(Tensor, ShapeAndNumel) {
  auto t = Tensor::zeros({2, 3, 4});
  EXPECT_EQ(t.numel(), 24u);
  EXPECT_EQ(numel({2, 3, 4}), 24u);
  EXPECT_EQ(to_string(t.shape()), "[2x3x4]");
  EXPECT_THROW(Tensor({2, 2}, std::vector<float>(3)), ShapeError);
}

TEST(Backward, LinearAndSquare) {
  auto x = Tensor::scalar(2.0f, true);
  backward(ops::scale(x, 3.0f));
  EXPECT_FLOAT_EQ(x.grad()[0], 3.0f);

  auto y = Tensor::scalar(3.0f, true);
  backward(ops::square(y));
  EXPECT_FLOAT_EQ(y.grad()[0], 6.0f);
}

TEST(Backward, RejectsNonScalarLoss) {
  auto x = vec({1, 2}, true);
  EXPECT_THROW(backward(ops::scale(x, 2.0f)), ShapeError);
}

TEST(Backward, UnreachableParameterGetsZeroGrad) {
  auto a = vec({1, 2}, true);
  auto b = vec({3, 4}, true);
  b.zero_grad();
  backward(ops::sum(a));
  ASSERT_TRUE(b.has_grad());
  EXPECT_EQ(b.grad()[0], 0.0f);
  EXPECT_EQ(b.grad()[1], 0.0f);
}

TEST(Backward, SharedSubexpressionAccumulates) {
  // f = sum(x*x + x) with x reused: df/dx = 2x + 1.
  auto x = vec({1, -2, 0.5f}, true);
  backward(ops::sum(ops::add(ops::mul(x, x), x)));
  EXPECT_FLOAT_EQ(x.grad()[0], 3.0f);
  EXPECT_FLOAT_EQ(x.grad()[1], -3.0f);
  EXPECT_FLOAT_EQ(x.grad()[2], 2.0f);
}

TEST(Backward, TapeVisitsEachNodeOnce) {
  auto x = vec({1, 2}, true);
  auto h = ops::square(x);
  auto loss = ops::sum(ops::add(h, h));
  const auto tape = Tape<float>::record(loss);
  std::set<const void*> seen;
  for (auto* n : tape.nodes()) EXPECT_TRUE(seen.insert(n).second);
  // x, square, add, sum
  EXPECT_EQ(tape.size(), 4u);
  // Inputs precede their consumers.
  std::map<const void*, std::size_t> pos;
  for (std::size_t i = 0; i < tape.nodes().size(); ++i) pos[tape.nodes()[i]] = i;
  for (auto* n : tape.nodes())
    for (auto& in : n->inputs) EXPECT_LT(pos[in.get()], pos[n]);
}

TEST(Backward, NoGradGuardRecordsNothing) {
  auto x = vec({1, 2}, true);
  Tensor y;
  {
    NoGradGuard g;
    y = ops::square(x);
  }
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(y.node()->inputs.empty());
}

TEST(Backward, NonFiniteGradientIsReported) {
  // A custom op whose backward rule emits NaN must abort the pass.
  auto x = vec({1, 2}, true);
  auto bad = make_result<float>(x.shape(), {x.data().begin(), x.data().end()}, {x}, "broken",
                                [](detail::Node<float>& self) {
                                  auto& g = self.inputs[0]->ensure_grad();
                                  g[0] += std::numeric_limits<float>::quiet_NaN();
                                });
  EXPECT_THROW(backward(ops::sum(bad)), NumericError);
}

TEST(Elementwise, BroadcastScalarOperand) {
  auto a = vec({1, 2, 3}, true);
  auto b = Tensor::scalar(2.0f, true);
  auto y = ops::mul(a, b);
  EXPECT_EQ(std::vector<float>(y.data().begin(), y.data().end()), (std::vector<float>{2, 4, 6}));
  backward(ops::sum(y));
  EXPECT_FLOAT_EQ(b.grad()[0], 6.0f);
  EXPECT_FLOAT_EQ(a.grad()[1], 2.0f);
  EXPECT_THROW(ops::add(a, vec({1, 2})), ShapeError);
}

TEST(Activation, Definitions) {
  EXPECT_FLOAT_EQ(ops::leaky_relu(vec({-1.0f})).data()[0], -0.2f);
  EXPECT_FLOAT_EQ(ops::tanh(vec({0.0f})).data()[0], 0.0f);
  EXPECT_FLOAT_EQ(ops::sigmoid(vec({0.0f})).data()[0], 0.5f);
  EXPECT_FLOAT_EQ(ops::relu(vec({-3.0f, 4.0f})).data()[1], 4.0f);
  EXPECT_FLOAT_EQ(ops::activation(vec({-2.0f}), ops::Activation::leaky_relu, 0.1f).data()[0], -0.2f);
  const auto t = ops::tanh(vec({-50, -1, 1, 50}));
  for (float v : t.data()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
  const auto s = ops::sigmoid(vec({-30, 30}));
  for (float v : s.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Loss, ClosedForms) {
  auto x = vec({0.3f, -1.2f});
  EXPECT_EQ(ops::l1_loss(x, x).item(), 0.0f);
  EXPECT_FLOAT_EQ(ops::mse_loss(vec({0, 2}), vec({0, 0})).item(), 2.0f);
  EXPECT_NEAR(ops::bce_with_logits(vec({0.0f}), vec({0.5f})).item(), std::log(2.0), 1e-6);
  EXPECT_NEAR(ops::bce_with_logits(vec({0.0f, 0.0f}), 1.0f).item(), std::log(2.0), 1e-6);
  EXPECT_THROW(ops::l1_loss(vec({1, 2}), vec({1, 2, 3})), ShapeError);
}

TEST(Loss, BceMatchesOracleAndIsStableForLargeLogits) {
  const std::vector<double> z{-40, -3, -0.5, 0, 0.5, 3, 40};
  Tensor64 t({z.size()}, z);
  for (double y : {0.0, 0.3, 1.0}) {
    const double got = ops::bce_with_logits(t, y).item();
    EXPECT_NEAR(got, oracle::bce_logits(z, y), 1e-12);
    EXPECT_TRUE(std::isfinite(got));
  }
}

TEST(Loss, TargetsReceiveNoGradient) {
  auto logits = vec({0.2f, -0.7f}, true);
  auto targets = vec({1.0f, 0.0f}, true);
  backward(ops::bce_with_logits(logits, targets));
  EXPECT_TRUE(!targets.has_grad() || (targets.grad()[0] == 0 && targets.grad()[1] == 0));
  // d/dz mean(softplus(z) - y z) = (sigmoid(z) - y)/n
  EXPECT_NEAR(logits.grad()[0], (1 / (1 + std::exp(-0.2)) - 1) / 2, 1e-6);
}

TEST(Layout, ReshapeAndConcat) {
  Rng rng(3);
  auto a = Tensor::randn({2, 1, 2, 2}, rng, 1.0f, true);
  auto b = Tensor::randn({2, 3, 2, 2}, rng, 1.0f, true);
  auto c = ops::concat_channels(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 4, 2, 2}));
  // Sample 1, channel 0 comes from a; channels 1..3 from b.
  EXPECT_EQ(c.data()[16], a.data()[4]);
  EXPECT_EQ(c.data()[16 + 4], b.data()[12]);
  backward(ops::sum(ops::mul(c, c)));
  EXPECT_FLOAT_EQ(a.grad()[4], 2 * a.data()[4]);
  EXPECT_FLOAT_EQ(b.grad()[12], 2 * b.data()[12]);
  EXPECT_THROW(ops::reshape(a, {3, 3}), ShapeError);
  EXPECT_THROW(ops::concat_channels(a, Tensor::zeros({1, 1, 2, 2})), ShapeError);
}

TEST(Linear, MatchesHandComputation) {
  auto x = Tensor({2, 3}, {1, 2, 3, 4, 5, 6});
  auto w = Tensor({2, 3}, {1, 0, -1, 0.5f, 0.5f, 0.5f});
  auto b = std::optional<Tensor>(Tensor({2}, {10, 20}));
  auto y = ops::linear(x, w, b);
  ASSERT_EQ(y.shape(), (Shape{2, 2}));
  EXPECT_FLOAT_EQ(y.data()[0], 1 - 3 + 10);
  EXPECT_FLOAT_EQ(y.data()[1], 3 + 20);
  EXPECT_FLOAT_EQ(y.data()[2], 4 - 6 + 10);
  EXPECT_FLOAT_EQ(y.data()[3], 7.5f + 20);
}

TEST(BatchNorm, ConstantChannelsGiveZeros) {
  auto x = Tensor::full({2, 3, 4, 4}, 5.0f);
  auto gamma = Tensor::full({3}, 1.0f);
  auto beta = Tensor::zeros({3});
  ops::RunningStats<float> stats(3);
  auto y = ops::batch_norm2d(x, gamma, beta, stats, {});
  for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(BatchNorm, TrainingOutputIsStandardized) {
  Rng rng(8);
  auto x = Tensor::randn({4, 3, 8, 8}, rng, 3.0f);
  for (auto& v : x.data_mut()) v += 2.0f;
  auto gamma = Tensor::full({3}, 1.0f);
  auto beta = Tensor::zeros({3});
  ops::RunningStats<float> stats(3);
  auto y = ops::batch_norm2d(x, gamma, beta, stats, {});
  const std::size_t hw = 64, per = 4 * hw;
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0, xm = 0, xv = 0;
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < hw; ++i) {
        m += y.data()[(n * 3 + c) * hw + i];
        xm += x.data()[(n * 3 + c) * hw + i];
      }
    m /= per;
    xm /= per;
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < hw; ++i) {
        v += std::pow(y.data()[(n * 3 + c) * hw + i] - m, 2);
        xv += std::pow(x.data()[(n * 3 + c) * hw + i] - xm, 2);
      }
    EXPECT_LT(std::abs(m), 1e-5);
    EXPECT_NEAR(v / per, 1.0, 1e-3);
    // Running stats: momentum 0.1 from (0, 1), unbiased batch variance.
    EXPECT_NEAR(stats.mean[c], 0.1 * xm, 1e-5);
    EXPECT_NEAR(stats.var[c], 0.9 + 0.1 * xv / (per - 1), 1e-4);
  }
}

TEST(BatchNorm, GammaZeroYieldsBetaAndEvalUsesRunningStats) {
  Rng rng(9);
  auto x = Tensor::randn({2, 2, 3, 3}, rng);
  auto gamma = Tensor::zeros({2});
  auto beta = Tensor({2}, {0.25f, -1.5f});
  ops::RunningStats<float> stats(2);
  auto y = ops::batch_norm2d(x, gamma, beta, stats, {});
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_EQ(y.data()[i], (i / 9) % 2 == 0 ? 0.25f : -1.5f);

  ops::RunningStats<float> fixed(2);
  fixed.mean = {1.0f, -1.0f};
  fixed.var = {4.0f, 0.25f};
  auto ones = Tensor::full({2}, 1.0f);
  auto zeros = Tensor::zeros({2});
  auto e = ops::batch_norm2d(x, ones, zeros, fixed, {false, 1e-5, 0.1});
  EXPECT_NEAR(e.data()[0], (x.data()[0] - 1.0f) / std::sqrt(4.0f + 1e-5f), 1e-6);
  EXPECT_NEAR(e.data()[9], (x.data()[9] + 1.0f) / std::sqrt(0.25f + 1e-5f), 1e-5);
  EXPECT_EQ(fixed.mean[0], 1.0f);  // eval leaves stats alone
}

TEST(Dropout, ScalesKeptUnitsAndIsIdentityInEval) {
  Rng rng(10);
  auto x = Tensor::full({1000}, 1.0f);
  auto y = ops::dropout(x, 0.5, true, rng);
  std::size_t kept = 0;
  for (float v : y.data()) {
    EXPECT_TRUE(v == 0.0f || v == 2.0f);
    kept += v != 0.0f;
  }
  EXPECT_GT(kept, 400u);
  EXPECT_LT(kept, 600u);
  auto e = ops::dropout(x, 0.5, false, rng);
  EXPECT_EQ(e.node(), x.node());
  EXPECT_THROW(ops::dropout(x, 1.0, true, rng), std::invalid_argument);
}

TEST(Rng, DeterministicAndSplittable) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng s1 = Rng(42).split("gen"), s2 = Rng(42).split("gen"), s3 = Rng(42).split("disc");
  EXPECT_EQ(s1.next_u64(), s2.next_u64());
  EXPECT_NE(Rng(42).split("gen").next_u64(), s3.next_u64());
  EXPECT_NE(Rng(1).split(std::uint64_t{0}).next_u64(), Rng(1).split(std::uint64_t{1}).next_u64());

  Rng r(7);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7), 7u);
  }
}

TEST(Tensor, SameSeedSameForward) {
  Rng r1(99), r2(99);
  auto a = Tensor::randn({3, 4}, r1);
  auto b = Tensor::randn({3, 4}, r2);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}
