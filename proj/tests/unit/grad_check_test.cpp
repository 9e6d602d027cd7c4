#include <gtest/gtest.h>

#include "grad_suite.hpp"
#include "sapgan/tensor/grad_check.hpp"

using namespace sapgan;

class GradSuite : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradSuite, AnalyticMatchesCentralDifference) {
  static const auto all = gradsuite::cases();
  const auto& c = all.at(GetParam());
  const auto r = c.run();
  EXPECT_GT(r.checked, 0u);
  EXPECT_LT(r.max_rel_error, 1e-3) << c.name << ": worst " << r.worst_param << "[" << r.worst_index
                                   << "] analytic " << r.analytic << " numeric " << r.numeric;
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradSuite, ::testing::Range<std::size_t>(0, gradsuite::cases().size()),
                         [](const auto& info) {
                           std::string n = gradsuite::cases()[info.param].name;
                           for (auto& ch : n)
                             if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                           return n;
                         });

TEST(GradCheck, LinearFunctionIsNearlyExact) {
  Rng rng(1);
  auto a = Tensor64::randn({8}, rng, 1.0, true);
  auto w = Tensor64::randn({8}, rng);
  ParamList<double> params{{"a", a}};
  const auto r = grad_check<double>([&] { return ops::sum(ops::mul(a, w)); }, params, 1e-6);
  EXPECT_LT(r.max_rel_error, 1e-6);
  EXPECT_EQ(r.checked, 8u);
}

TEST(GradCheck, DetectsCorruptedBackwardRule) {
  // A square op whose rule forgets the factor 2 must be flagged.
  Rng rng(2);
  auto a = Tensor64::randn({5}, rng, 1.0, true);
  auto broken_square = [](const Tensor64& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * x.data()[i];
    return make_result<double>(x.shape(), std::move(out), {x}, "broken_square", [](detail::Node<double>& self) {
      auto& in = *self.inputs[0];
      auto& g = in.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * in.data[i];
    });
  };
  ParamList<double> params{{"a", a}};
  const auto r = grad_check<double>([&] { return ops::sum(broken_square(a)); }, params, 1e-6);
  EXPECT_GT(r.max_rel_error, 0.1);
  EXPECT_EQ(r.worst_param, "a");
}

TEST(GradCheck, SubsamplesLargeParameters) {
  Rng rng(3);
  auto a = Tensor64::randn({100}, rng, 1.0, true);
  ParamList<double> params{{"a", a}};
  const auto r = grad_check<double>([&] { return ops::sum(ops::square(a)); }, params, 1e-6, 10);
  EXPECT_EQ(r.checked, 10u);
  EXPECT_LT(r.max_rel_error, 1e-6);
}
