#include <gtest/gtest.h>

#include <cmath>

#include "sapgan/eval/ttest.hpp"
#include "sapgan/tensor/rng.hpp"
#include "ttest_oracle.hpp"

using namespace sapgan::eval;

TEST(TTest, HandAlgebraCase) {
  // means 4 and 3, both sample variances 4, pooled 4, se = sqrt(4·2/3), t = sqrt(3/8)
  const std::vector<double> a{2, 4, 6}, b{1, 3, 5};
  const auto r = t_test_two_tailed(a, b);
  EXPECT_NEAR(r.t, std::sqrt(3.0 / 8.0), 1e-15);
  EXPECT_EQ(r.df, 4.0);
  const auto o = oracle::student_t(a, b);
  EXPECT_NEAR(r.p, o.p.convert_to<double>(), 1e-12);
  EXPECT_NEAR(r.p, 0.573, 5e-4);
}

TEST(TTest, AgreesWithHighPrecisionOracle) {
  sapgan::Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(2 + rng.below(30)), b(2 + rng.below(30));
    const double shift = rng.uniform(-2, 2), spread = rng.uniform(0.1, 3);
    for (auto& v : a) v = rng.normal() * spread;
    for (auto& v : b) v = rng.normal() * spread + shift;
    const auto r = t_test_two_tailed(a, b);
    const auto o = oracle::student_t(a, b);
    EXPECT_NEAR(r.t, o.t.convert_to<double>(), 1e-9 * std::max(1.0, std::abs(r.t)));
    EXPECT_NEAR(r.p, o.p.convert_to<double>(), 1e-9) << "trial " << trial;
    EXPECT_GT(r.p, 0.0);
    EXPECT_LE(r.p, 1.0);
  }
}

TEST(TTest, TailsAndLargeDegreesOfFreedom) {
  for (double t : {0.0, 0.1, 1.0, 2.5, 6.0, 15.0}) {
    for (double df : {1.0, 2.0, 7.0, 30.0, 500.0}) {
      boost::math::students_t_distribution<oracle::hp> dist{oracle::hp(df)};
      const double ref = (2 * boost::math::cdf(boost::math::complement(dist, oracle::hp(t)))).convert_to<double>();
      const double got = student_t_two_tailed_p(t, df);
      EXPECT_NEAR(got, ref, 1e-10 + 1e-8 * ref) << "t=" << t << " df=" << df;
      EXPECT_EQ(student_t_two_tailed_p(-t, df), got);
    }
  }
}

TEST(TTest, SymmetryShiftAndScale) {
  const std::vector<double> a{1.5, 2.0, 4.25, 3.0}, b{0.5, 1.0, 2.5};
  const auto ab = t_test_two_tailed(a, b), ba = t_test_two_tailed(b, a);
  EXPECT_DOUBLE_EQ(ab.t, -ba.t);
  EXPECT_DOUBLE_EQ(ab.p, ba.p);

  std::vector<double> as = a, bs = b;
  for (auto& v : as) v = 3.5 * v;
  for (auto& v : bs) v = 3.5 * v;
  EXPECT_NEAR(t_test_two_tailed(as, bs).t, ab.t, 1e-12);

  for (auto& v : as) v = v / 3.5 + 10;
  for (auto& v : bs) v = v / 3.5 + 10;
  EXPECT_NEAR(t_test_two_tailed(as, bs).t, ab.t, 1e-12);
}

TEST(TTest, DegenerateInputs) {
  const std::vector<double> a{1, 2, 3};
  const auto same = t_test_two_tailed(a, a);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);

  const std::vector<double> c{2, 2}, d{2, 2, 2}, e{5, 5};
  const auto flat = t_test_two_tailed(c, d);
  EXPECT_EQ(flat.t, 0.0);
  EXPECT_EQ(flat.p, 1.0);
  EXPECT_THROW(t_test_two_tailed(c, e), std::domain_error);
  EXPECT_THROW(t_test_two_tailed(std::vector<double>{1}, a), std::invalid_argument);
}

TEST(IncompleteBeta, KnownValues) {
  EXPECT_NEAR(regularized_incomplete_beta(1, 1, 0.3), 0.3, 1e-14);
  EXPECT_NEAR(regularized_incomplete_beta(2, 3, 0.4), 0.5248, 1e-12);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 1.0), 1.0);
}
