#include "sapgan/eval/ttest.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sapgan::eval {

namespace {

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 1000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) return h;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw std::domain_error("incomplete beta needs a, b > 0");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0)) throw std::domain_error("t distribution needs df > 0");
  if (std::isinf(t)) return std::numeric_limits<double>::min();
  const double x = df / (df + t * t);
  const double p = regularized_incomplete_beta(df / 2.0, 0.5, x);
  // Keep p inside (0, 1] even when it underflows.
  if (p < std::numeric_limits<double>::min()) return std::numeric_limits<double>::min();
  return p > 1.0 ? 1.0 : p;
}

TTestResult t_test_two_tailed(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("t-test needs at least 2 values per group, got " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()));
  auto moments = [](std::span<const double> v, long double& mean, long double& ss) {
    mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<long double>(v.size());
    ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
  };
  long double ma, sa, mb, sb;
  moments(a, ma, sa);
  moments(b, mb, sb);
  TTestResult r;
  r.df = static_cast<double>(a.size() + b.size() - 2);
  const long double pooled = (sa + sb) / r.df;
  const long double diff = ma - mb;
  if (pooled == 0) {
    if (diff == 0) return {0.0, r.df, 1.0};
    throw std::domain_error("t-test degenerate: zero pooled variance with unequal means");
  }
  const long double se =
      std::sqrt(pooled * (1.0L / static_cast<long double>(a.size()) + 1.0L / static_cast<long double>(b.size())));
  r.t = static_cast<double>(diff / se);
  r.p = student_t_two_tailed_p(r.t, r.df);
  return r;
}

}  // namespace sapgan::eval
