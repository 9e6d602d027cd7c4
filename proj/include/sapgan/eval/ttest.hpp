#pragma once

#include <span>

namespace sapgan::eval {

struct TTestResult {
  double t = 0;
  double df = 0;
  double p = 1;  // two-tailed
};

/// Student two-sample t-test with pooled variance (equal-variance form).
/// Requires |a|, |b| >= 2. Zero pooled variance: equal means give t = 0, p = 1;
/// unequal means throw std::domain_error.
TTestResult t_test_two_tailed(std::span<const double> a, std::span<const double> b);

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_tailed_p(double t, double df);

/// I_x(a, b) via the Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace sapgan::eval
