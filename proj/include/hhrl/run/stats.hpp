#pragma once

#include <cstddef>
#include <span>

namespace hhrl {

struct CorrelationResult {
  double rho = 0.0;
  // One-sided p-value for rho > 0 (Student-t approximation, n - 2 dof).
  double p_greater = 1.0;
  std::size_t n = 0;
};

// Spearman rank correlation; tied values receive their average rank.
// Requires x and y of equal length >= 3. A constant input yields rho = 0.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

// One-sided sign test: P(X >= successes) for X ~ Binomial(trials, 1/2).
double sign_test_p(std::size_t successes, std::size_t trials);

// Ordinary least squares slope of y on x. Requires at least two distinct x.
double regression_slope(std::span<const double> x, std::span<const double> y);

}  // namespace hhrl
