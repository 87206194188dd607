#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace betasplit {

/// Standard normal cdf via erfc (absolute error well below 1e-15).
double normal_cdf(double z);

struct TestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of `observed` counts against `probs` (same
/// indexing). Adjacent bins are pooled until each expected count is >= 5.
TestResult chi_square_gof(std::span<const std::int64_t> observed, std::span<const double> probs);

/// Two-sample chi-square for binned counts with possibly unequal totals.
/// Adjacent bins are pooled until each pooled bin holds >= 10 observations.
TestResult chi_square_two_sample(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

/// Two-sample Kolmogorov-Smirnov with the asymptotic p-value.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS statistic of (values - mu)/sigma against N(0,1).
/// Throws DomainError for an empty sample or sigma <= 0.
double ks_normal(std::span<const double> values, double mu, double sigma);

/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

}  // namespace betasplit
