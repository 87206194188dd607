#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "betasplit/variant.hpp"

namespace betasplit {

enum class TableMode {
  naive,  ///< direct O(N^2) recurrence with compensated inner sums
  fast    ///< divide-and-conquer FFT convolution, O(N log^2 N)
};

/// Size guards for the exact tables.
struct EngineLimits {
  std::int64_t pmf_max_n = 20'000;
  std::int64_t moment_max_n = 200'000;    // naive mode
  std::int64_t fast_max_n = 5'000'000;    // fast mode
};

/// Law of the height H_n of a uniform random leaf. probs[h] = P(H_n = h);
/// trailing exact zeros are trimmed.
struct HeightPMF {
  std::int64_t n = 1;
  std::vector<double> probs;

  std::int64_t max_height() const { return static_cast<std::int64_t>(probs.size()) - 1; }
  std::int64_t min_height() const;
  double total_mass() const;
};

/// Height laws for n = 1..N; entry n is at index n-1.
class PmfTable {
 public:
  explicit PmfTable(std::vector<HeightPMF> rows) : rows_(std::move(rows)) {}
  const HeightPMF& at(std::int64_t n) const { return rows_.at(static_cast<std::size_t>(n - 1)); }
  std::int64_t max_n() const { return static_cast<std::int64_t>(rows_.size()); }

 private:
  std::vector<HeightPMF> rows_;
};

/// First two moments of H_n (discrete) or the time-height (continuous) for
/// n = 1..N. Arrays are indexed by n; index 0 is unused and holds 0.
struct MomentSeries {
  Variant variant = Variant::discrete;
  std::vector<double> mu;
  std::vector<double> sigma2;

  std::int64_t max_n() const { return static_cast<std::int64_t>(mu.size()) - 1; }
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// P(H_1 = 0) = 1 and P(H_n = h) = sum_i P(I_n = i) P(H_i = h-1).
/// Throws ResourceError when N exceeds limits.pmf_max_n.
PmfTable height_pmf_table(std::int64_t N, const EngineLimits& limits = {});

/// mu_n = 1 + (1/theta(n-1)) sum_{k<n} mu_k / (n-k).
std::vector<double> mean_table(std::int64_t N, TableMode mode = TableMode::naive,
                               const EngineLimits& limits = {});

/// sigma2_n = -1 + (1/theta(n-1)) sum_{k<n} (sigma2_k + (mu_n - mu_k)^2) / (n-k).
/// `mu` must be mean_table(N).
std::vector<double> variance_table(std::int64_t N, std::span<const double> mu,
                                   TableMode mode = TableMode::naive,
                                   const EngineLimits& limits = {});

/// Continuous model: the +1 becomes t_n ~ Exp(theta(n-1)), so
/// mu_hat_n = 1/theta(n-1) + sum_k P(I_n = k) mu_hat_k.
std::vector<double> cont_mean_table(std::int64_t N, TableMode mode = TableMode::naive,
                                    const EngineLimits& limits = {});

/// Law of total variance with t_n independent of I_n and of the subtree:
/// sigma2_hat_n = 1/theta^2 + sum_k P(I_n=k)(sigma2_hat_k + mu_hat_k^2)
///                - (mu_hat_n - 1/theta)^2.
/// Throws NumericalIntegrityError if a value drops below -1e-12.
std::vector<double> cont_variance_table(std::int64_t N, std::span<const double> mu_hat,
                                        TableMode mode = TableMode::naive,
                                        const EngineLimits& limits = {});

MomentSeries moment_series(std::int64_t N, Variant variant, TableMode mode = TableMode::naive,
                           const EngineLimits& limits = {});

Moments moments_from_pmf(const HeightPMF& pmf);

/// Kolmogorov distance between the law in `pmf` and N(mu, sigma^2):
/// the largest gap |F(h) - Phi(z)| or |F(h-) - Phi(z)| over support points h,
/// z = (h - mu) / sigma. Throws DomainError if sigma <= 0.
double standardized_cdf_distance(const HeightPMF& pmf, double mu, double sigma);

}  // namespace betasplit
