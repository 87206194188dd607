#include "betasplit/exact_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "betasplit/convolution.hpp"
#include "betasplit/errors.hpp"
#include "betasplit/harmonic.hpp"
#include "betasplit/stats.hpp"
#include "betasplit/summation.hpp"

namespace betasplit {
namespace {

constexpr double kNegativeVarianceSlack = 1e-12;

void guard(std::int64_t N, std::int64_t limit, const char* what) {
  if (N < 1) throw DomainError(std::string(what) + ": N must be >= 1");
  if (N > limit) {
    throw ResourceError(std::string(what) + ": N = " + std::to_string(N) +
                        " exceeds the configured limit " + std::to_string(limit));
  }
}

void guard_moments(std::int64_t N, TableMode mode, const EngineLimits& limits) {
  guard(N, mode == TableMode::fast ? limits.fast_max_n : limits.moment_max_n, "moment table");
}

// theta(0..N) from the exact table; never the asymptotic branch.
std::vector<double> thetas(std::int64_t N) {
  const auto& table = HarmonicTable::shared();
  if (N > table.exact_limit()) {
    throw ResourceError("moment table: N beyond the exact harmonic table");
  }
  const auto values = table.values();
  return {values.begin(), values.begin() + N + 1};
}

// 1/j for j = 0..N (entry 0 unused).
std::vector<double> reciprocals(std::int64_t N) {
  std::vector<double> inv(static_cast<std::size_t>(N) + 1, 0.0);
  for (std::int64_t j = 1; j <= N; ++j) inv[j] = 1.0 / static_cast<double>(j);
  return inv;
}

void check_table(std::span<const double> table, std::int64_t N, const char* what) {
  if (static_cast<std::int64_t>(table.size()) < N + 1) {
    throw DomainError(std::string(what) + ": input table shorter than N");
  }
}

double checked_variance(double v, std::int64_t n) {
  if (v < -kNegativeVarianceSlack) {
    throw NumericalIntegrityError("negative variance " + std::to_string(v) + " at n = " +
                                  std::to_string(n));
  }
  return std::max(v, 0.0);
}

// sum_{k=1}^{n-1} values[k] / (n-k) for every n, via one FFT convolution.
// sum_{k<n} values[k] * inv[n-k] for every n. Goes through the online solver
// rather than one long FFT so that the rounding error at index n scales with
// the values below n, not with the whole table.
std::vector<double> causal_sums(std::span<const double> values, std::span<const double> inv,
                                std::int64_t N) {
  std::vector<double> out(static_cast<std::size_t>(N) + 1, 0.0);
  std::vector<double> scratch(static_cast<std::size_t>(N) + 1, 0.0);
  solve_online_convolution(scratch, inv, [&](std::int64_t n, double s) {
    out[n] = s;
    return values[n];
  });
  return out;
}

}  // namespace

std::int64_t HeightPMF::min_height() const {
  for (std::size_t h = 0; h < probs.size(); ++h) {
    if (probs[h] > 0.0) return static_cast<std::int64_t>(h);
  }
  return -1;
}

double HeightPMF::total_mass() const {
  CompensatedSum s;
  for (double p : probs) s.add(p);
  return s.value();
}

PmfTable height_pmf_table(std::int64_t N, const EngineLimits& limits) {
  guard(N, limits.pmf_max_n, "pmf table");
  const auto theta = thetas(N);
  const auto inv = reciprocals(N);

  std::vector<HeightPMF> rows;
  rows.reserve(static_cast<std::size_t>(N));
  rows.push_back({1, {1.0}});
  std::vector<double> acc;
  for (std::int64_t n = 2; n <= N; ++n) {
    std::size_t width = 0;
    for (std::int64_t i = 1; i < n; ++i) width = std::max(width, rows[i - 1].probs.size());
    acc.assign(width + 1, 0.0);
    for (std::int64_t i = 1; i < n; ++i) {
      const double w = inv[n - i];
      const auto& p = rows[i - 1].probs;
      double* dst = acc.data() + 1;
      for (std::size_t h = 0; h < p.size(); ++h) dst[h] += w * p[h];
    }
    const double scale = 1.0 / theta[n - 1];
    for (double& a : acc) a *= scale;
    while (!acc.empty() && acc.back() == 0.0) acc.pop_back();
    rows.push_back({n, acc});
  }
  return PmfTable(std::move(rows));
}

std::vector<double> mean_table(std::int64_t N, TableMode mode, const EngineLimits& limits) {
  guard_moments(N, mode, limits);
  const auto theta = thetas(N);
  const auto inv = reciprocals(N);
  std::vector<double> mu(static_cast<std::size_t>(N) + 1, 0.0);

  if (mode == TableMode::fast) {
    solve_online_convolution(mu, inv, [&](std::int64_t n, double s) {
      return n == 1 ? 0.0 : 1.0 + s / theta[n - 1];
    });
    return mu;
  }
  for (std::int64_t n = 2; n <= N; ++n) {
    CompensatedSum s;
    for (std::int64_t k = 1; k < n; ++k) s.add(mu[k] * inv[n - k]);
    mu[n] = 1.0 + s.value() / theta[n - 1];
  }
  return mu;
}

std::vector<double> variance_table(std::int64_t N, std::span<const double> mu, TableMode mode,
                                   const EngineLimits& limits) {
  guard_moments(N, mode, limits);
  check_table(mu, N, "variance table");
  const auto theta = thetas(N);
  const auto inv = reciprocals(N);
  std::vector<double> sigma2(static_cast<std::size_t>(N) + 1, 0.0);

  if (mode == TableMode::fast) {
    // (mu_n - mu_k)^2 = mu_n^2 - 2 mu_n mu_k + mu_k^2; the mu_k sum is
    // (mu_n - 1) theta(n-1) by the mean recurrence.
    std::vector<double> mu_sq(static_cast<std::size_t>(N) + 1, 0.0);
    for (std::int64_t k = 1; k <= N; ++k) mu_sq[k] = mu[k] * mu[k];
    const auto sum_mu_sq = causal_sums(mu_sq, inv, N);
    solve_online_convolution(sigma2, inv, [&](std::int64_t n, double s) {
      if (n == 1) return 0.0;
      const double m = mu[n];
      const double v = -1.0 + (s + sum_mu_sq[n]) / theta[n - 1] + 2.0 * m - m * m;
      return checked_variance(v, n);
    });
    return sigma2;
  }
  for (std::int64_t n = 2; n <= N; ++n) {
    CompensatedSum s;
    const double m = mu[n];
    for (std::int64_t k = 1; k < n; ++k) {
      const double d = m - mu[k];
      s.add((sigma2[k] + d * d) * inv[n - k]);
    }
    sigma2[n] = checked_variance(-1.0 + s.value() / theta[n - 1], n);
  }
  return sigma2;
}

std::vector<double> cont_mean_table(std::int64_t N, TableMode mode, const EngineLimits& limits) {
  guard_moments(N, mode, limits);
  const auto theta = thetas(N);
  const auto inv = reciprocals(N);
  std::vector<double> mu(static_cast<std::size_t>(N) + 1, 0.0);

  if (mode == TableMode::fast) {
    solve_online_convolution(mu, inv, [&](std::int64_t n, double s) {
      return n == 1 ? 0.0 : (1.0 + s) / theta[n - 1];
    });
    return mu;
  }
  for (std::int64_t n = 2; n <= N; ++n) {
    CompensatedSum s(1.0);
    for (std::int64_t k = 1; k < n; ++k) s.add(mu[k] * inv[n - k]);
    mu[n] = s.value() / theta[n - 1];
  }
  return mu;
}

std::vector<double> cont_variance_table(std::int64_t N, std::span<const double> mu_hat,
                                        TableMode mode, const EngineLimits& limits) {
  guard_moments(N, mode, limits);
  check_table(mu_hat, N, "continuous variance table");
  const auto theta = thetas(N);
  const auto inv = reciprocals(N);
  std::vector<double> sigma2(static_cast<std::size_t>(N) + 1, 0.0);

  auto finish = [&](std::int64_t n, double weighted_sum) {
    const double t = 1.0 / theta[n - 1];
    const double shift = mu_hat[n] - t;
    return checked_variance(t * t + weighted_sum * t - shift * shift, n);
  };

  if (mode == TableMode::fast) {
    std::vector<double> mu_sq(static_cast<std::size_t>(N) + 1, 0.0);
    for (std::int64_t k = 1; k <= N; ++k) mu_sq[k] = mu_hat[k] * mu_hat[k];
    const auto sum_mu_sq = causal_sums(mu_sq, inv, N);
    solve_online_convolution(sigma2, inv, [&](std::int64_t n, double s) {
      return n == 1 ? 0.0 : finish(n, s + sum_mu_sq[n]);
    });
    return sigma2;
  }
  for (std::int64_t n = 2; n <= N; ++n) {
    CompensatedSum s;
    for (std::int64_t k = 1; k < n; ++k) {
      s.add((sigma2[k] + mu_hat[k] * mu_hat[k]) * inv[n - k]);
    }
    sigma2[n] = finish(n, s.value());
  }
  return sigma2;
}

MomentSeries moment_series(std::int64_t N, Variant variant, TableMode mode,
                           const EngineLimits& limits) {
  MomentSeries out;
  out.variant = variant;
  if (variant == Variant::discrete) {
    out.mu = mean_table(N, mode, limits);
    out.sigma2 = variance_table(N, out.mu, mode, limits);
  } else {
    out.mu = cont_mean_table(N, mode, limits);
    out.sigma2 = cont_variance_table(N, out.mu, mode, limits);
  }
  return out;
}

Moments moments_from_pmf(const HeightPMF& pmf) {
  CompensatedSum first, second;
  for (std::size_t h = 0; h < pmf.probs.size(); ++h) {
    const double x = static_cast<double>(h);
    first.add(x * pmf.probs[h]);
    second.add(x * x * pmf.probs[h]);
  }
  const double mean = first.value();
  return {mean, std::max(0.0, second.value() - mean * mean)};
}

double standardized_cdf_distance(const HeightPMF& pmf, double mu, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("standardized_cdf_distance: sigma must be > 0");
  CompensatedSum cdf;
  double worst = 0.0;
  for (std::size_t h = 0; h < pmf.probs.size(); ++h) {
    if (pmf.probs[h] <= 0.0) continue;
    const double phi = normal_cdf((static_cast<double>(h) - mu) / sigma);
    const double before = cdf.value();
    cdf.add(pmf.probs[h]);
    worst = std::max({worst, std::abs(before - phi), std::abs(cdf.value() - phi)});
  }
  return worst;
}

}  // namespace betasplit
