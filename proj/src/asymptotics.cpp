#include "betasplit/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "betasplit/errors.hpp"
#include "betasplit/harmonic.hpp"
#include "betasplit/summation.hpp"
#include "chunked_sum.hpp"

namespace betasplit {
namespace {

// log(k/n) for 1 <= k < n, via log1p when k/n is close to 1.
inline double log_ratio(std::int64_t k, std::int64_t n) {
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  if (2 * k > n) return std::log1p(-static_cast<double>(n - k) / nd);
  return std::log(kd / nd);
}

inline double ipow(double x, int r) {
  double y = x;
  for (int j = 1; j < r; ++j) y *= x;
  return y;
}

void require_n(std::int64_t n, const char* what) {
  if (n < 2) throw DomainError(std::string(what) + ": n must be >= 2");
}

double zeta3_series(std::int64_t terms) {
  // Terms 1..m-1 from smallest to largest, then the Euler-Maclaurin tail from m.
  const auto m = static_cast<double>(terms);
  CompensatedSum s;
  for (std::int64_t k = terms - 1; k >= 1; --k) {
    const auto kd = static_cast<double>(k);
    s.add(1.0 / (kd * kd * kd));
  }
  const double m2 = m * m;
  s.add(1.0 / (2.0 * m2) + 1.0 / (2.0 * m2 * m) + 1.0 / (4.0 * m2 * m2) -
        1.0 / (12.0 * m2 * m2 * m2));
  return s.value();
}

double euler_gamma(std::int64_t terms) {
  const auto m = static_cast<double>(terms);
  CompensatedSum h;
  for (std::int64_t k = terms; k >= 1; --k) h.add(1.0 / static_cast<double>(k));
  const double m2 = m * m;
  h.add(-std::log(m));
  h.add(-1.0 / (2.0 * m) + 1.0 / (12.0 * m2) - 1.0 / (120.0 * m2 * m2));
  return h.value();
}

}  // namespace

ConstantsSet compute_constants(std::int64_t precision_terms) {
  if (precision_terms < 1000) throw DomainError("compute_constants: need >= 1000 terms");
  constexpr double pi = std::numbers::pi;
  ConstantsSet c;
  c.zeta2 = pi * pi / 6.0;
  c.zeta4 = pi * pi * pi * pi / 90.0;
  c.zeta3 = zeta3_series(precision_terms);
  c.gamma = euler_gamma(precision_terms);

  const double z2 = c.zeta2, z3 = c.zeta3, z4 = c.zeta4, g = c.gamma;
  const double z2_2 = z2 * z2, z2_3 = z2_2 * z2, z2_4 = z2_3 * z2;

  c.A = 1.0 / (2.0 * z2);
  c.B = g / z2 + z3 / z2_2;
  c.C = 0.1 + g * g / (2.0 * z2) + g * z3 / z2_2 + z3 * z3 / z2_3;
  c.A_star = 2.0 * z3 / (3.0 * z2_3);
  c.B_star = -1.0 / (2.0 * z2) - 3.0 * z4 / z2_3 + 2.0 * g * z3 / z2_3 + 4.0 * z3 * z3 / z2_4;
  c.X = -1.0 - 8.0 * c.A * (c.A * g - c.B) * z3 - 24.0 * c.A * c.A * z4 +
        c.A_star * (3.0 * g * z2 + 6.0 * z3);

  c.A_hat = 1.0 / z2;
  c.B_hat = g / z2 + z3 / z2_2;
  // Leading variance coefficient of the time-height: 2 zeta3 / zeta2^3
  // (the renewal variance m2 / m1^3 of the log-size jumps, m1 = zeta2,
  // m2 = 2 zeta3); the exact recurrence confirms it.
  c.A_hat_star = 2.0 * z3 / z2_3;
  c.B_hat_star = -3.0 / (5.0 * z2) + 2.0 * g * z3 / z2_3 + 5.0 * z3 * z3 / z2_4;
  return c;
}

const ConstantsSet& default_constants() {
  static const ConstantsSet constants = compute_constants();
  return constants;
}

double mean_expansion_at_log(double L, Variant variant, const ConstantsSet& c) {
  if (variant == Variant::discrete) return (c.A * L + c.B) * L + c.C;
  return c.A_hat * L + c.B_hat;
}

double variance_expansion_at_log(double L, Variant variant, const ConstantsSet& c) {
  if (variant == Variant::discrete) return (c.A_star * L + c.B_star) * L * L;
  return c.A_hat_star * L + c.B_hat_star;
}

double mean_expansion(std::int64_t n, Variant variant, const ConstantsSet& c) {
  require_n(n, "mean_expansion");
  return mean_expansion_at_log(std::log(static_cast<double>(n)), variant, c);
}

double variance_expansion(std::int64_t n, Variant variant, const ConstantsSet& c) {
  require_n(n, "variance_expansion");
  return variance_expansion_at_log(std::log(static_cast<double>(n)), variant, c);
}

std::string_view to_string(Verdict v) { return v == Verdict::bounded ? "bounded" : "diverging"; }

Verdict no_growth_verdict(std::span<const double> scaled, double* max_lower, double* max_upper) {
  if (scaled.size() < 2) throw DomainError("no-growth rule needs at least two grid points");
  const std::size_t half = scaled.size() / 2;
  double lower = 0.0, upper = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    if (!std::isfinite(scaled[i])) {
      finite = false;
      continue;
    }
    double& slot = i < half ? lower : upper;
    slot = std::max(slot, std::abs(scaled[i]));
  }
  if (max_lower) *max_lower = lower;
  if (max_upper) *max_upper = upper;
  return finite && upper <= 2.0 * lower ? Verdict::bounded : Verdict::diverging;
}

RemainderFit remainder_check(const SequenceFn& exact, const SequenceFn& expansion,
                             const SequenceFn& scaling, std::span<const std::int64_t> grid) {
  if (grid.empty()) throw DomainError("remainder_check: empty grid");
  RemainderFit fit;
  for (std::int64_t n : grid) {
    const double e = exact(n);
    const double x = expansion(n);
    fit.n_values.push_back(n);
    fit.exact.push_back(e);
    fit.expansion.push_back(x);
    fit.residual.push_back(e - x);
    fit.scaled.push_back((e - x) * scaling(n));
  }
  fit.verdict = no_growth_verdict(fit.scaled, &fit.max_lower, &fit.max_upper);
  return fit;
}

RemainderFit remainder_check(std::span<const double> table, const SequenceFn& expansion,
                             const SequenceFn& scaling, std::span<const std::int64_t> grid) {
  for (std::int64_t n : grid) {
    if (n < 1 || n >= static_cast<std::int64_t>(table.size())) {
      throw DomainError("remainder_check: grid point " + std::to_string(n) +
                        " outside the table");
    }
  }
  return remainder_check([&](std::int64_t n) { return table[static_cast<std::size_t>(n)]; },
                         expansion, scaling, grid);
}

std::vector<std::int64_t> dyadic_grid(int lo_exp, int hi_exp) {
  if (lo_exp < 0 || hi_exp < lo_exp || hi_exp > 62) throw DomainError("dyadic_grid: bad range");
  std::vector<std::int64_t> grid;
  for (int e = lo_exp; e <= hi_exp; ++e) grid.push_back(std::int64_t{1} << e);
  return grid;
}

double sum_log_r(std::int64_t n, int r) {
  require_n(n, "sum_log_r");
  if (r < 1 || r > 6) throw DomainError("sum_log_r: r must be in 1..6");
  return detail::chunked_sum(1, n, [n, r](std::int64_t k) {
    return ipow(log_ratio(k, n), r) / static_cast<double>(n - k);
  });
}

SumComparison sum_log3_normalized(std::int64_t n, const ConstantsSet& c) {
  require_n(n, "sum_log3_normalized");
  const double theta = HarmonicTable::shared()(n - 1);
  const double sum = detail::chunked_sum(1, n, [n](std::int64_t k) {
    const double lk = std::log(static_cast<double>(k));
    return lk * lk * lk / static_cast<double>(n - k);
  });
  const double L = std::log(static_cast<double>(n));
  SumComparison out;
  out.exact = sum / theta;
  out.predicted = L * L * L - 3.0 * c.zeta2 * L + 3.0 * c.gamma * c.zeta2 + 6.0 * c.zeta3;
  out.residual = out.exact - out.predicted;
  return out;
}

SumComparison sum_mu_squared(std::int64_t n, std::span<const double> mu,
                                  const ConstantsSet& c) {
  require_n(n, "sum_mu_squared");
  if (static_cast<std::int64_t>(mu.size()) <= n) {
    throw DomainError("sum_mu_squared: mean table does not cover n");
  }
  const double theta = HarmonicTable::shared()(n - 1);
  const double mu_n = mu[static_cast<std::size_t>(n)];
  const double sum = detail::chunked_sum(1, n, [&](std::int64_t k) {
    const double d = mu_n - mu[static_cast<std::size_t>(k)];
    return d * d / static_cast<double>(n - k);
  });
  const double L = std::log(static_cast<double>(n));
  const double A = c.A;
  SumComparison out;
  out.exact = sum / theta;
  out.predicted = 8.0 * A * A * c.zeta3 * L - 8.0 * A * (A * c.gamma - c.B) * c.zeta3 -
                  24.0 * A * A * c.zeta4;
  out.residual = out.exact - out.predicted;
  return out;
}

double expected_log_power(std::int64_t n, int k) {
  if (k < 1 || k > 4) throw DomainError("expected_log_power: k must be in 1..4");
  require_n(n, "expected_log_power");
  const double theta = HarmonicTable::shared()(n - 1);
  return detail::chunked_sum(1, n, [n, k](std::int64_t i) {
    return ipow(-log_ratio(i, n), k) / static_cast<double>(n - i);
  }) / theta;
}

std::pair<double, double> xi_bound_sums(std::int64_t n) {
  require_n(n, "xi_bound_sums");
  const double first = detail::chunked_sum(1, n, [n](std::int64_t k) {
    const auto kd = static_cast<double>(k);
    return 1.0 / (kd * kd * static_cast<double>(n - k));
  });
  const double second = detail::chunked_sum(1, n, [n](std::int64_t k) {
    return -log_ratio(k, n) / (static_cast<double>(k) * static_cast<double>(n - k));
  });
  return {first, second};
}

}  // namespace betasplit
