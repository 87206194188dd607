#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "betasplit/variant.hpp"

namespace betasplit {

/// Zeta values, Euler's constant and every constant of the moment expansions
///   mu_n       = A log^2 n + B log n + C + O(log n / n)
///   sigma2_n   = A* log^3 n + B* log^2 n + O(log n)
///   mu_hat_n   = A^ log n + B^ + O(1/n)
///   sigma2^_n  = A^* log n + B^* + O(log n / n)
/// X is the constant term of the variance-residual recurrence; B* = A X.
struct ConstantsSet {
  double zeta2 = 0, zeta3 = 0, zeta4 = 0, gamma = 0;
  double A = 0, B = 0, C = 0;
  double A_star = 0, B_star = 0, X = 0;
  double A_hat = 0, B_hat = 0, A_hat_star = 0, B_hat_star = 0;
};

/// zeta(2), zeta(4) in closed form; zeta(3) by `precision_terms` terms of its
/// series plus an Euler-Maclaurin tail; gamma from theta(m) - log m with the
/// Euler-Maclaurin corrections, m = precision_terms. Requires >= 1000 terms.
ConstantsSet compute_constants(std::int64_t precision_terms = 10'000'000);

/// compute_constants() with default precision, computed once.
const ConstantsSet& default_constants();

double mean_expansion_at_log(double log_n, Variant variant, const ConstantsSet& c);
double variance_expansion_at_log(double log_n, Variant variant, const ConstantsSet& c);
/// Expansion evaluated at log n; n >= 2.
double mean_expansion(std::int64_t n, Variant variant, const ConstantsSet& c);
double variance_expansion(std::int64_t n, Variant variant, const ConstantsSet& c);

enum class Verdict { bounded, diverging };
std::string_view to_string(Verdict v);

/// Residual diagnostics for one O(.) bound over a grid of n.
///
/// scaled = (exact - expansion) * scaling(n). The verdict is "bounded" iff
/// max|scaled| over the upper half of the grid is at most twice max|scaled|
/// over the lower half (lower half = first floor(m/2) points); non-finite
/// scaled values give "diverging".
struct RemainderFit {
  std::vector<std::int64_t> n_values;
  std::vector<double> exact;
  std::vector<double> expansion;
  std::vector<double> residual;
  std::vector<double> scaled;
  double max_lower = 0.0;
  double max_upper = 0.0;
  Verdict verdict = Verdict::bounded;
};

using SequenceFn = std::function<double(std::int64_t)>;

RemainderFit remainder_check(const SequenceFn& exact, const SequenceFn& expansion,
                             const SequenceFn& scaling, std::span<const std::int64_t> grid);
/// Same, with exact values read from a table indexed by n.
RemainderFit remainder_check(std::span<const double> table, const SequenceFn& expansion,
                             const SequenceFn& scaling, std::span<const std::int64_t> grid);

/// Applies the factor-2 no-growth rule to an already scaled sequence.
Verdict no_growth_verdict(std::span<const double> scaled, double* max_lower = nullptr,
                          double* max_upper = nullptr);

/// 2^lo, 2^(lo+1), ..., 2^hi.
std::vector<std::int64_t> dyadic_grid(int lo_exp, int hi_exp);

/// An exact finite sum next to its predicted asymptotic value.
struct SumComparison {
  double exact = 0.0;
  double predicted = 0.0;
  double residual = 0.0;  // exact - predicted
};

/// sum_{k=1}^{n-1} log^r(k/n) / (n-k), 1 <= r <= 6. Approaches (-1)^r r! zeta(r+1).
double sum_log_r(std::int64_t n, int r);

/// (1/theta(n-1)) sum_k log^3 k / (n-k) against
/// log^3 n - 3 zeta2 log n + 3 gamma zeta2 + 6 zeta3.
SumComparison sum_log3_normalized(std::int64_t n, const ConstantsSet& c);

/// (1/theta(n-1)) sum_k (mu_n - mu_k)^2 / (n-k) against
/// 8 A^2 zeta3 log n - 8 A (A gamma - B) zeta3 - 24 A^2 zeta4.
/// `mu` is a discrete mean table covering 1..n.
SumComparison sum_mu_squared(std::int64_t n, std::span<const double> mu,
                                  const ConstantsSet& c);

/// E log^k(n / I_n) = (1/theta(n-1)) sum_i log^k(n/i) / (n-i), 1 <= k <= 4.
double expected_log_power(std::int64_t n, int k);

/// (sum_k 1/(k^2 (n-k)), sum_k log(n/k)/(k (n-k))), k = 1..n-1.
std::pair<double, double> xi_bound_sums(std::int64_t n);

}  // namespace betasplit
