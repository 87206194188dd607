#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace betasplit {

/// Harmonic numbers theta(n) = 1 + 1/2 + ... + 1/n.
///
/// Values up to `exact_limit` are tabulated by compensated summation, so
/// consecutive entries differ by 1/n up to rounding of the stored sums. Beyond
/// the table the four-term expansion log n + gamma + 1/(2n) - 1/(12 n^2) is
/// used when asymptotic mode is enabled; its truncation error there is below
/// 1/(120 n^4). theta(0) is defined as 0.
///
/// Immutable after construction and safe to share across threads.
class HarmonicTable {
 public:
  static constexpr std::int64_t kDefaultExactLimit = 10'000'000;

  explicit HarmonicTable(std::int64_t exact_limit = kDefaultExactLimit,
                         bool asymptotic_mode = true);

  /// Process-wide table with the default cutoff, built on first use.
  static const HarmonicTable& shared();

  /// theta(n): tabulated when n <= exact_limit(), otherwise asymptotic.
  /// Throws DomainError for n < 0, or beyond the table with asymptotic mode off.
  double operator()(std::int64_t n) const;

  /// Tabulated value only; throws DomainError outside [0, exact_limit()].
  double exact(std::int64_t n) const;

  static double asymptotic(double n);

  std::int64_t exact_limit() const { return static_cast<std::int64_t>(values_.size()) - 1; }
  bool asymptotic_mode() const { return asymptotic_mode_; }

  /// theta(0), theta(1), ..., theta(exact_limit()).
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
  bool asymptotic_mode_;
};

/// theta(n) from the shared table.
double harmonic(std::int64_t n);

}  // namespace betasplit
