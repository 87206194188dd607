#pragma once

#include <cstdint>

#include "betasplit/harmonic.hpp"
#include "betasplit/rng.hpp"

namespace betasplit {

/// Law of the first split of a block of size n >= 2:
///   p(n, i) = n / (2 theta(n-1) i (n-i)),  1 <= i <= n-1.
class SplitLaw {
 public:
  explicit SplitLaw(std::int64_t n, const HarmonicTable& table = HarmonicTable::shared());

  std::int64_t n() const { return n_; }
  /// 1 / (2 theta(n-1)).
  double normalizer() const { return normalizer_; }

  /// p(n, i). Symmetric in i <-> n-i bit-for-bit.
  double prob(std::int64_t i) const;

  /// Mixture sampler: since n/(i(n-i)) = 1/i + 1/(n-i), draw J with
  /// P(J = j) proportional to 1/j on {1..n-1} and return J or n-J with
  /// probability 1/2 each.
  std::int64_t sample(RandomStream& rng) const;

 private:
  std::int64_t n_;
  double theta_;
  double normalizer_;
  const HarmonicTable* table_;
};

/// Law of I_n, the size of the sub-block holding a uniform random leaf after
/// one split: P(I_n = i) = 1 / ((n-i) theta(n-1)).
class LeafStepLaw {
 public:
  explicit LeafStepLaw(std::int64_t n, const HarmonicTable& table = HarmonicTable::shared());

  std::int64_t n() const { return n_; }
  double prob(std::int64_t i) const;
  /// (theta(n-1) - theta(n-1-i)) / theta(n-1), with theta(0) = 0.
  double cdf(std::int64_t i) const;

  /// Inverse-cdf draw: smallest i with cdf(i) >= u. O(log n) harmonic
  /// evaluations, so usable far beyond the exact table.
  std::int64_t sample(RandomStream& rng) const;

 private:
  std::int64_t n_;
  double theta_;
  const HarmonicTable* table_;
};

double split_prob(std::int64_t n, std::int64_t i);
double leaf_step_prob(std::int64_t n, std::int64_t i);
std::int64_t sample_split(std::int64_t n, RandomStream& rng);
std::int64_t sample_leaf_step(std::int64_t n, RandomStream& rng);

}  // namespace betasplit
