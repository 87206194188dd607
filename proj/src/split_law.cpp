#include "betasplit/split_law.hpp"

#include <algorithm>
#include <string>

#include "betasplit/errors.hpp"

namespace betasplit {
namespace {

void require_size(std::int64_t n) {
  if (n < 2) throw DomainError("split law needs n >= 2, got " + std::to_string(n));
}

void require_index(std::int64_t n, std::int64_t i) {
  if (i < 1 || i > n - 1) {
    throw DomainError("index " + std::to_string(i) + " outside 1.." + std::to_string(n - 1));
  }
}

// Smallest j in [lo, hi] with theta(j) >= target; hi if none.
std::int64_t first_at_least(const HarmonicTable& table, std::int64_t lo, std::int64_t hi,
                            double target) {
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (table(mid) >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// Largest k in [lo, hi] with theta(k) <= target, assuming theta(lo) <= target.
std::int64_t last_at_most(const HarmonicTable& table, std::int64_t lo, std::int64_t hi,
                          double target) {
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (table(mid) <= target) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

}  // namespace

SplitLaw::SplitLaw(std::int64_t n, const HarmonicTable& table) : n_(n), table_(&table) {
  require_size(n);
  theta_ = table(n - 1);
  normalizer_ = 1.0 / (2.0 * theta_);
}

double SplitLaw::prob(std::int64_t i) const {
  require_index(n_, i);
  const auto small = static_cast<double>(std::min(i, n_ - i));
  const auto large = static_cast<double>(std::max(i, n_ - i));
  return static_cast<double>(n_) * normalizer_ / (small * large);
}

std::int64_t SplitLaw::sample(RandomStream& rng) const {
  const bool mirror = rng.coin();
  const double target = rng.uniform() * theta_;
  const std::int64_t j = first_at_least(*table_, 1, n_ - 1, target);
  return mirror ? n_ - j : j;
}

LeafStepLaw::LeafStepLaw(std::int64_t n, const HarmonicTable& table) : n_(n), table_(&table) {
  require_size(n);
  theta_ = table(n - 1);
}

double LeafStepLaw::prob(std::int64_t i) const {
  require_index(n_, i);
  return 1.0 / (static_cast<double>(n_ - i) * theta_);
}

double LeafStepLaw::cdf(std::int64_t i) const {
  require_index(n_, i);
  if (i == n_ - 1) return 1.0;
  return (theta_ - (*table_)(n_ - 1 - i)) / theta_;
}

std::int64_t LeafStepLaw::sample(RandomStream& rng) const {
  // cdf(i) >= u  <=>  theta(n-1-i) <= (1-u) theta(n-1); the smallest such i
  // corresponds to the largest k = n-1-i.
  const double u = rng.uniform();
  const double level = (1.0 - u) * theta_;
  const std::int64_t k = last_at_most(*table_, 0, n_ - 2, level);
  return n_ - 1 - k;
}

double split_prob(std::int64_t n, std::int64_t i) { return SplitLaw(n).prob(i); }

double leaf_step_prob(std::int64_t n, std::int64_t i) { return LeafStepLaw(n).prob(i); }

std::int64_t sample_split(std::int64_t n, RandomStream& rng) { return SplitLaw(n).sample(rng); }

std::int64_t sample_leaf_step(std::int64_t n, RandomStream& rng) {
  return LeafStepLaw(n).sample(rng);
}

}  // namespace betasplit
