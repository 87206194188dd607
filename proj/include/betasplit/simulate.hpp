#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betasplit/rng.hpp"
#include "betasplit/stats.hpp"
#include "betasplit/variant.hpp"

namespace betasplit {

/// One node of a sampled tree. Blocks are contiguous, so a node stores its
/// interval [lo, hi] (1-based, inclusive). An internal node splits into
/// [lo, split] and [split+1, hi]; `time` is its Exp(theta(size-1)) holding
/// time in the continuous model, which is the length of both edges to its
/// children.
struct TreeNode {
  std::int32_t lo = 0;
  std::int32_t hi = 0;
  std::int32_t split = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t parent = -1;
  double time = 0.0;

  bool is_leaf() const { return left < 0; }
  std::int32_t size() const { return hi - lo + 1; }
};

/// Nodes in creation (pre-)order: the root is node 0 and every parent precedes
/// its children.
struct SampledTree {
  Variant variant = Variant::discrete;
  std::int64_t n = 0;
  std::vector<TreeNode> nodes;

  std::int64_t leaf_count() const;
  std::int64_t internal_count() const;
  /// Number of edges between the root and leaf j.
  std::int64_t leaf_height(std::int64_t j) const;
  /// Sum of the ancestors' holding times of leaf j (0 in the discrete model).
  double leaf_time_height(std::int64_t j) const;
  /// Heights of all leaves, indexed by label - 1.
  std::vector<std::int64_t> leaf_heights() const;
  double average_leaf_height() const;
};

constexpr std::int64_t kDefaultTreeGuard = 2'000'000;

/// Recursively splits {1..n} with the split law; continuous trees draw each
/// holding time before the split. Throws ResourceError above `max_leaves`.
SampledTree sample_tree(std::int64_t n, Variant variant, RandomStream& rng,
                        std::int64_t max_leaves = kDefaultTreeGuard);

/// Newick text: leaves labelled 1..n; branch lengths 1 (discrete) or the
/// parent's holding time (continuous); terminated by ';'.
std::string newick_export(const SampledTree& tree);

struct LeafPathSample {
  std::int64_t height = 0;
  double time_height = 0.0;
  std::vector<std::int64_t> chain;  ///< visited sizes n = s0 > s1 > ... > 1, if recorded
};

/// Follows the random leaf's block sizes down to 1 with the leaf-step law.
/// In the continuous variant each step of a block of size s also adds an
/// Exp(theta(s-1)) time.
LeafPathSample sample_leaf_height(std::int64_t n, Variant variant, RandomStream& rng,
                                  bool record_chain = false);

/// Height and time-height from a single chain.
LeafPathSample joint_sample(std::int64_t n, RandomStream& rng, bool record_chain = false);

/// Streaming count, mean and central moments (Welford/Pebay updates),
/// mergeable in any grouping.
class SimSummary {
 public:
  void add(double x);
  void merge(const SimSummary& other);

  std::int64_t count() const { return count_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance.
  double variance() const;
  /// Third and fourth central moments (divided by count).
  double m3() const;
  double m4() const;
  /// Standard error of variance(): sqrt((m4 - s^4 (n-3)/(n-1)) / n).
  double variance_standard_error() const;

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double M2_ = 0.0;
  double M3_ = 0.0;
  double M4_ = 0.0;
};

struct ExperimentConfig {
  std::int64_t n = 2;
  std::int64_t reps = 1;
  Variant variant = Variant::discrete;
  std::uint64_t seed = 0;
  int workers = 1;
  std::int64_t retain_capacity = 1'000'000;
};

struct ExperimentResult {
  ExperimentConfig config;
  SimSummary summary;
  /// Per-replicate values in replicate order; a uniform subset of exactly
  /// retain_capacity replicates when reps exceeds it.
  std::vector<double> values;
  bool subsampled = false;
};

/// Replicate r uses derive_stream(seed, r). Replicates are grouped in fixed
/// blocks whose summaries are merged in block order, so results do not depend
/// on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace betasplit
