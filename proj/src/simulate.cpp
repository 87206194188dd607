#include "betasplit/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <thread>

#include "betasplit/errors.hpp"
#include "betasplit/harmonic.hpp"
#include "betasplit/split_law.hpp"

namespace betasplit {
namespace {

constexpr std::int64_t kBlockSize = 4096;
constexpr std::int64_t kBlocksPerWave = 256;
constexpr std::uint64_t kReservoirSalt = 0x9E3779B97F4A7C15ull;

void append_number(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, res.ptr);
}

}  // namespace

std::int64_t SampledTree::leaf_count() const {
  return std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& v) { return v.is_leaf(); });
}

std::int64_t SampledTree::internal_count() const {
  return static_cast<std::int64_t>(nodes.size()) - leaf_count();
}

std::int64_t SampledTree::leaf_height(std::int64_t j) const {
  if (j < 1 || j > n) throw DomainError("leaf_height: label out of range");
  std::int64_t h = 0;
  std::int32_t v = 0;
  while (!nodes[v].is_leaf()) {
    v = j <= nodes[v].split ? nodes[v].left : nodes[v].right;
    ++h;
  }
  return h;
}

double SampledTree::leaf_time_height(std::int64_t j) const {
  if (j < 1 || j > n) throw DomainError("leaf_time_height: label out of range");
  double t = 0.0;
  std::int32_t v = 0;
  while (!nodes[v].is_leaf()) {
    t += nodes[v].time;
    v = j <= nodes[v].split ? nodes[v].left : nodes[v].right;
  }
  return t;
}

std::vector<std::int64_t> SampledTree::leaf_heights() const {
  std::vector<std::int64_t> depth(nodes.size(), 0);
  std::vector<std::int64_t> heights(static_cast<std::size_t>(n), 0);
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].parent >= 0) depth[v] = depth[nodes[v].parent] + 1;
    if (nodes[v].is_leaf()) heights[nodes[v].lo - 1] = depth[v];
  }
  return heights;
}

double SampledTree::average_leaf_height() const {
  const auto heights = leaf_heights();
  double total = 0.0;
  for (auto h : heights) total += static_cast<double>(h);
  return total / static_cast<double>(n);
}

SampledTree sample_tree(std::int64_t n, Variant variant, RandomStream& rng,
                        std::int64_t max_leaves) {
  if (n < 1) throw DomainError("sample_tree: n must be >= 1");
  if (n > max_leaves) {
    throw ResourceError("sample_tree: n = " + std::to_string(n) + " exceeds the guard " +
                        std::to_string(max_leaves));
  }
  const auto& table = HarmonicTable::shared();
  SampledTree tree;
  tree.variant = variant;
  tree.n = n;
  tree.nodes.reserve(static_cast<std::size_t>(2 * n - 1));
  tree.nodes.push_back({1, static_cast<std::int32_t>(n)});

  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t v = stack.back();
    stack.pop_back();
    const std::int32_t size = tree.nodes[v].size();
    if (size == 1) continue;
    if (variant == Variant::continuous) tree.nodes[v].time = rng.exponential(table(size - 1));
    const auto i = static_cast<std::int32_t>(SplitLaw(size, table).sample(rng));
    const std::int32_t lo = tree.nodes[v].lo;
    const std::int32_t hi = tree.nodes[v].hi;
    const auto left = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({lo, lo + i - 1, 0, -1, -1, v, 0.0});
    tree.nodes.push_back({lo + i, hi, 0, -1, -1, v, 0.0});
    tree.nodes[v].split = lo + i - 1;
    tree.nodes[v].left = left;
    tree.nodes[v].right = left + 1;
    stack.push_back(left + 1);
    stack.push_back(left);
  }
  return tree;
}

std::string newick_export(const SampledTree& tree) {
  std::string out;
  out.reserve(tree.nodes.size() * 8);
  auto edge = [&](std::int32_t v) {
    const std::int32_t parent = tree.nodes[v].parent;
    if (parent < 0) return;
    out += ':';
    if (tree.variant == Variant::discrete) {
      out += '1';
    } else {
      append_number(out, tree.nodes[parent].time);
    }
  };
  std::vector<std::pair<std::int32_t, int>> stack;
  if (!tree.nodes.empty()) stack.emplace_back(0, 0);
  while (!stack.empty()) {
    auto& [v, stage] = stack.back();
    const TreeNode& node = tree.nodes[v];
    if (node.is_leaf()) {
      out += std::to_string(node.lo);
      edge(v);
      stack.pop_back();
    } else if (stage == 0) {
      out += '(';
      stage = 1;
      stack.emplace_back(node.left, 0);
    } else if (stage == 1) {
      out += ',';
      stage = 2;
      stack.emplace_back(node.right, 0);
    } else {
      out += ')';
      edge(v);
      stack.pop_back();
    }
  }
  out += ';';
  return out;
}

namespace {

LeafPathSample walk_chain(std::int64_t n, bool timed, RandomStream& rng, bool record_chain) {
  if (n < 1) throw DomainError("leaf path: n must be >= 1");
  const auto& table = HarmonicTable::shared();
  LeafPathSample out;
  if (record_chain) out.chain.push_back(n);
  std::int64_t s = n;
  while (s > 1) {
    const LeafStepLaw law(s, table);
    if (timed) out.time_height += rng.exponential(table(s - 1));
    s = law.sample(rng);
    ++out.height;
    if (record_chain) out.chain.push_back(s);
  }
  return out;
}

}  // namespace

LeafPathSample sample_leaf_height(std::int64_t n, Variant variant, RandomStream& rng,
                                  bool record_chain) {
  return walk_chain(n, variant == Variant::continuous, rng, record_chain);
}

LeafPathSample joint_sample(std::int64_t n, RandomStream& rng, bool record_chain) {
  return walk_chain(n, true, rng, record_chain);
}

void SimSummary::add(double x) {
  SimSummary one;
  one.count_ = 1;
  one.mean_ = x;
  merge(one);
}

void SimSummary::merge(const SimSummary& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  const double d2 = delta * delta;

  const double M2 = M2_ + other.M2_ + d2 * na * nb / n;
  const double M3 = M3_ + other.M3_ + d2 * delta * na * nb * (na - nb) / (n * n) +
                    3.0 * delta * (na * other.M2_ - nb * M2_) / n;
  const double M4 = M4_ + other.M4_ +
                    d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                    6.0 * d2 * (na * na * other.M2_ + nb * nb * M2_) / (n * n) +
                    4.0 * delta * (na * other.M3_ - nb * M3_) / n;
  mean_ += delta * nb / n;
  M2_ = M2;
  M3_ = M3;
  M4_ = M4;
  count_ += other.count_;
}

double SimSummary::variance() const {
  return count_ < 2 ? 0.0 : std::max(0.0, M2_ / static_cast<double>(count_ - 1));
}

double SimSummary::m3() const { return count_ == 0 ? 0.0 : M3_ / static_cast<double>(count_); }

double SimSummary::m4() const { return count_ == 0 ? 0.0 : M4_ / static_cast<double>(count_); }

double SimSummary::variance_standard_error() const {
  if (count_ < 4) return 0.0;
  const double n = static_cast<double>(count_);
  const double s2 = variance();
  return std::sqrt(std::max(0.0, (m4() - s2 * s2 * (n - 3.0) / (n - 1.0)) / n));
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.n < 1) throw ConfigError("run_experiment: n must be >= 1");
  if (config.reps < 1) throw ConfigError("run_experiment: reps must be >= 1");
  if (config.workers < 1) throw ConfigError("run_experiment: workers must be >= 1");
  if (config.retain_capacity < 0) throw ConfigError("run_experiment: negative retain capacity");

  struct Block {
    SimSummary summary;
    std::vector<double> values;
  };
  struct Kept {
    double key;
    std::int64_t rep;
    double value;
  };

  ExperimentResult result;
  result.config = config;
  const bool subsample = config.reps > config.retain_capacity;
  result.subsampled = subsample;
  const auto capacity = static_cast<std::size_t>(config.retain_capacity);
  std::vector<Kept> reservoir;
  auto prune = [&] {
    if (reservoir.size() <= capacity) return;
    auto by_key = [](const Kept& a, const Kept& b) {
      return a.key != b.key ? a.key < b.key : a.rep < b.rep;
    };
    std::nth_element(reservoir.begin(), reservoir.begin() + static_cast<std::ptrdiff_t>(capacity),
                     reservoir.end(), by_key);
    reservoir.resize(capacity);
  };

  const std::int64_t blocks = (config.reps + kBlockSize - 1) / kBlockSize;
  for (std::int64_t wave = 0; wave < blocks; wave += kBlocksPerWave) {
    const std::int64_t wave_end = std::min(blocks, wave + kBlocksPerWave);
    std::vector<Block> done(static_cast<std::size_t>(wave_end - wave));
    std::atomic<std::int64_t> next{wave};
    auto work = [&] {
      for (std::int64_t b = next++; b < wave_end; b = next++) {
        Block& block = done[static_cast<std::size_t>(b - wave)];
        const std::int64_t first = b * kBlockSize;
        const std::int64_t last = std::min(config.reps, first + kBlockSize);
        block.values.reserve(static_cast<std::size_t>(last - first));
        for (std::int64_t r = first; r < last; ++r) {
          RandomStream rng = derive_stream(config.seed, static_cast<std::uint64_t>(r));
          const auto s = sample_leaf_height(config.n, config.variant, rng);
          const double x = config.variant == Variant::discrete ? static_cast<double>(s.height)
                                                                : s.time_height;
          block.summary.add(x);
          block.values.push_back(x);
        }
      }
    };
    const auto threads = std::min<std::int64_t>(config.workers, wave_end - wave);
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::int64_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }

    for (std::int64_t b = wave; b < wave_end; ++b) {
      Block& block = done[static_cast<std::size_t>(b - wave)];
      result.summary.merge(block.summary);
      if (!subsample) {
        result.values.insert(result.values.end(), block.values.begin(), block.values.end());
        continue;
      }
      for (std::size_t k = 0; k < block.values.size(); ++k) {
        const std::int64_t r = b * kBlockSize + static_cast<std::int64_t>(k);
        RandomStream keys(config.seed ^ kReservoirSalt, static_cast<std::uint64_t>(r));
        reservoir.push_back({keys.uniform(), r, block.values[k]});
      }
      if (reservoir.size() > 2 * capacity) prune();
    }
  }
  if (subsample) {
    prune();
    std::sort(reservoir.begin(), reservoir.end(),
              [](const Kept& a, const Kept& b) { return a.rep < b.rep; });
    result.values.reserve(reservoir.size());
    for (const auto& k : reservoir) result.values.push_back(k.value);
  }
  return result;
}

}  // namespace betasplit
