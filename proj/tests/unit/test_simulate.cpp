#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "betasplit/asymptotics.hpp"
#include "betasplit/errors.hpp"
#include "betasplit/exact_engine.hpp"
#include "betasplit/rng.hpp"
#include "betasplit/simulate.hpp"
#include "betasplit/stats.hpp"
#include "doctest.h"

using namespace betasplit;

namespace {

// Recursive-descent check of the Newick grammar used here:
//   tree := subtree ';'   subtree := leaf | '(' subtree ',' subtree ')'
//   optional ':' length after every subtree except the root.
class NewickChecker {
 public:
  explicit NewickChecker(const std::string& s) : s_(s) {}

  bool parse() {
    if (!subtree(true)) return false;
    return pos_ + 1 == s_.size() && s_[pos_] == ';';
  }
  std::vector<int> labels;
  std::vector<double> lengths;

 private:
  bool subtree(bool root) {
    if (pos_ >= s_.size()) return false;
    if (s_[pos_] == '(') {
      ++pos_;
      if (!subtree(false)) return false;
      if (pos_ >= s_.size() || s_[pos_] != ',') return false;
      ++pos_;
      if (!subtree(false)) return false;
      if (pos_ >= s_.size() || s_[pos_] != ')') return false;
      ++pos_;
    } else {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == start) return false;
      labels.push_back(std::stoi(s_.substr(start, pos_ - start)));
    }
    if (root) return true;
    if (pos_ >= s_.size() || s_[pos_] != ':') return false;
    ++pos_;
    std::size_t used = 0;
    try {
      lengths.push_back(std::stod(s_.substr(pos_), &used));
    } catch (...) {
      return false;
    }
    pos_ += used;
    return true;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double normal_draw(RandomStream& rng) {
  const double u = rng.uniform_positive();
  const double v = rng.uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(RandomStream::philox(A4{0, 0, 0, 0}, A2{0, 0}) ==
        A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(RandomStream::philox(A4{~0u, ~0u, ~0u, ~0u}, A2{~0u, ~0u}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(RandomStream::philox(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("random streams") {
  RandomStream a(5, 9), b(5, 9), c(5, 10), d(6, 9);
  std::vector<std::uint64_t> xa, xb;
  bool differs_c = false, differs_d = false;
  for (int k = 0; k < 64; ++k) {
    const auto v = a();
    xa.push_back(v);
    xb.push_back(b());
    differs_c |= v != c();
    differs_d |= v != d();
  }
  CHECK(xa == xb);
  CHECK(differs_c);
  CHECK(differs_d);

  RandomStream r(1, 1);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double p = r.uniform_positive();
    CHECK((p > 0.0 && p <= 1.0));
    sum += r.exponential(4.0);
  }
  CHECK(sum / 100000 == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("tree structure") {
  RandomStream rng(3, 0);
  const SampledTree t2 = sample_tree(2, Variant::discrete, rng);
  CHECK(t2.nodes.size() == 3);
  CHECK(t2.leaf_height(1) == 1);
  CHECK(t2.leaf_height(2) == 1);
  CHECK(newick_export(t2) == "(1:1,2:1);");

  const SampledTree t1 = sample_tree(1, Variant::discrete, rng);
  CHECK(t1.nodes.size() == 1);
  CHECK(newick_export(t1) == "1;");

  for (std::int64_t n : {23, 500}) {
    for (Variant v : {Variant::discrete, Variant::continuous}) {
      const SampledTree t = sample_tree(n, v, rng);
      CHECK(t.leaf_count() == n);
      CHECK(t.internal_count() == n - 1);
      std::vector<int> seen(n + 1, 0);
      for (std::size_t k = 0; k < t.nodes.size(); ++k) {
        const TreeNode& node = t.nodes[k];
        if (node.is_leaf()) {
          CHECK(node.lo == node.hi);
          ++seen[node.lo];
          continue;
        }
        const TreeNode& l = t.nodes[node.left];
        const TreeNode& r = t.nodes[node.right];
        CHECK(l.lo == node.lo);
        CHECK(l.hi == node.split);
        CHECK(r.lo == node.split + 1);
        CHECK(r.hi == node.hi);
        CHECK(l.parent == static_cast<int>(k));
        CHECK(node.left > static_cast<int>(k));
        if (v == Variant::continuous) CHECK(node.time > 0.0);
      }
      CHECK(std::count(seen.begin() + 1, seen.end(), 1) == n);
      const auto heights = t.leaf_heights();
      for (std::int64_t j = 1; j <= n; ++j) CHECK(heights[j - 1] == t.leaf_height(j));
    }
  }
  CHECK_THROWS_AS(sample_tree(11, Variant::discrete, rng, 10), ResourceError);
  CHECK_THROWS_AS(sample_tree(0, Variant::discrete, rng), DomainError);
}

TEST_CASE("newick export") {
  SampledTree t;
  t.variant = Variant::discrete;
  t.n = 3;
  t.nodes = {{1, 3, 1, 1, 2, -1, 0.0},
             {1, 1, 0, -1, -1, 0, 0.0},
             {2, 3, 2, 3, 4, 0, 0.0},
             {2, 2, 0, -1, -1, 2, 0.0},
             {3, 3, 0, -1, -1, 2, 0.0}};
  CHECK(newick_export(t) == "(1:1,(2:1,3:1):1);");
  t.variant = Variant::continuous;
  t.nodes[0].time = 0.5;
  t.nodes[2].time = 0.25;
  CHECK(newick_export(t) == "(1:0.5,(2:0.25,3:0.25):0.5);");

  RandomStream rng(17, 0);
  for (Variant v : {Variant::discrete, Variant::continuous}) {
    const SampledTree tree = sample_tree(300, v, rng);
    const std::string text = newick_export(tree);
    NewickChecker checker(text);
    REQUIRE(checker.parse());
    std::vector<int> sorted = checker.labels;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted.size() == 300);
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK(sorted.front() == 1);
    CHECK(sorted.back() == 300);
    CHECK(checker.lengths.size() == 2 * 300 - 2);
    if (v == Variant::continuous) {
      for (double len : checker.lengths) CHECK(len > 0.0);
    }
  }
}

TEST_CASE("tree average leaf height at n = 100") {
  const auto mu = mean_table(100);
  SimSummary s;
  for (int r = 0; r < 100000; ++r) {
    RandomStream rng = derive_stream(4242, r);
    s.add(sample_tree(100, Variant::discrete, rng).average_leaf_height());
  }
  CHECK(std::abs(s.mean() - mu[100]) < 3.0 * std::sqrt(s.variance() / s.count()));
}

TEST_CASE("leaf path sampler") {
  RandomStream rng(8, 0);
  for (int k = 0; k < 100; ++k) {
    CHECK(sample_leaf_height(2, Variant::discrete, rng).height == 1);
    CHECK(sample_leaf_height(1, Variant::discrete, rng).height == 0);
  }
  const auto path = sample_leaf_height(1000, Variant::discrete, rng, true);
  CHECK(path.chain.front() == 1000);
  CHECK(path.chain.back() == 1);
  CHECK(static_cast<std::int64_t>(path.chain.size()) == path.height + 1);
  CHECK(std::is_sorted(path.chain.rbegin(), path.chain.rend()));

  std::vector<std::int64_t> counts(3, 0);
  for (int r = 0; r < 1'000'000; ++r) ++counts[sample_leaf_height(3, Variant::discrete, rng).height];
  const auto pmf = height_pmf_table(3).at(3).probs;
  CHECK(counts[0] == 0);
  CHECK(chi_square_gof(std::vector<std::int64_t>{counts[1], counts[2]},
                       std::vector<double>{pmf[1], pmf[2]})
            .p_value > 1e-3);
}

TEST_CASE("continuous path sampler at n = 1e6") {
  const ConstantsSet& c = default_constants();
  SimSummary s;
  RandomStream rng(77, 0);
  for (int r = 0; r < 100000; ++r) s.add(sample_leaf_height(1'000'000, Variant::continuous, rng).time_height);
  const double predicted = mean_expansion(1'000'000, Variant::continuous, c);
  CHECK(std::abs(s.mean() - predicted) < 3.0 * std::sqrt(s.variance() / s.count()));
}

TEST_CASE("joint sampler") {
  RandomStream rng(12, 0);
  const auto two = joint_sample(2, rng);
  CHECK(two.height == 1);
  CHECK(two.time_height > 0.0);

  // Same stream: the continuous marginal sampler consumes the same draws.
  RandomStream a(12, 5), b(12, 5);
  const auto j = joint_sample(5000, a);
  const auto m = sample_leaf_height(5000, Variant::continuous, b);
  CHECK(j.height == m.height);
  CHECK(j.time_height == m.time_height);

  const int reps = 100000;
  SimSummary h, t, hd;
  double cross = 0.0;
  std::vector<std::pair<double, double>> pairs;
  for (int r = 0; r < reps; ++r) {
    RandomStream s = derive_stream(31, r);
    const auto x = joint_sample(10000, s);
    h.add(static_cast<double>(x.height));
    t.add(x.time_height);
    pairs.emplace_back(static_cast<double>(x.height), x.time_height);
    RandomStream s2 = derive_stream(32, r);
    hd.add(static_cast<double>(sample_leaf_height(10000, Variant::discrete, s2).height));
  }
  for (const auto& [x, y] : pairs) cross += (x - h.mean()) * (y - t.mean());
  CHECK(cross / (reps - 1) > 0.0);
  const double se = std::sqrt(h.variance() / reps + hd.variance() / reps);
  CHECK(std::abs(h.mean() - hd.mean()) < 3.0 * se);
}

TEST_CASE("summary merge") {
  RandomStream rng(1, 2);
  std::vector<double> xs(3000);
  for (auto& x : xs) x = rng.exponential(1.0) + 3.0 * rng.uniform();

  SimSummary whole, a, b, c;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    whole.add(xs[k]);
    (k < 700 ? a : k < 2100 ? b : c).add(xs[k]);
  }
  SimSummary left = a;
  left.merge(b);
  left.merge(c);
  SimSummary bc = b;
  bc.merge(c);
  SimSummary right = a;
  right.merge(bc);
  SimSummary reversed = c;
  reversed.merge(b);
  reversed.merge(a);

  // Two-pass central moments as the oracle.
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  for (const SimSummary* s : {&whole, &left, &right, &reversed}) {
    CHECK(s->count() == 3000);
    CHECK(std::abs(s->mean() - mean) < 1e-10);
    CHECK(std::abs(s->variance() - m2 / (n - 1)) < 1e-10);
    CHECK(std::abs(s->m3() - m3 / n) < 1e-10);
    CHECK(std::abs(s->m4() - m4 / n) < 1e-10);
  }
  SimSummary empty;
  empty.merge(a);
  CHECK(empty.mean() == a.mean());
  a.merge(SimSummary{});
  CHECK(a.count() == 700);
  CHECK(SimSummary{}.variance() == 0.0);
}

TEST_CASE("experiments") {
  ExperimentConfig cfg;
  cfg.n = 1000;
  cfg.reps = 1;
  cfg.seed = 99;
  const auto one = run_experiment(cfg);
  RandomStream rng = derive_stream(99, 0);
  CHECK(one.summary.mean() == static_cast<double>(sample_leaf_height(1000, Variant::discrete, rng).height));
  CHECK(one.values.size() == 1);

  cfg.reps = 20000;
  cfg.variant = Variant::continuous;
  cfg.workers = 1;
  const auto w1 = run_experiment(cfg);
  cfg.workers = 8;
  const auto w8 = run_experiment(cfg);
  CHECK(w1.summary.mean() == w8.summary.mean());
  CHECK(w1.summary.variance() == w8.summary.variance());
  CHECK(w1.summary.m4() == w8.summary.m4());
  CHECK(w1.values == w8.values);
  CHECK_FALSE(w1.subsampled);

  cfg.retain_capacity = 5000;
  const auto sub = run_experiment(cfg);
  CHECK(sub.subsampled);
  CHECK(sub.values.size() == 5000);
  CHECK(sub.summary.mean() == w1.summary.mean());
  cfg.workers = 3;
  CHECK(run_experiment(cfg).values == sub.values);
  std::multiset<double> all(w1.values.begin(), w1.values.end());
  for (double v : sub.values) CHECK(all.count(v) > 0);

  ExperimentConfig bad;
  bad.reps = 0;
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
  bad.reps = 1;
  bad.workers = 0;
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("statistics helpers") {
  RandomStream rng(55, 0);
  std::vector<double> z(100000);
  for (auto& x : z) x = normal_draw(rng);
  CHECK(ks_normal(z, 0.0, 1.0) < 0.01);
  CHECK(ks_normal(z, 0.5, 1.0) > 0.1);
  CHECK_THROWS_AS(ks_normal(std::vector<double>{}, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(ks_normal(z, 0.0, 0.0), DomainError);

  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
  CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494).epsilon(1e-2));

  std::vector<double> a(z.begin(), z.begin() + 50000), b(z.begin() + 50000, z.end());
  CHECK(ks_two_sample(a, b).p_value > 1e-3);
  for (auto& x : b) x += 0.1;
  CHECK(ks_two_sample(a, b).p_value < 1e-6);

  const std::vector<std::int64_t> c1{100, 200, 300, 400}, c2{210, 390, 610, 790};
  CHECK(chi_square_two_sample(c1, c2).p_value > 0.05);
  const std::vector<std::int64_t> c3{400, 300, 200, 100};
  CHECK(chi_square_two_sample(c1, c3).p_value < 1e-6);
}
