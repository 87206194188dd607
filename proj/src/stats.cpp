#include "betasplit/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>

#include "betasplit/errors.hpp"

namespace betasplit {
namespace {

double chi_square_survival(double statistic, double dof) {
  if (dof < 1.0) return 1.0;
  const boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

TestResult chi_square_gof(std::span<const std::int64_t> observed, std::span<const double> probs) {
  if (observed.size() != probs.size()) throw DomainError("chi_square_gof: size mismatch");
  std::int64_t total = 0;
  for (auto c : observed) total += c;
  if (total == 0) throw DomainError("chi_square_gof: no observations");

  std::vector<std::pair<double, double>> bins;  // (observed, expected)
  double obs = 0.0, expct = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    obs += static_cast<double>(observed[i]);
    expct += probs[i] * static_cast<double>(total);
    if (expct >= 5.0) {
      bins.emplace_back(obs, expct);
      obs = expct = 0.0;
    }
  }
  if (expct > 0.0 || obs > 0.0) {
    if (bins.empty()) {
      bins.emplace_back(obs, expct);
    } else {
      bins.back().first += obs;
      bins.back().second += expct;
    }
  }
  TestResult r;
  for (auto [o, e] : bins) r.statistic += (o - e) * (o - e) / e;
  r.dof = static_cast<double>(bins.size()) - 1.0;
  r.p_value = chi_square_survival(r.statistic, r.dof);
  return r;
}

TestResult chi_square_two_sample(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  const std::size_t width = std::max(a.size(), b.size());
  auto at = [](std::span<const std::int64_t> v, std::size_t i) {
    return i < v.size() ? static_cast<double>(v[i]) : 0.0;
  };
  double total_a = 0.0, total_b = 0.0;
  for (std::size_t i = 0; i < width; ++i) {
    total_a += at(a, i);
    total_b += at(b, i);
  }
  if (total_a == 0.0 || total_b == 0.0) throw DomainError("chi_square_two_sample: empty sample");

  std::vector<std::pair<double, double>> bins;
  double ra = 0.0, rb = 0.0;
  for (std::size_t i = 0; i < width; ++i) {
    ra += at(a, i);
    rb += at(b, i);
    if (ra + rb >= 10.0) {
      bins.emplace_back(ra, rb);
      ra = rb = 0.0;
    }
  }
  if (ra + rb > 0.0) {
    if (bins.empty()) {
      bins.emplace_back(ra, rb);
    } else {
      bins.back().first += ra;
      bins.back().second += rb;
    }
  }
  const double ka = std::sqrt(total_b / total_a);
  const double kb = std::sqrt(total_a / total_b);
  TestResult r;
  for (auto [x, y] : bins) {
    const double d = ka * x - kb * y;
    r.statistic += d * d / (x + y);
  }
  r.dof = static_cast<double>(bins.size()) - 1.0;
  r.p_value = chi_square_survival(r.statistic, r.dof);
  return r;
}

double kolmogorov_survival(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double root = std::sqrt(ne);
  TestResult r;
  r.statistic = d;
  r.dof = ne;
  r.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return r;
}

double ks_normal(std::span<const double> values, double mu, double sigma) {
  if (values.empty()) throw DomainError("ks_normal: empty sample");
  if (!(sigma > 0.0)) throw DomainError("ks_normal: sigma must be > 0");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double phi = normal_cdf((sorted[i] - mu) / sigma);
    d = std::max({d, static_cast<double>(i + 1) / count - phi, phi - static_cast<double>(i) / count});
  }
  return d;
}

}  // namespace betasplit
