#include "betasplit/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "betasplit/errors.hpp"
#include "betasplit/harmonic.hpp"
#include "betasplit/summation.hpp"

namespace betasplit {

double ell(std::int64_t n) {
  if (n < 1) throw DomainError("ell: n must be >= 1");
  return n == 1 ? 1.0 : std::log(static_cast<double>(n));
}

double exp_abs_moment1(double shift, double rate) {
  if (shift <= 0.0) return 1.0 / rate - shift;
  return shift - 1.0 / rate + 2.0 * std::exp(-rate * shift) / rate;
}

double exp_abs_moment3(double shift, double rate) {
  const double r3 = rate * rate * rate;
  if (shift <= 0.0) {
    const double y = -rate * shift;
    return (6.0 + y * (6.0 + y * (3.0 + y))) / r3;
  }
  const double x = rate * shift;
  // E|t-c|^3 = E(t-c)^3 + 2 E[(c-t)^3; t < c].
  return (x * (6.0 + x * (x - 3.0)) - 6.0 + 12.0 * std::exp(-x)) / r3;
}

ContractionDiagnostics contraction_diagnostics(std::int64_t n, const MomentSeries& moments,
                                               const ConstantsSet& c, SigmaSource g_source) {
  if (n < 2 || n > moments.max_n()) {
    throw DomainError("contraction_diagnostics: n = " + std::to_string(n) +
                      " outside the moment table");
  }
  const bool discrete = moments.variant == Variant::discrete;
  const double lead = discrete ? c.A_star : c.A_hat_star;
  const double l = ell(n);
  const double scale = std::sqrt(lead) * (discrete ? std::pow(l, 1.5) : std::sqrt(l));
  const double theta = HarmonicTable::shared().exact(n - 1);
  const auto& mu = moments.mu;
  const auto& s2 = moments.sigma2;

  const double tau = std::sqrt(s2[n]) / scale;
  const double tau_dev = std::abs(tau - 1.0);

  CompensatedSum b3, g3, b1, bg, tg;
  for (std::int64_t i = 1; i < n; ++i) {
    const double p = 1.0 / (static_cast<double>(n - i) * theta);
    double sigma_i;
    if (g_source == SigmaSource::exact) {
      sigma_i = std::sqrt(s2[i]);
    } else {
      const double li = std::log(static_cast<double>(i));
      sigma_i = std::sqrt(lead * (discrete ? li * li * li : li));
    }
    const double G = sigma_i / scale;
    const double g_dev = std::abs(G - 1.0);

    // E|b|, E|b|^3 given I_n = i.
    double abs_b1, abs_b3;
    if (discrete) {
      const double b = std::abs(1.0 - mu[n] + mu[i]) / scale;
      abs_b1 = b;
      abs_b3 = b * b * b;
    } else {
      const double shift = mu[n] - mu[i];
      abs_b1 = exp_abs_moment1(shift, theta) / scale;
      abs_b3 = exp_abs_moment3(shift, theta) / (scale * scale * scale);
    }
    b3.add(p * abs_b3);
    g3.add(p * g_dev * g_dev * g_dev);
    b1.add(p * abs_b1);
    bg.add(p * abs_b1 * g_dev);
    tg.add(p * std::pow(std::abs(tau * tau - G * G), 1.5));
  }

  ContractionDiagnostics d;
  d.n = n;
  d.terms = {b3.value(), tau_dev * tau_dev * tau_dev, g3.value(), tau_dev * b1.value(), bg.value(),
             tg.value()};
  CompensatedSum total;
  for (double t : d.terms) total.add(t);
  d.total = total.value();
  d.scaled = d.total * std::pow(std::log(static_cast<double>(n)), 2.5);
  return d;
}

RemainderFit decay_check(std::span<const std::int64_t> grid, const SequenceFn& total) {
  return remainder_check(
      total, [](std::int64_t) { return 0.0; },
      [](std::int64_t n) { return std::pow(std::log(static_cast<double>(n)), 2.5); }, grid);
}

RemainderFit decay_check(std::span<const std::int64_t> grid, Variant variant,
                         const ConstantsSet& c, TableMode mode) {
  if (grid.empty()) throw DomainError("decay_check: empty grid");
  const std::int64_t top = *std::max_element(grid.begin(), grid.end());
  const MomentSeries moments = moment_series(top, variant, mode);
  return decay_check(grid, [&](std::int64_t n) {
    return contraction_diagnostics(n, moments, c).total;
  });
}

}  // namespace betasplit
