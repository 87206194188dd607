#include "betasplit/harmonic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "betasplit/errors.hpp"
#include "betasplit/summation.hpp"

namespace betasplit {

HarmonicTable::HarmonicTable(std::int64_t exact_limit, bool asymptotic_mode)
    : asymptotic_mode_(asymptotic_mode) {
  if (exact_limit < 1) throw DomainError("harmonic table needs exact_limit >= 1");
  values_.resize(static_cast<std::size_t>(exact_limit) + 1);
  values_[0] = 0.0;
  CompensatedSum running;
  for (std::int64_t i = 1; i <= exact_limit; ++i) {
    running.add(1.0 / static_cast<double>(i));
    values_[static_cast<std::size_t>(i)] = running.value();
  }
}

const HarmonicTable& HarmonicTable::shared() {
  static const HarmonicTable table;
  return table;
}

double HarmonicTable::asymptotic(double n) {
  return std::log(n) + std::numbers::egamma + 0.5 / n - 1.0 / (12.0 * n * n);
}

double HarmonicTable::exact(std::int64_t n) const {
  if (n < 0 || n > exact_limit()) {
    throw DomainError("harmonic: n = " + std::to_string(n) + " outside exact table");
  }
  return values_[static_cast<std::size_t>(n)];
}

double HarmonicTable::operator()(std::int64_t n) const {
  if (n >= 0 && n <= exact_limit()) return values_[static_cast<std::size_t>(n)];
  if (n < 0) throw DomainError("harmonic: negative argument " + std::to_string(n));
  if (!asymptotic_mode_) {
    throw DomainError("harmonic: n = " + std::to_string(n) +
                      " beyond exact table and asymptotic mode is off");
  }
  return asymptotic(static_cast<double>(n));
}

double harmonic(std::int64_t n) { return HarmonicTable::shared()(n); }

}  // namespace betasplit
