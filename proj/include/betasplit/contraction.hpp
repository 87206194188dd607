#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "betasplit/asymptotics.hpp"
#include "betasplit/exact_engine.hpp"

namespace betasplit {

/// Expectations of the six normalized terms bounding the distance between the
/// one-step recursion and its normal counterpart at size n:
///   E|b|^3, |tau-1|^3, E|G-1|^3, E|b (tau-1)|, E|b (G-1)|, E|tau^2 - G^2|^{3/2}
/// with, in the discrete model,
///   b   = (1 - mu_n + mu_{I_n}) / (sqrt(A*) l_n^{3/2}),
///   tau = sigma_n / (sqrt(A*) l_n^{3/2}),   G = sigma_{I_n} / (sqrt(A*) l_n^{3/2}),
/// and in the continuous model the toll 1 replaced by t_n ~ Exp(theta(n-1)),
/// A* by A^*, and l_n^{3/2} by l_n^{1/2}.
struct ContractionDiagnostics {
  std::int64_t n = 0;
  std::array<double, 6> terms{};
  double total = 0.0;
  double scaled = 0.0;  ///< total * log^{5/2} n
};

/// Where sigma_{I_n} inside G comes from.
enum class SigmaSource {
  exact,          ///< the exact variance table
  leading_order   ///< only the leading term A* log^3 i (A^* log i, continuous)
};

/// l_n = log n + 1{n = 1}.
double ell(std::int64_t n);

/// Exact finite sums over I_n (and closed-form exponential moments of t_n in
/// the continuous model); no sampling. The variant is taken from `moments`.
ContractionDiagnostics contraction_diagnostics(std::int64_t n, const MomentSeries& moments,
                                               const ConstantsSet& c,
                                               SigmaSource g_source = SigmaSource::exact);

/// E|t - c| and E|t - c|^3 for t ~ Exp(rate).
double exp_abs_moment1(double shift, double rate);
double exp_abs_moment3(double shift, double rate);

/// Boundedness of total * log^{5/2} n over `grid` (factor-2 no-growth rule).
/// Tables are computed once up to max(grid).
RemainderFit decay_check(std::span<const std::int64_t> grid, Variant variant,
                         const ConstantsSet& c, TableMode mode = TableMode::fast);
/// Same rule applied to an arbitrary total(n) sequence.
RemainderFit decay_check(std::span<const std::int64_t> grid, const SequenceFn& total);

}  // namespace betasplit
