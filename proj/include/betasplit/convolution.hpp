#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace betasplit {

/// Full linear convolution, size a.size() + b.size() - 1. Small inputs are
/// convolved directly, large ones through a real FFT.
std::vector<double> linear_convolution(std::span<const double> a, std::span<const double> b);

/// Solves the online (causal) convolution recurrence
///
///   x[n] = finalize(n, sum_{k=1}^{n-1} x[k] * kernel[n-k]),  n = 1..N,
///
/// where x and kernel are indexed from 1 (entry 0 is ignored and x[0] is left
/// untouched). Divide-and-conquer over index ranges with FFT block products,
/// O(N log^2 N). Deterministic for a given N.
void solve_online_convolution(std::span<double> x, std::span<const double> kernel,
                              const std::function<double(std::int64_t, double)>& finalize);

}  // namespace betasplit
