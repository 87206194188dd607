#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

#include "betasplit/summation.hpp"

namespace betasplit::detail {

// Sum of term(k) for k in [first, last). Fixed-size chunks are summed with
// compensation, possibly on several threads, then combined in chunk order,
// so the result does not depend on the thread count.
template <class Term>
double chunked_sum(std::int64_t first, std::int64_t last, Term term) {
  constexpr std::int64_t kChunk = 1 << 16;
  if (last <= first) return 0.0;
  const std::int64_t chunks = (last - first + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  auto work = [&](std::int64_t start, std::int64_t stride) {
    for (std::int64_t c = start; c < chunks; c += stride) {
      CompensatedSum s;
      const std::int64_t lo = first + c * kChunk;
      const std::int64_t hi = std::min(last, lo + kChunk);
      for (std::int64_t k = lo; k < hi; ++k) s.add(term(k));
      partial[static_cast<std::size_t>(c)] = s.value();
    }
  };
  const auto hw = static_cast<std::int64_t>(std::max(1u, std::thread::hardware_concurrency()));
  const std::int64_t threads = std::min<std::int64_t>(hw, chunks);
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::int64_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  CompensatedSum total;
  for (double p : partial) total.add(p);
  return total.value();
}

}  // namespace betasplit::detail
