#include "betasplit/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include "betasplit/summation.hpp"

namespace betasplit {
namespace {

constexpr std::size_t kDirectThreshold = 64;
constexpr std::int64_t kLeafBlock = 48;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t count) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * count)));
}

struct PlanPair {
  fftw_plan forward;
  fftw_plan backward;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
// FFTW_ESTIMATE keeps plans (and hence results) reproducible run to run.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [size, plans] : plans_) {
      fftw_destroy_plan(plans.forward);
      fftw_destroy_plan(plans.backward);
    }
  }

  PlanPair get(std::size_t size) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(size); it != plans_.end()) return it->second;
    auto real = fftw_buffer<double>(size);
    auto spec = fftw_buffer<fftw_complex>(size / 2 + 1);
    const int n = static_cast<int>(size);
    PlanPair plans{fftw_plan_dft_r2c_1d(n, real.get(), spec.get(), FFTW_ESTIMATE),
                   fftw_plan_dft_c2r_1d(n, spec.get(), real.get(), FFTW_ESTIMATE)};
    plans_.emplace(size, plans);
    return plans;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

std::vector<double> direct_convolution(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
  }
  return out;
}

std::vector<double> fft_convolution(std::span<const double> a, std::span<const double> b) {
  const std::size_t out_size = a.size() + b.size() - 1;
  std::size_t size = 1;
  while (size < out_size) size <<= 1;
  const std::size_t bins = size / 2 + 1;
  const PlanPair plans = plan_cache().get(size);

  auto ra = fftw_buffer<double>(size);
  auto rb = fftw_buffer<double>(size);
  auto fa = fftw_buffer<fftw_complex>(bins);
  auto fb = fftw_buffer<fftw_complex>(bins);
  std::fill_n(ra.get(), size, 0.0);
  std::fill_n(rb.get(), size, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());

  fftw_execute_dft_r2c(plans.forward, ra.get(), fa.get());
  fftw_execute_dft_r2c(plans.forward, rb.get(), fb.get());
  for (std::size_t k = 0; k < bins; ++k) {
    const std::complex<double> x(fa[k][0], fa[k][1]);
    const std::complex<double> y(fb[k][0], fb[k][1]);
    const auto z = x * y;
    fa[k][0] = z.real();
    fa[k][1] = z.imag();
  }
  fftw_execute_dft_c2r(plans.backward, fa.get(), ra.get());

  std::vector<double> out(out_size);
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t i = 0; i < out_size; ++i) out[i] = ra[i] * scale;
  return out;
}

class OnlineSolver {
 public:
  OnlineSolver(std::span<double> x, std::span<const double> kernel,
               const std::function<double(std::int64_t, double)>& finalize)
      : x_(x), kernel_(kernel), finalize_(finalize), pending_(x.size(), 0.0) {}

  void solve(std::int64_t lo, std::int64_t hi) {
    if (hi - lo <= kLeafBlock) {
      for (std::int64_t n = lo; n < hi; ++n) {
        CompensatedSum s(pending_[n]);
        for (std::int64_t k = lo; k < n; ++k) s.add(x_[k] * kernel_[n - k]);
        x_[n] = finalize_(n, s.value());
      }
      return;
    }
    const std::int64_t mid = lo + (hi - lo) / 2;
    solve(lo, mid);
    // Contributions of x[lo..mid) to indices [mid..hi): lags 1..hi-lo-1.
    const auto block = linear_convolution(
        std::span<const double>(x_.data() + lo, static_cast<std::size_t>(mid - lo)),
        kernel_.subspan(1, static_cast<std::size_t>(hi - lo - 1)));
    for (std::int64_t n = mid; n < hi; ++n) pending_[n] += block[n - lo - 1];
    solve(mid, hi);
  }

 private:
  std::span<double> x_;
  std::span<const double> kernel_;
  const std::function<double(std::int64_t, double)>& finalize_;
  std::vector<double> pending_;
};

}  // namespace

std::vector<double> linear_convolution(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  if (std::min(a.size(), b.size()) <= kDirectThreshold) return direct_convolution(a, b);
  return fft_convolution(a, b);
}

void solve_online_convolution(std::span<double> x, std::span<const double> kernel,
                              const std::function<double(std::int64_t, double)>& finalize) {
  if (x.size() < 2) return;
  OnlineSolver solver(x, kernel, finalize);
  solver.solve(1, static_cast<std::int64_t>(x.size()));
}

}  // namespace betasplit
