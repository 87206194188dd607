#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace betasplit {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by a 64-bit key (the experiment seed) and a 64-bit
/// stream id (typically the replicate index). Draw k of stream (key, id) is a
/// pure function of (key, id, k), so replicates can be evaluated in any order
/// and on any number of workers without changing results.
///
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t key, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_positive();
  /// Exponential with the given rate, by inverse transform -log(U)/rate, U in (0,1].
  double exponential(double rate);
  bool coin();

  std::uint64_t key() const { return key_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Per-replicate stream derived from (seed, replicate index).
inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t rep) {
  return RandomStream(seed, rep);
}

}  // namespace betasplit
