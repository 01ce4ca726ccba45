#pragma once

#include <cstdint>

namespace sagsim::rng {

/// Counter-based pseudo-random stream.
///
/// Each draw mixes (key, counter) through the splitmix64 finalizer, so a
/// stream is a pure function of its key and how many values were taken.
/// Streams derived from the same master seed but different (setting,
/// repetition) indices are independent for Monte Carlo purposes, and the
/// layout makes results invariant under parallel execution order.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  /// Stream for Monte Carlo window (setting, repetition) under a master seed.
  static Stream for_trial(std::uint64_t master_seed, std::uint64_t setting,
                          std::uint64_t repetition);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit();

  bool next_bernoulli(double p) { return next_unit() < p; }

  /// Uniform double in [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// splitmix64 finalizer; the mixing primitive behind Stream.
std::uint64_t mix64(std::uint64_t x);

/// Exact Poisson sample. Uses Knuth's product method in chunks so that
/// large means never underflow; cost is O(mean) uniforms.
std::uint64_t poisson(Stream& s, double mean);

}  // namespace sagsim::rng
