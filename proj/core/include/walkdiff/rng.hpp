#pragma once

#include <cstdint>
#include <random>

namespace walkdiff {

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded random stream with deterministic, order-independent child streams.
///
/// Every sampling operation in this library takes an explicit RngStream, so
/// identical seeds give identical results. Concurrent users must hold
/// independent streams; the splitting scheme is one child stream per path
/// (or chain, or permutation) index, derived from the parent key alone.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /// Independent stream keyed by (this stream's key, index).
  RngStream child(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01();

  /// Standard normal via Box-Muller (pairs are cached).
  double normal();

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace walkdiff
