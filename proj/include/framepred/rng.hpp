#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace framepred {

/// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
/// is pinned by the standard) and derives uniform values without the
/// library distributions, which are implementation-defined. Same seed,
/// same sequence, on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  /// Independent stream derived from a master seed. Streams with different
  /// ids are decorrelated; used to decouple e.g. D-batch and G-batch
  /// sampling from one master seed.
  static Rng stream(uint64_t master_seed, uint64_t stream_id);

  uint64_t next_u64();

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n). Unbiased (mask + reject).
  int64_t uniform_int(int64_t n);

  /// Fair coin.
  bool coin();

  std::string save_state() const;
  void load_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace framepred
