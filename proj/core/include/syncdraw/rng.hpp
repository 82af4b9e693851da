#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace syncdraw {

/// Deterministic random source.
///
/// Wraps std::mt19937_64 (whose output sequence is pinned by the
/// standard) and derives all variates from the raw 64-bit stream
/// instead of std::*_distribution, whose outputs vary between
/// standard-library implementations. Identical seeds therefore give
/// identical draws everywhere, which the dataset/training determinism
/// contracts rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent per-item stream, e.g. one per synthesized video, so
  /// that parallel and serial generation consume identical values.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive. Modulo reduction; the bias
  /// is immaterial for the small ranges used here and keeps the mapping
  /// platform-stable.
  int uniform_int(int lo, int hi);

  /// Standard normal via Box-Muller. No cached spare value, so the
  /// engine state alone captures the generator state for checkpoints.
  double normal();

  /// Textual engine state (portable per the standard's formatting).
  std::string serialize() const;
  void deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace syncdraw
