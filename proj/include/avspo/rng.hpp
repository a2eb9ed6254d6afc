#pragma once

#include <cstdint>
#include <random>

namespace avspo {

/// SplitMix64 finalizer. Used to derive independent substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seeded generator for one substream. Sampling never touches global state,
/// so two streams derived from the same key always produce the same draws.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Substream tags separate the purposes a run draws randomness for.
enum class StreamTag : std::uint64_t {
  kGroupSampling = 1,
  kBatchSelection = 2,
  kEnvironment = 3,
};

/// Derives a substream seed from (run seed, iteration, index, purpose).
/// The mapping is a pure function, so workers can derive their own streams
/// without coordination.
constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t iteration,
                                    std::uint64_t index, StreamTag tag) {
  std::uint64_t h = splitmix64(run_seed ^ 0xA5A5A5A5DEADBEEFull);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ iteration);
  h = splitmix64(h ^ (index * 0x9E3779B97F4A7C15ull));
  return h;
}

inline Stream make_stream(std::uint64_t run_seed, std::uint64_t iteration, std::uint64_t index,
                          StreamTag tag) {
  return Stream(derive_seed(run_seed, iteration, index, tag));
}

}  // namespace avspo
