#pragma once

#include <cstdint>
#include <random>

namespace spreadlab {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// 64-bit Mersenne Twister with the handful of draws the library needs.
/// Uniform and exponential draws are computed from raw engine bits so the
/// results do not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream `stream_id` of master seed `master`. Streams with different ids
  /// are statistically independent; the mapping is fixed (counter based).
  static Rng stream(std::uint64_t master, std::uint64_t stream_id) {
    return Rng(mix_seed(master, stream_id));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_open() { return 1.0 - uniform(); }
  /// Unit-mean exponential.
  double exponential();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  std::uint64_t poisson(double mean);
  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spreadlab
