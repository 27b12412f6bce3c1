#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace chartpulse {

/// Reproducible generator with independent substreams.
///
/// Each (seed, stream) pair seeds its own std::mt19937_64 through
/// std::seed_seq; both algorithms are fully specified by the standard, so
/// output is identical across platforms and library implementations. Uniform
/// doubles are built from the top 53 bits, never through the
/// implementation-defined std distributions.
class Rng {
 public:
  /// Recorded in run manifests; bump when the derivation scheme changes.
  static constexpr std::string_view kName = "mt19937_64+seed_seq/v1";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_positive() { return 1.0 - uniform(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace chartpulse
