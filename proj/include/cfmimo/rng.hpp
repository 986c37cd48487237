#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace cfmimo {

/// Derives an independent substream seed from (master seed, stream tag).
/// Two splitmix64 rounds; any (seed, tag) change reseeds the whole stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Deterministic random source. std::mt19937_64 pins the raw bit sequence
/// across toolchains; the standard library distributions do not, so the
/// uniform and normal transforms are fixed here (53-bit uniform, Box-Muller).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch).
  double normal() {
    const auto [z0, z1] = normal_pair();
    (void)z1;
    return z0;
  }

  /// Circular complex Gaussian with unit variance, E|z|^2 = 1.
  std::complex<double> cnormal() {
    const auto [z0, z1] = normal_pair();
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    return {z0 * inv_sqrt2, z1 * inv_sqrt2};
  }

  /// Unbiased integer on [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::pair<double, double> normal_pair();

  std::mt19937_64 engine_;
};

// Substream tags for one simulation instance (see netmodel).
inline constexpr std::uint64_t kTopologyStream = 1;
inline constexpr std::uint64_t kShadowingStream = 2;
inline constexpr std::uint64_t kSmallScaleStream = 3;
inline constexpr std::uint64_t kCsiErrorStream = 4;
// Tag base for per-instance seeds derived from a dataset master seed.
inline constexpr std::uint64_t kInstanceStreamBase = 1000;

}  // namespace cfmimo
