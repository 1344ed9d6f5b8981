#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

namespace gbmcheck {

/// SplitMix64 (Steele, Lea and Flood). Fully specified integer arithmetic, so
/// streams are bit-identical across platforms and standard libraries, unlike
/// std::normal_distribution.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for item `index` under `seed`.
  static constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return SplitMix64(mix(seed ^ mix(index + 0x632BE59BD9B4E019ULL)));
  }

 private:
  std::uint64_t state_;
};

/// Uniform on (0, 1], 53-bit resolution.
inline double uniform_open0(SplitMix64& rng) noexcept {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Box-Muller standard normals; the sine branch is cached for the next call.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) noexcept : rng_(seed) {}
  explicit NormalStream(SplitMix64 rng) noexcept : rng_(rng) {}

  double operator()() noexcept {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_open0(rng_)));
    const double angle = 2.0 * std::numbers::pi * uniform_open0(rng_);
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

  SplitMix64& engine() noexcept { return rng_; }

 private:
  SplitMix64 rng_;
  std::optional<double> spare_;
};

}  // namespace gbmcheck
