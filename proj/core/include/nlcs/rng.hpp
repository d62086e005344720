#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace nlcs {

/// Counter-based generator: output n is a pure function of (key, n).
///
/// Streams are split deterministically with `substream`, so per-block or
/// per-cell generators never depend on how many draws another stream consumed.
/// Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double gaussian() noexcept;

  Rng substream(std::uint64_t id) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  Rng(std::uint64_t key, bool) noexcept : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::vector<double> gaussian_draws(Rng& rng, std::size_t n);

/// SplitMix64 finalizer; also used to derive per-cell seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace nlcs
