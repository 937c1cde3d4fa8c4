#pragma once

#include <cstdint>
#include <utility>

namespace stconv {

/// Counter-based generator: the n-th draw is a SplitMix64 hash of
/// (seed, n), so streams are identical on every platform and can be
/// split without shared state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 24 bits of resolution.
  float next_float() noexcept;
  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_double() noexcept;
  /// Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;
  bool bernoulli(double p) noexcept { return next_double() < p; }
  double normal() noexcept;

  /// Independent stream derived from this generator's seed and a key.
  Rng derive(std::uint64_t key) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, Rng& rng) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = static_cast<decltype(i)>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    using std::swap;
    swap(first[i], first[j]);
  }
}

}  // namespace stconv
