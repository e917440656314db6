#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace qtb {

/// xoshiro256** generator seeded through splitmix64.
///
/// All derived draws (uniform, normal, shuffles) are implemented here rather
/// than through <random> distributions, whose algorithms differ between
/// standard library vendors. The same seed therefore yields the same stream
/// on every platform.
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (no cached second value).
  double normal();

  /// Uniform integer in [0, bound). bound must be positive.
  std::size_t below(std::size_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }
  State state() const { return s_; }
  void set_state(const State& s) { s_ = s; }

 private:
  std::uint64_t seed_;
  State s_{};
};

}  // namespace qtb
