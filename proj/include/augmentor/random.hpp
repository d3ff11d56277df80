#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace augmentor {

/// Mixes a base seed with stream indices into an independent 64-bit seed.
/// Used to give every (repetition, ratio, iteration, ...) its own stream so
/// results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> streams);

/// Portable random source. The engine is std::mt19937_64, whose output is
/// fully specified; uniform and normal draws are computed here rather than
/// through the <random> distributions, whose algorithms differ between
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform();

  /// Standard normal via Box-Muller, one output per pair of uniforms.
  double normal();

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle of an index permutation 0..n-1.
  template <typename Container>
  void shuffle(Container& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace augmentor
