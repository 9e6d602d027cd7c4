#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>

namespace sapgan {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by a 64-bit key; draws are a pure function of
/// (key, counter), so two streams built from the same seed produce the same
/// sequence on every platform. split() derives a child stream whose key
/// depends only on the parent key and the given name, never on how many
/// values the parent has already produced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  Rng split(std::string_view name) const;
  Rng split(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (no cached second value).
  double normal();
  /// Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n);

  template <class It>
  void shuffle(It first, It last) {
    auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  std::size_t used_ = 4;
};

}  // namespace sapgan
