#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fae/linalg.hpp"

namespace fae {

/// xoshiro256** seeded through splitmix64, with its own uniform and normal
/// transforms so a (seed, algorithm) pair replays identically on every
/// platform and standard library.
class SeededRng {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256starstar-splitmix64-polar";

  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::string_view algorithm() const noexcept { return kAlgorithm; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer on [0, bound), unbiased. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept;

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stream seed for the i-th independent child of `seed` (per-tree, per-repeat seeds).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// I.i.d. N(0, 2 / (rows + cols)) entries.
Matrix xavier_normal(Index rows, Index cols, SeededRng& rng);

/// I.i.d. uniform entries on [lo, hi). Throws ContractError unless lo < hi.
Vector uniform_init(Index len, double lo, double hi, SeededRng& rng);

}  // namespace fae
