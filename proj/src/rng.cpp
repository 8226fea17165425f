#include "fae/rng.hpp"

#include <cmath>

#include "fae/errors.hpp"

namespace fae {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t SeededRng::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double SeededRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::below(std::uint64_t bound) noexcept {
  // Reject draws below 2^64 mod bound so the modulus is unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double SeededRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t state = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  return splitmix64(state);
}

Matrix xavier_normal(Index rows, Index cols, SeededRng& rng) {
  if (rows < 1 || cols < 1) throw ContractError("xavier_normal: rows and cols must be >= 1");
  const double stddev = std::sqrt(2.0 / static_cast<double>(rows + cols));
  Matrix out(rows, cols);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = stddev * rng.normal();
  return out;
}

Vector uniform_init(Index len, double lo, double hi, SeededRng& rng) {
  if (!(lo < hi)) throw ContractError("uniform_init: requires lo < hi");
  if (len < 0) throw ContractError("uniform_init: negative length");
  Vector out(len);
  const double below_hi = std::nextafter(hi, lo);
  for (Index i = 0; i < len; ++i) {
    const double r = lo + (hi - lo) * rng.uniform();
    out[i] = r < hi ? r : below_hi;
  }
  return out;
}

}  // namespace fae
