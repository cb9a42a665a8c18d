#pragma once

#include <cstdint>
#include <random>

namespace solhmc {

/// Seedable random stream. A (seed, stream) pair fully determines the sequence,
/// so independent chains are obtained by splitting one 64-bit seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Integer uniform on [lo, hi].
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  /// Child stream; the same (parent seed, index) always yields the same child.
  Rng split(std::uint64_t index) const { return Rng(seed_, mix(stream_, index + 1)); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static std::uint64_t splitmix64(std::uint64_t x);

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace solhmc
