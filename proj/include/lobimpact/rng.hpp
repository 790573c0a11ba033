#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lobimpact {

// SplitMix64 finalizer; used to derive independent stream seeds from a root seed.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

// Counter-based seed derivation: the seed of a task depends only on the root
// seed and the task coordinates, never on scheduling order.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept;

namespace stream {
inline constexpr std::uint64_t market_ask = 1;
inline constexpr std::uint64_t market_bid = 2;
inline constexpr std::uint64_t queue_ask = 3;
inline constexpr std::uint64_t queue_bid = 4;
inline constexpr std::uint64_t metaorder = 5;
inline constexpr std::uint64_t continuation = 6;
inline constexpr std::uint64_t brownian = 7;
inline constexpr std::uint64_t noise = 8;
}  // namespace stream

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1]; safe to feed into log().
  double uniform() { return 1.0 - unit_(engine_); }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  double normal() { return normal_(engine_); }
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace lobimpact
