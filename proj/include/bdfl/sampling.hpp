#pragma once

#include <cstdint>

#include "bdfl/common.hpp"

namespace bdfl {

// Fixed substream ids, one per consumer, so a single run seed drives every
// Monte-Carlo stream without overlap.
namespace stream {
inline constexpr std::uint64_t kSchur = 1;
inline constexpr std::uint64_t kLowerSymbol = 2;
inline constexpr std::uint64_t kCkmr = 3;
inline constexpr std::uint64_t kClassicalFreeEnergy = 4;
inline constexpr std::uint64_t kBerezinLieb = 5;
inline constexpr std::uint64_t kGibbsMarginal = 6;
inline constexpr std::uint64_t kHartreeStarts = 7;
inline constexpr std::uint64_t kRandomStates = 8;
inline constexpr std::uint64_t kMeanFieldStarts = 9;
inline constexpr std::uint64_t kUpperSymbols = 10;
}  // namespace stream

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, counter, lane).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

  std::uint64_t bits(std::uint64_t counter, std::uint64_t lane) const;
  /// Uniform on (0, 1].
  double uniform(std::uint64_t counter, std::uint64_t lane) const;
  /// Standard real normal (Box-Muller on lanes 2*lane, 2*lane + 1).
  double normal(std::uint64_t counter, std::uint64_t lane) const;
  /// Standard circular complex normal, E|z|^2 = 1.
  cplx complex_normal(std::uint64_t counter, std::uint64_t lane) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform points on the unit sphere of C^d: normalized i.i.d. complex
/// Gaussians. Sample i depends only on (seed, stream, i).
class SphereSampler {
 public:
  SphereSampler(int d, std::uint64_t seed, std::uint64_t stream_id = 0, std::uint64_t counter = 0);

  OneBodyVector sample(std::uint64_t index) const;
  OneBodyVector next();

  int dim() const { return d_; }
  std::uint64_t seed() const { return rng_.seed(); }
  std::uint64_t stream_id() const { return rng_.stream_id(); }
  std::uint64_t counter() const { return counter_; }
  /// Reserve `count` consecutive indices and return the first.
  std::uint64_t advance(std::uint64_t count);

 private:
  int d_;
  CounterRng rng_;
  std::uint64_t counter_;
};

}  // namespace bdfl
