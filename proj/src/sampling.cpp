#include "bdfl/sampling.hpp"

#include <cmath>
#include <numbers>

namespace bdfl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t counter, std::uint64_t lane) const {
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ (stream_ * 0xd1b54a32d192ed03ULL));
  h = splitmix64(h ^ counter);
  return splitmix64(h ^ (lane * 0x8cb92ba72f3d8dd7ULL + 0x632be59bd9b4e019ULL));
}

double CounterRng::uniform(std::uint64_t counter, std::uint64_t lane) const {
  return (static_cast<double>(bits(counter, lane) >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter, std::uint64_t lane) const {
  const double u1 = uniform(counter, 2 * lane);
  const double u2 = uniform(counter, 2 * lane + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

cplx CounterRng::complex_normal(std::uint64_t counter, std::uint64_t lane) const {
  const double u1 = uniform(counter, 2 * lane);
  const double u2 = uniform(counter, 2 * lane + 1);
  const double r = std::sqrt(-std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

SphereSampler::SphereSampler(int d, std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter)
    : d_(d), rng_(seed, stream_id), counter_(counter) {
  if (d < 1) throw Error("SphereSampler: d must be >= 1");
}

OneBodyVector SphereSampler::sample(std::uint64_t index) const {
  OneBodyVector u(d_);
  for (int i = 0; i < d_; ++i) u[i] = rng_.complex_normal(index, static_cast<std::uint64_t>(i));
  return u / u.norm();
}

OneBodyVector SphereSampler::next() { return sample(counter_++); }

std::uint64_t SphereSampler::advance(std::uint64_t count) {
  const std::uint64_t first = counter_;
  counter_ += count;
  return first;
}

}  // namespace bdfl
