#include "dmr/rng.hpp"

#include <cmath>
#include <numbers>

namespace dmr {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Stafford mix13 variant).
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(RngSpec spec) {
  key_ = mix64(spec.seed + kGolden) ^ mix64(spec.stream_id * kGolden + 0x1D8E4E27C47D124FULL);
}

std::uint64_t CounterRng::next_u64() {
  ctr_ += kGolden;
  return mix64(key_ + ctr_);
}

double CounterRng::uniform() {
  // 53-bit mantissa shifted into (0,1]; never zero so log() stays finite.
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

}  // namespace dmr
