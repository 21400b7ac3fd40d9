#pragma once

#include <cstdint>

namespace dmr {

/// Identifies one random stream: (seed, stream_id, draw index) pins every
/// variate, independent of thread scheduling. Streams are keyed per path.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// Counter-based generator: SplitMix64 over a per-stream key. Stateless up to
/// the draw counter, so parallel path generation stays bit-reproducible.
class CounterRng {
 public:
  explicit CounterRng(RngSpec spec);

  std::uint64_t next_u64();
  /// Uniform on (0,1].
  double uniform();
  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal();

 private:
  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace dmr
