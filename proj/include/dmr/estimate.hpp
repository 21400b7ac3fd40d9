#pragma once

#include <cstdint>
#include <vector>

#include "dmr/common.hpp"

namespace dmr {

/// Monte Carlo estimate: sample mean, standard error of the mean, sample count.
struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;

  /// Two-pass mean/stderr in fixed index order (bit-stable across runs).
  static MCEstimate of(const std::vector<double>& xs);
};

}  // namespace dmr
