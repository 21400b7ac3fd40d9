#pragma once

#include <vector>

#include "dmr/common.hpp"

namespace dmr {

/// Uniform discretization of [0,1] with N cells, t_k = k/N.
struct TimeGrid {
  int n_steps = 0;
  double dt = 0.0;
  std::vector<double> times;  // t_0 .. t_N
};

TimeGrid make_grid(int n_steps);

}  // namespace dmr
