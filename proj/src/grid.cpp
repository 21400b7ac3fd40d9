#include "dmr/grid.hpp"

namespace dmr {

TimeGrid make_grid(int n_steps) {
  if (n_steps < 1) throw InvalidArgument("make_grid: n_steps must be >= 1");
  TimeGrid g;
  g.n_steps = n_steps;
  g.dt = 1.0 / n_steps;
  g.times.resize(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) g.times[k] = static_cast<double>(k) / n_steps;
  g.times[n_steps] = 1.0;
  return g;
}

}  // namespace dmr
