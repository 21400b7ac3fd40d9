#include "dmr/paths.hpp"

#include <cmath>

namespace dmr {

CameronMartinFn make_cameron_martin(std::vector<double> hdot, int dim, const TimeGrid& grid) {
  if (dim < 1) throw InvalidArgument("make_cameron_martin: dim must be >= 1");
  if (static_cast<int>(hdot.size()) != grid.n_steps * dim)
    throw InvalidArgument("make_cameron_martin: hdot shape mismatch with grid");
  CameronMartinFn h;
  h.n_steps = grid.n_steps;
  h.dim = dim;
  h.hdot = std::move(hdot);
  double s = 0.0;
  for (int k = 0; k < h.n_steps; ++k) {
    double r = 0.0;
    for (int j = 0; j < dim; ++j) r += h.hdot[idx2(k, j, dim)] * h.hdot[idx2(k, j, dim)];
    s += r * grid.dt;
  }
  h.h_norm_sq = s;
  return h;
}

double cm_norm_sq(const CameronMartinFn& h, const TimeGrid& grid) {
  if (h.n_steps != grid.n_steps || static_cast<int>(h.hdot.size()) != h.n_steps * h.dim)
    throw InvalidArgument("cm_norm_sq: shape mismatch between h and grid");
  double s = 0.0;
  for (int k = 0; k < h.n_steps; ++k) {
    double r = 0.0;
    for (int j = 0; j < h.dim; ++j) r += h.hdot[idx2(k, j, h.dim)] * h.hdot[idx2(k, j, h.dim)];
    s += r * grid.dt;
  }
  return s;
}

}  // namespace dmr
