#pragma once

#include <functional>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/grid.hpp"

namespace dmr {

/// Driver increments: row k holds the d independent Normal(0, dt) draws of cell k.
struct BrownianPath {
  int n_steps = 0;
  int dim = 0;
  std::vector<double> inc;  // n_steps x dim

  double at(int k, int j) const { return inc[idx2(k, j, dim)]; }
  double& at(int k, int j) { return inc[idx2(k, j, dim)]; }
  const double* row(int k) const { return inc.data() + idx2(k, 0, dim); }
};

/// State trajectory on grid nodes, values[0] = initial condition.
struct StatePath {
  int n_steps = 0;
  int dim = 0;
  std::vector<double> val;  // (n_steps+1) x dim

  double at(int k, int j) const { return val[idx2(k, j, dim)]; }
  double& at(int k, int j) { return val[idx2(k, j, dim)]; }
  const double* row(int k) const { return val.data() + idx2(k, 0, dim); }
  /// Prefix X_{t_0..t_k}.
  HistView hist(int k) const { return {val.data(), k + 1, dim}; }
};

/// Step function hdot on grid cells together with its squared Cameron-Martin norm.
struct CameronMartinFn {
  int n_steps = 0;
  int dim = 0;
  std::vector<double> hdot;  // n_steps x dim
  double h_norm_sq = 0.0;

  const double* row(int k) const { return hdot.data() + idx2(k, 0, dim); }
};

CameronMartinFn make_cameron_martin(std::vector<double> hdot, int dim, const TimeGrid& grid);

/// Recomputes sum_k |hdot_k|^2 dt, validating shapes against the grid.
double cm_norm_sq(const CameronMartinFn& h, const TimeGrid& grid);

/// Adapted drift udot: the callback at step k may read driver values B_{t_0..t_k}
/// and (optionally) the state prefix X_{t_0..t_k}; it must not look ahead.
struct AdaptedDrift {
  int dim = 0;  // d
  std::function<void(int k, double t, const HistView& driver, const HistView& state, double* out)>
      eval;
};

/// Batch of state paths laid out path-major: path i occupies rows
/// [i*(n_steps+1), (i+1)*(n_steps+1)).
struct StateBatchView {
  const double* data = nullptr;
  int n_paths = 0;
  int n_steps = 0;
  int dim = 0;

  const double* path(int i) const {
    return data + static_cast<std::size_t>(i) * (n_steps + 1) * dim;
  }
  HistView hist(int i, int k) const { return {path(i), k + 1, dim}; }
  double at(int i, int k, int j) const { return path(i)[idx2(k, j, dim)]; }
};

}  // namespace dmr
