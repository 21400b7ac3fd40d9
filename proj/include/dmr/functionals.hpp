#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dmr/expr.hpp"
#include "dmr/grid.hpp"
#include "dmr/paths.hpp"

namespace dmr {

/// Per-path evaluation context for square-integrable functionals: the state
/// values (X or X^U depending on the verifier), the driver increments, and the
/// projected increments dm when the functional needs them.
struct PathCtx {
  const TimeGrid* grid = nullptr;
  HistView x;                    // (N+1) x n state values
  const double* b_inc = nullptr; // N x d
  const double* dm = nullptr;    // N x d, may be null
  int driver_dim = 0;
};

using PathFunctional = std::function<double(const PathCtx&)>;

/// Fixed published list of weak-test functionals g_j(X) used by the
/// conditional-expectation verifiers: {1, X_1, X_1^2, sin X_1, X_0.5 X_1}
/// on the first state coordinate.
struct WeakFunctional {
  std::string label;
  std::function<double(const HistView& x, const TimeGrid& grid)> eval;
};
const std::vector<WeakFunctional>& weak_functionals();

/// Grid index of time s (nearest node).
int grid_index(const TimeGrid& grid, double s);

/// F = e(X_{t=1}) for an expression over x_1..x_n.
PathFunctional terminal_functional(const Expr& e);

/// F = sum_k hdot_k . dm_k (requires ctx.dm).
PathFunctional linear_dm_functional(std::shared_ptr<const CameronMartinFn> h);

/// F = (sum_k hdot_k . dm_k)^2.
PathFunctional squared_dm_functional(std::shared_ptr<const CameronMartinFn> h);

/// Builds an adapted drift from component expressions; x-variables read the
/// state history, b-variables the driver values, both at the current step.
AdaptedDrift drift_from_exprs(std::vector<Expr> comps);

/// Step-function Cameron-Martin derivative from t-only expressions sampled at
/// left endpoints.
CameronMartinFn cm_from_exprs(const std::vector<Expr>& comps, const TimeGrid& grid);

}  // namespace dmr
