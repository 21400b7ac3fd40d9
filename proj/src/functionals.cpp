#include "dmr/functionals.hpp"

#include <cmath>

namespace dmr {

int grid_index(const TimeGrid& grid, double s) {
  int k = static_cast<int>(std::llround(s * grid.n_steps));
  if (k < 0) k = 0;
  if (k > grid.n_steps) k = grid.n_steps;
  return k;
}

const std::vector<WeakFunctional>& weak_functionals() {
  static const std::vector<WeakFunctional> fns = {
      {"g=1", [](const HistView&, const TimeGrid&) { return 1.0; }},
      {"g=x1(1)",
       [](const HistView& x, const TimeGrid& g) { return x.at(g.n_steps, 0); }},
      {"g=x1(1)^2",
       [](const HistView& x, const TimeGrid& g) {
         const double v = x.at(g.n_steps, 0);
         return v * v;
       }},
      {"g=sin_x1(1)",
       [](const HistView& x, const TimeGrid& g) { return std::sin(x.at(g.n_steps, 0)); }},
      {"g=x1(0.5)*x1(1)",
       [](const HistView& x, const TimeGrid& g) {
         return x.at(grid_index(g, 0.5), 0) * x.at(g.n_steps, 0);
       }},
  };
  return fns;
}

PathFunctional terminal_functional(const Expr& e) {
  if (e.uses_driver())
    throw InvalidArgument("terminal functional may only read state coordinates");
  return [e](const PathCtx& ctx) {
    Expr::Ctx c{1.0, ctx.x.row(ctx.grid->n_steps), ctx.x.dim, nullptr, 0};
    return e.eval(c);
  };
}

PathFunctional linear_dm_functional(std::shared_ptr<const CameronMartinFn> h) {
  return [h](const PathCtx& ctx) {
    if (!ctx.dm) throw InvalidArgument("functional needs projected increments");
    double s = 0.0;
    for (int k = 0; k < ctx.grid->n_steps; ++k)
      for (int j = 0; j < h->dim; ++j)
        s += h->hdot[idx2(k, j, h->dim)] * ctx.dm[idx2(k, j, h->dim)];
    return s;
  };
}

PathFunctional squared_dm_functional(std::shared_ptr<const CameronMartinFn> h) {
  PathFunctional lin = linear_dm_functional(std::move(h));
  return [lin](const PathCtx& ctx) {
    const double v = lin(ctx);
    return v * v;
  };
}

AdaptedDrift drift_from_exprs(std::vector<Expr> comps) {
  if (comps.empty()) throw InvalidArgument("drift needs at least one component");
  AdaptedDrift u;
  u.dim = static_cast<int>(comps.size());
  auto shared = std::make_shared<std::vector<Expr>>(std::move(comps));
  u.eval = [shared](int k, double t, const HistView& driver, const HistView& state,
                    double* out) {
    Expr::Ctx ctx{t, state.empty() ? nullptr : state.row(k), state.dim,
                  driver.empty() ? nullptr : driver.row(k), driver.dim};
    for (std::size_t i = 0; i < shared->size(); ++i) out[i] = (*shared)[i].eval(ctx);
  };
  return u;
}

CameronMartinFn cm_from_exprs(const std::vector<Expr>& comps, const TimeGrid& grid) {
  const int d = static_cast<int>(comps.size());
  for (const auto& e : comps)
    if (e.uses_driver() || e.uses_state())
      throw InvalidArgument("Cameron-Martin derivative must be deterministic (t only)");
  std::vector<double> hdot(static_cast<std::size_t>(grid.n_steps) * d);
  for (int k = 0; k < grid.n_steps; ++k) {
    Expr::Ctx ctx{grid.times[k], nullptr, 0, nullptr, 0};
    for (int j = 0; j < d; ++j) hdot[idx2(k, j, d)] = comps[j].eval(ctx);
  }
  return make_cameron_martin(std::move(hdot), d, grid);
}

}  // namespace dmr
