#include <cmath>

#include "verify_internal.hpp"

namespace dmr {

using detail::ProjEval;

namespace {

// Raw (uncentered) features with a leading constant; martingale-difference
// regressions carry no intercept, the constant feature covers deterministic
// integrands instead.
void features_with_const(const FeatureBasis& basis, const StepFeatures& feats,
                         const HistView& hist, double* out) {
  out[0] = 1.0;
  eval_features(basis, feats, hist, out + 1);
}

}  // namespace

void RepresentationResult::eval_integrand(int k, const HistView& state_hist,
                                          double* xi_out) const {
  const Eigen::MatrixXd& c = coef[k];
  std::vector<double> phi(c.rows());
  features_with_const(basis, feats[k], state_hist, phi.data());
  for (int j = 0; j < driver_dim; ++j) {
    double v = 0.0;
    for (int a = 0; a < c.rows(); ++a) v += c(a, j) * phi[a];
    xi_out[j] = v;
  }
}

RepresentationResult represent_functional(const VerifierConfig& cfg, const PathFunctional& f) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  SimBatch batch = simulate_batch(cfg.model, grid, cfg.n_paths, cfg.seed);
  detail::apply_rank_jump_filter(cfg, batch, false);
  const int m = batch.n_paths, nsteps = grid.n_steps, d = batch.driver_dim;

  std::vector<double> dm;
  std::vector<int> changes;
  detail::compute_dm_batch(cfg.model, batch, false, cfg.rank_tol, dm, changes);

  // Functional values, centered.
  std::vector<double> fv(m);
  const StateBatchView xs = batch.x_view();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    PathCtx ctx{&grid, xs.hist(i, nsteps), batch.b_path(i),
                dm.data() + static_cast<std::size_t>(i) * nsteps * d, d};
    fv[i] = f(ctx);
  }
  const MCEstimate fstat = MCEstimate::of(fv);
  if (!std::isfinite(fstat.mean) || !std::isfinite(fstat.std_error))
    throw SimulationError("represent_functional: functional is not square-integrable on sample");
  for (double& v : fv) v -= fstat.mean;
  const double target_var = [&] {
    double s = 0.0;
    for (double v : fv) s += v * v;
    return m > 1 ? s / (m - 1) : 0.0;
  }();

  RepresentationResult res;
  res.basis = cfg.basis;
  res.n_steps = nsteps;
  res.driver_dim = d;
  res.n_paths = m;
  res.target_std = std::sqrt(target_var);
  res.feats.resize(nsteps);
  res.coef.resize(nsteps);

  // Per-step martingale-difference regression: F - E[F] on phi_a * dm^j.
  for (int k = 0; k < nsteps; ++k) {
    res.feats[k] = resolve_features(cfg.basis, k, batch.state_dim);
    const int pc = res.feats[k].count + 1;
    const int cols = pc * d;
    Eigen::MatrixXd z(m, cols);
#pragma omp parallel
    {
      std::vector<double> phi(pc);
#pragma omp for schedule(static)
      for (int i = 0; i < m; ++i) {
        features_with_const(cfg.basis, res.feats[k], xs.hist(i, k), phi.data());
        const double* w = dm.data() + (static_cast<std::size_t>(i) * nsteps + k) * d;
        for (int a = 0; a < pc; ++a)
          for (int j = 0; j < d; ++j) z(i, a * d + j) = phi[a] * w[j];
      }
    }
    Eigen::MatrixXd gram = z.transpose() * z;
    const double lam = cfg.ridge < 0.0 ? 1e-8 * gram.trace() / cols : cfg.ridge;
    Eigen::Map<const Eigen::VectorXd> y(fv.data(), m);
    Eigen::MatrixXd beta = ridge_solve(gram, z.transpose() * y, lam, nullptr);
    Eigen::MatrixXd c(pc, d);
    for (int a = 0; a < pc; ++a)
      for (int j = 0; j < d; ++j) c(a, j) = beta(a * d + j, 0);
    res.coef[k] = std::move(c);
  }

  // Residual and projected energy sweep.
  std::vector<double> resid(m), energy(m);
#pragma omp parallel
  {
    ProjEval pe(cfg.model, grid, cfg.rank_tol);
    std::vector<double> xi(d), pxi(d);
#pragma omp for schedule(static)
    for (int i = 0; i < m; ++i) {
      double r = fv[i];
      double en = 0.0;
      for (int k = 0; k < nsteps; ++k) {
        res.eval_integrand(k, xs.hist(i, k), xi.data());
        const double* w = dm.data() + (static_cast<std::size_t>(i) * nsteps + k) * d;
        for (int j = 0; j < d; ++j) r -= xi[j] * w[j];
        pe.at(k, xs.hist(i, k));
        pe.apply(xi.data(), pxi.data());
        for (int j = 0; j < d; ++j) en += pxi[j] * pxi[j] * grid.dt;
      }
      resid[i] = r;
      energy[i] = en;
    }
  }
  const MCEstimate rstat = MCEstimate::of(resid);
  res.residual_l2 = rstat.std_error * std::sqrt(static_cast<double>(m));
  res.energy = MCEstimate::of(energy);
  res.residual_warning = res.residual_l2 > 0.2 * res.target_std;
  return res;
}

namespace {

// Non-increasing block tuples of length q over {0..nb-1}, lexicographic.
void enum_tuples(int nb, int q, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == q) {
    out.push_back(cur);
    return;
  }
  const int hi = cur.empty() ? nb - 1 : cur.back();
  for (int b = hi; b >= 0; --b) {
    cur.push_back(b);
    enum_tuples(nb, q, cur, out);
    cur.pop_back();
  }
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// All simplex accumulators of one path after a full forward sweep; acc[q-1]
// then holds every indicator-kernel iterated integral of order q.
void chaos_acc_path(const double* dm, int nsteps, int dim, int nb, int q_max,
                    const SimplexKernel& layout, std::vector<std::vector<double>>& acc) {
  acc.assign(q_max, {});
  for (int r = 1; r <= q_max; ++r) acc[r - 1].assign(ipow(nb, r) * ipow(dim, r), 0.0);
  for (int k = 0; k < nsteps; ++k) {
    const int bk = layout.block_of(k);
    const double* w = dm + idx2(k, 0, dim);
    for (int r = q_max; r >= 2; --r) {
      auto& target = acc[r - 1];
      const auto& lower = acc[r - 2];
      const std::size_t nbs = ipow(nb, r - 1), ds = ipow(dim, r - 1);
      for (int j = 0; j < dim; ++j) {
        if (w[j] == 0.0) continue;
        for (std::size_t sb = 0; sb < nbs; ++sb) {
          const std::size_t tbase = (static_cast<std::size_t>(bk) * nbs + sb) * ds * dim +
                                    static_cast<std::size_t>(j) * ds;
          const std::size_t lbase = sb * ds;
          for (std::size_t sc = 0; sc < ds; ++sc) target[tbase + sc] += w[j] * lower[lbase + sc];
        }
      }
    }
    for (int j = 0; j < dim; ++j) acc[0][static_cast<std::size_t>(bk) * dim + j] += w[j];
  }
}

}  // namespace

ChaosResult chaos_expand(const VerifierConfig& cfg, const PathFunctional& f, int max_order,
                         int n_blocks) {
  if (max_order < 1 || max_order > kMaxChaosOrder)
    throw InvalidArgument("chaos_expand: max_order must be in [1, " +
                          std::to_string(kMaxChaosOrder) + "]");
  const TimeGrid grid = make_grid(cfg.n_steps);
  if (n_blocks < 1 || n_blocks > grid.n_steps)
    throw InvalidArgument("chaos_expand: n_blocks must be in [1, n_steps]");

  SimBatch batch = simulate_batch(cfg.model, grid, cfg.n_paths, cfg.seed);
  detail::apply_rank_jump_filter(cfg, batch, false);
  const int m = batch.n_paths, nsteps = grid.n_steps, d = batch.driver_dim;

  std::vector<double> dm;
  std::vector<int> changes;
  detail::compute_dm_batch(cfg.model, batch, false, cfg.rank_tol, dm, changes);

  // Column layout: orders ascending, non-increasing block tuples lexicographic,
  // d^q component tuples contiguous per block tuple.
  std::vector<std::vector<std::vector<int>>> tuples(max_order);
  std::vector<int> order_cols(max_order);
  int total_cols = 0;
  for (int q = 1; q <= max_order; ++q) {
    std::vector<int> cur;
    enum_tuples(n_blocks, q, cur, tuples[q - 1]);
    order_cols[q - 1] = static_cast<int>(tuples[q - 1].size() * ipow(d, q));
    total_cols += order_cols[q - 1];
  }
  if (m < 10 * (total_cols + 1))
    throw InvalidArgument("chaos_expand: design too large for sample (" + std::to_string(m) +
                          " paths, " + std::to_string(total_cols) + " columns)");

  const SimplexKernel layout = SimplexKernel::zeros(1, nsteps, n_blocks, d);

  std::vector<double> fv(m);
  const StateBatchView xs = batch.x_view();
  Eigen::MatrixXd z(m, total_cols);
#pragma omp parallel
  {
    std::vector<std::vector<double>> acc;
#pragma omp for schedule(static)
    for (int i = 0; i < m; ++i) {
      const double* dmi = dm.data() + static_cast<std::size_t>(i) * nsteps * d;
      PathCtx ctx{&grid, xs.hist(i, nsteps), batch.b_path(i), dmi, d};
      fv[i] = f(ctx);
      chaos_acc_path(dmi, nsteps, d, n_blocks, max_order, layout, acc);
      int col = 0;
      for (int q = 1; q <= max_order; ++q) {
        const std::size_t dq = ipow(d, q);
        for (const auto& tup : tuples[q - 1]) {
          std::size_t fb = 0;
          for (int r = 0; r < q; ++r) fb = fb * n_blocks + tup[r];
          const double* src = acc[q - 1].data() + fb * dq;
          for (std::size_t c = 0; c < dq; ++c) z(i, col + static_cast<int>(c)) = src[c];
          col += static_cast<int>(dq);
        }
      }
    }
  }

  const MCEstimate fstat = MCEstimate::of(fv);
  for (double& v : fv) v -= fstat.mean;
  Eigen::Map<const Eigen::VectorXd> y(fv.data(), m);
  double tvar = 0.0;
  for (int i = 0; i < m; ++i) tvar += fv[i] * fv[i];
  tvar = m > 1 ? tvar / (m - 1) : 0.0;

  Eigen::MatrixXd gram = z.transpose() * z;
  Eigen::VectorXd rhs = z.transpose() * y;

  ChaosResult res;
  res.target_std = std::sqrt(tvar);
  res.n_paths = m;
  res.n_blocks = n_blocks;

  Eigen::VectorXd beta_full;
  double prev_var = tvar;
  int cols_used = 0;
  for (int q = 1; q <= max_order; ++q) {
    cols_used += order_cols[q - 1];
    const Eigen::MatrixXd g = gram.topLeftCorner(cols_used, cols_used);
    const double lam = cfg.ridge < 0.0 ? 1e-8 * g.trace() / cols_used : cfg.ridge;
    Eigen::MatrixXd beta = ridge_solve(g, rhs.head(cols_used), lam, nullptr);
    const Eigen::VectorXd resid = y - z.leftCols(cols_used) * beta.col(0);
    const double rvar = resid.squaredNorm() / std::max(1, m - 1);
    res.resid_std.push_back(std::sqrt(rvar));
    res.explained.push_back(prev_var - rvar);
    const double pq = order_cols[q - 1];
    res.null_bound.push_back(rvar * (pq + 3.0 * std::sqrt(2.0 * pq)) / m);
    prev_var = rvar;
    if (q == max_order) beta_full = beta.col(0);
  }

  // Read coefficients back into kernels.
  int col = 0;
  for (int q = 1; q <= max_order; ++q) {
    SimplexKernel ker = SimplexKernel::zeros(q, nsteps, n_blocks, d);
    const std::size_t dq = ipow(d, q);
    std::vector<int> comps(q);
    for (const auto& tup : tuples[q - 1]) {
      for (std::size_t c = 0; c < dq; ++c) {
        std::size_t rem = c;
        for (int r = q - 1; r >= 0; --r) {
          comps[r] = static_cast<int>(rem % d);
          rem /= d;
        }
        ker.at(tup.data(), comps.data()) = beta_full(col + static_cast<int>(c));
      }
      col += static_cast<int>(dq);
    }
    res.kernels.push_back(std::move(ker));
  }
  return res;
}

}  // namespace dmr
