#include "verify_internal.hpp"

#include <cmath>

namespace dmr {

double three_se(const MCEstimate& e, double slack) { return 3.0 * e.std_error + slack; }

}  // namespace dmr

namespace dmr::detail {

void compute_dm_batch(const ModelSpec& model, const SimBatch& batch, bool use_xu,
                      double rank_tol, std::vector<double>& dm, std::vector<int>& rank_changes) {
  const int m = batch.n_paths, nsteps = batch.grid.n_steps, d = batch.driver_dim;
  dm.resize(static_cast<std::size_t>(m) * nsteps * d);
  rank_changes.assign(m, 0);
  const StateBatchView states = use_xu ? batch.xu_view() : batch.x_view();
#pragma omp parallel
  {
    ProjEval pe(model, batch.grid, rank_tol);
#pragma omp for schedule(static)
    for (int i = 0; i < m; ++i) {
      const double* b = batch.b_path(i);
      double* out = dm.data() + static_cast<std::size_t>(i) * nsteps * d;
      int prev_rank = -1;
      for (int k = 0; k < nsteps; ++k) {
        const int rank = pe.at(k, states.hist(i, k));
        pe.apply(b + idx2(k, 0, d), out + idx2(k, 0, d));
        if (prev_rank >= 0 && rank != prev_rank) ++rank_changes[i];
        prev_rank = rank;
      }
    }
  }
}

int apply_rank_jump_filter(const VerifierConfig& cfg, SimBatch& batch, bool use_xu) {
  if (!cfg.exclude_rank_jumps) return 0;
  std::vector<double> dm;
  std::vector<int> changes;
  compute_dm_batch(cfg.model, batch, use_xu && !batch.xu_val.empty(), cfg.rank_tol, dm, changes);
  std::vector<int> keep;
  for (int i = 0; i < batch.n_paths; ++i)
    if (changes[i] == 0) keep.push_back(i);
  if (keep.empty()) throw SimulationError("exclude-rank-jumps removed every path");
  if (static_cast<int>(keep.size()) == batch.n_paths) return 0;

  const int nsteps = batch.grid.n_steps, d = batch.driver_dim, n = batch.state_dim;
  auto compact = [&](std::vector<double>& arr, int row_len) {
    if (arr.empty()) return;
    std::vector<double> out(keep.size() * static_cast<std::size_t>(row_len));
    for (std::size_t r = 0; r < keep.size(); ++r)
      std::copy_n(arr.data() + static_cast<std::size_t>(keep[r]) * row_len, row_len,
                  out.data() + r * row_len);
    arr = std::move(out);
  };
  compact(batch.b_inc, nsteps * d);
  compact(batch.x_val, (nsteps + 1) * n);
  compact(batch.xu_val, (nsteps + 1) * n);
  compact(batch.udot, nsteps * d);
  const int excluded = batch.n_paths - static_cast<int>(keep.size());
  batch.n_paths = static_cast<int>(keep.size());
  return excluded;
}

void driver_values(const SimBatch& batch, int i, std::vector<double>& out) {
  const int nsteps = batch.grid.n_steps, d = batch.driver_dim;
  out.resize(static_cast<std::size_t>(nsteps + 1) * d);
  const double* b = batch.b_path(i);
  for (int j = 0; j < d; ++j) out[j] = 0.0;
  for (int k = 0; k < nsteps; ++k)
    for (int j = 0; j < d; ++j) out[idx2(k + 1, j, d)] = out[idx2(k, j, d)] + b[idx2(k, j, d)];
}

void eval_drift_batch(const AdaptedDrift& u, const SimBatch& batch, bool along_xu,
                      std::vector<double>& out) {
  const int m = batch.n_paths, nsteps = batch.grid.n_steps, d = batch.driver_dim;
  if (u.dim != d) throw InvalidArgument("drift dimension mismatch with batch");
  out.resize(static_cast<std::size_t>(m) * nsteps * d);
  const StateBatchView states = along_xu && !batch.xu_val.empty() ? batch.xu_view() : batch.x_view();
#pragma omp parallel
  {
    std::vector<double> bval;
#pragma omp for schedule(static)
    for (int i = 0; i < m; ++i) {
      driver_values(batch, i, bval);
      for (int k = 0; k < nsteps; ++k) {
        const HistView driver{bval.data(), k + 1, d};
        u.eval(k, batch.grid.times[k], driver, states.hist(i, k),
               out.data() + (static_cast<std::size_t>(i) * nsteps + k) * d);
      }
    }
  }
}

nlohmann::ordered_json base_config_json(const VerifierConfig& cfg) {
  nlohmann::ordered_json j;
  j["model"] = cfg.model.name;
  j["n_steps"] = cfg.n_steps;
  j["n_paths"] = cfg.n_paths;
  j["seed"] = cfg.seed;
  nlohmann::ordered_json b;
  b["kind"] = cfg.basis.kind_name();
  b["degree"] = cfg.basis.degree;
  b["lags"] = cfg.basis.lags;
  b["omega"] = cfg.basis.omega;
  j["basis"] = b;
  j["rank_tol"] = cfg.rank_tol;
  j["ridge"] = cfg.ridge;
  if (std::isfinite(cfg.clip_u))
    j["clip_u"] = cfg.clip_u;
  else
    j["clip_u"] = nullptr;
  j["holdout"] = cfg.holdout;
  j["exclude_rank_jumps"] = cfg.exclude_rank_jumps;
  j["abs_slack"] = cfg.abs_slack;
  return j;
}

}  // namespace dmr::detail
