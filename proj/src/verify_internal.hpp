#pragma once

#include <vector>

#include "dmr/verify.hpp"

namespace dmr::detail {

/// Evaluates sigma and its projector along one path prefix, reusing buffers.
class ProjEval {
 public:
  ProjEval(const ModelSpec& model, const TimeGrid& grid, double rank_tol)
      : model_(&model), grid_(&grid), rank_tol_(rank_tol),
        sig_(model.state_dim * model.driver_dim),
        p_(static_cast<std::size_t>(model.driver_dim) * model.driver_dim) {}

  /// Computes P_k for the given state prefix; returns the rank.
  int at(int k, const HistView& hist) {
    eval_sigma(*model_, k, grid_->times[k], hist, sig_.data());
    return projector(sig_.data(), model_->state_dim, model_->driver_dim, rank_tol_, p_.data());
  }

  const double* p() const { return p_.data(); }
  const double* sigma() const { return sig_.data(); }
  void apply(const double* v, double* out) const {
    apply_projector(p_.data(), model_->driver_dim, v, out);
  }

 private:
  const ModelSpec* model_;
  const TimeGrid* grid_;
  double rank_tol_;
  std::vector<double> sig_;
  std::vector<double> p_;
};

/// Projected increments for every path of a batch (along X or X^U); also
/// reports the per-path count of projector rank changes.
void compute_dm_batch(const ModelSpec& model, const SimBatch& batch, bool use_xu,
                      double rank_tol, std::vector<double>& dm,
                      std::vector<int>& rank_changes);

/// Drops paths whose projector rank changes along the conditioning path
/// (--exclude-rank-jumps). Returns the number of excluded paths.
int apply_rank_jump_filter(const VerifierConfig& cfg, SimBatch& batch, bool use_xu);

/// Driver values B_{t_0..t_N} of one path ((N+1) x d) from stored increments.
void driver_values(const SimBatch& batch, int i, std::vector<double>& out);

/// Evaluates an adapted drift along every (path, step) of the batch; the state
/// argument is X^U when along_xu, else X. No clipping is applied here.
void eval_drift_batch(const AdaptedDrift& u, const SimBatch& batch, bool along_xu,
                      std::vector<double>& out);

/// Resolved-config echo shared by all verifiers.
nlohmann::ordered_json base_config_json(const VerifierConfig& cfg);

}  // namespace dmr::detail
