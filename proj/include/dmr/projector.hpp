#pragma once

#include <vector>

#include "dmr/grid.hpp"
#include "dmr/model.hpp"
#include "dmr/paths.hpp"

namespace dmr {

/// Orthogonal projection of R^d onto range(sigma^T) for an n x d row-major
/// sigma. Rank is decided by singular values > rank_tol * sigma_max (relative
/// threshold); sigma = 0 yields P = 0. Writes the d x d projector into p_out
/// and returns the rank.
int projector(const double* sigma, int n, int d, double rank_tol, double* p_out);

/// Per-step projectors P_k along a state path, adapted by construction.
struct ProjectorSequence {
  int n_steps = 0;
  int dim = 0;                // d
  std::vector<double> mats;   // n_steps x dim x dim
  std::vector<int> ranks;

  const double* mat(int k) const {
    return mats.data() + static_cast<std::size_t>(k) * dim * dim;
  }
  /// Number of steps where rank(P_k) differs from rank(P_{k-1}).
  int rank_changes() const;
};

ProjectorSequence projector_path(const ModelSpec& model, const StatePath& x,
                                 const TimeGrid& grid, double rank_tol);

/// out = P v for a d x d row-major P.
void apply_projector(const double* p, int d, const double* v, double* out);

}  // namespace dmr
