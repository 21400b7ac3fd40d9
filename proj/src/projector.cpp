#include "dmr/projector.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace dmr {

int projector(const double* sigma, int n, int d, double rank_tol, double* p_out) {
  if (n < 1 || d < 1) throw InvalidArgument("projector: dimensions must be >= 1");
  if (!(rank_tol > 0.0)) throw InvalidArgument("projector: rank_tol must be > 0");
  for (int i = 0; i < n * d; ++i)
    if (!std::isfinite(sigma[i])) throw InvalidArgument("projector: non-finite sigma entry");

  std::fill(p_out, p_out + static_cast<std::size_t>(d) * d, 0.0);

  if (n == 1) {
    // Single row: range(sigma^T) is spanned by the row itself, and the sole
    // singular value |sigma| passes the relative threshold iff it is nonzero.
    double nrm2 = 0.0;
    for (int j = 0; j < d; ++j) nrm2 += sigma[j] * sigma[j];
    if (nrm2 == 0.0) return 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) p_out[idx2(i, j, d)] = sigma[i] * sigma[j] / nrm2;
    return 1;
  }

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> s(
      sigma, n, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_tol * smax && sv(i) > 0.0) ++rank;
  if (rank == 0) return 0;
  const Eigen::MatrixXd vr = svd.matrixV().leftCols(rank);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> p(p_out, d,
                                                                                       d);
  p = vr * vr.transpose();
  return rank;
}

int ProjectorSequence::rank_changes() const {
  int c = 0;
  for (std::size_t k = 1; k < ranks.size(); ++k)
    if (ranks[k] != ranks[k - 1]) ++c;
  return c;
}

ProjectorSequence projector_path(const ModelSpec& model, const StatePath& x,
                                 const TimeGrid& grid, double rank_tol) {
  if (x.dim != model.state_dim || x.n_steps != grid.n_steps)
    throw InvalidArgument("projector_path: path inconsistent with model/grid");
  const int d = model.driver_dim;
  ProjectorSequence seq;
  seq.n_steps = grid.n_steps;
  seq.dim = d;
  seq.mats.resize(static_cast<std::size_t>(grid.n_steps) * d * d);
  seq.ranks.resize(grid.n_steps);
  std::vector<double> sig(model.state_dim * d);
  for (int k = 0; k < grid.n_steps; ++k) {
    eval_sigma(model, k, grid.times[k], x.hist(k), sig.data());
    seq.ranks[k] = projector(sig.data(), model.state_dim, d, rank_tol,
                             seq.mats.data() + static_cast<std::size_t>(k) * d * d);
  }
  return seq;
}

void apply_projector(const double* p, int d, const double* v, double* out) {
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += p[idx2(i, j, d)] * v[j];
    out[i] = s;
  }
}

}  // namespace dmr
