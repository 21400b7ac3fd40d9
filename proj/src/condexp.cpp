#include "dmr/condexp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dmr {

FeatureBasis FeatureBasis::from_strings(const std::string& kind, int degree,
                                        std::vector<int> lags, double omega) {
  FeatureBasis b;
  if (kind == "polynomial")
    b.kind = Kind::polynomial;
  else if (kind == "fourier")
    b.kind = Kind::fourier;
  else
    throw InvalidArgument("unknown basis kind '" + kind + "'");
  if (degree < 0) throw InvalidArgument("basis degree must be >= 0");
  if (lags.empty()) throw InvalidArgument("basis needs at least one lag");
  for (int l : lags)
    if (l < 0) throw InvalidArgument("basis lags must be >= 0");
  b.degree = degree;
  b.lags = std::move(lags);
  b.omega = omega;
  return b;
}

std::string FeatureBasis::kind_name() const {
  return kind == Kind::polynomial ? "polynomial" : "fourier";
}

namespace {

// Number of monomials over v variables with total degree in [1, deg].
int monomial_count(int v, int deg) {
  // C(v + deg, deg) - 1
  long long c = 1;
  for (int i = 1; i <= deg; ++i) c = c * (v + i) / i;
  return static_cast<int>(c - 1);
}

// Appends all monomial values of total degree in [1, deg] over vals[0..v).
void emit_monomials(const double* vals, int v, int deg, double prefix, int start, double*& out) {
  for (int i = start; i < v; ++i) {
    const double p = prefix * vals[i];
    *out++ = p;
    if (deg > 1) emit_monomials(vals, v, deg - 1, p, i, out);
  }
}

}  // namespace

StepFeatures resolve_features(const FeatureBasis& basis, int step, int state_dim) {
  StepFeatures f;
  f.step = step;
  f.state_dim = state_dim;
  for (int lag : basis.lags) f.indices.push_back(std::max(step - lag, 0));
  std::sort(f.indices.begin(), f.indices.end());
  f.indices.erase(std::unique(f.indices.begin(), f.indices.end()), f.indices.end());
  const int v = static_cast<int>(f.indices.size()) * state_dim;
  f.count = basis.kind == FeatureBasis::Kind::polynomial ? monomial_count(v, basis.degree)
                                                         : 2 * basis.degree * v;
  return f;
}

void eval_features(const FeatureBasis& basis, const StepFeatures& feats, const HistView& state,
                   double* out) {
  if (state.len < feats.step + 1)
    throw InvalidArgument("eval_features: history shorter than the feature step");
  const int n = state.dim;
  const int v = static_cast<int>(feats.indices.size()) * n;
  // Gather the lagged state values.
  double vals_buf[64];
  std::vector<double> vals_dyn;
  double* vals = vals_buf;
  if (v > 64) {
    vals_dyn.resize(v);
    vals = vals_dyn.data();
  }
  int c = 0;
  for (int idx : feats.indices)
    for (int j = 0; j < n; ++j) vals[c++] = state.at(idx, j);

  if (basis.kind == FeatureBasis::Kind::polynomial) {
    double* cur = out;
    emit_monomials(vals, v, basis.degree, 1.0, 0, cur);
  } else {
    double* cur = out;
    for (int i = 0; i < v; ++i)
      for (int j = 1; j <= basis.degree; ++j) {
        const double a = basis.omega * j * vals[i];
        *cur++ = std::sin(a);
        *cur++ = std::cos(a);
      }
  }
}

Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs,
                            double ridge, double* cond_out) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success) throw NumericalError("ridge_solve: eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const double lmax = lam.size() ? lam.maxCoeff() : 0.0;
  if (ridge == 0.0 && (lmax == 0.0 || lam.minCoeff() <= 1e-12 * lmax))
    throw NumericalError("ridge_solve: rank-deficient design with ridge = 0");
  Eigen::VectorXd inv(lam.size());
  for (int i = 0; i < lam.size(); ++i) inv(i) = 1.0 / (lam(i) + ridge);
  if (cond_out) {
    const double lo = lam.minCoeff() + ridge, hi = lmax + ridge;
    *cond_out = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * rhs;
}

namespace {

struct Design {
  Eigen::MatrixXd phi;       // rows x count, centered
  Eigen::VectorXd feat_mean;
};

Design build_design(const StateBatchView& paths, const FeatureBasis& basis,
                    const StepFeatures& feats, const std::vector<int>& rows) {
  const int m = static_cast<int>(rows.size());
  Design d;
  d.phi.resize(m, feats.count);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < m; ++r) {
    std::vector<double> buf(feats.count);
    eval_features(basis, feats, paths.hist(rows[r], feats.step), buf.data());
    for (int c = 0; c < feats.count; ++c) d.phi(r, c) = buf[c];
  }
  d.feat_mean = d.phi.colwise().mean();
  d.phi.rowwise() -= d.feat_mean.transpose();
  return d;
}

double default_ridge(const Eigen::MatrixXd& gram) {
  const int p = static_cast<int>(gram.rows());
  return p > 0 ? 1e-8 * gram.trace() / p : 0.0;
}

}  // namespace

RegressionFit fit_conditional(const std::vector<double>& targets, const StateBatchView& paths,
                              const FeatureBasis& basis, int k, double ridge, bool holdout) {
  if (static_cast<int>(targets.size()) != paths.n_paths)
    throw InvalidArgument("fit_conditional: one target per path required");
  StepFeatures feats = resolve_features(basis, k, paths.dim);
  const int p = feats.count;
  std::vector<int> train, eval_rows;
  for (int i = 0; i < paths.n_paths; ++i) {
    if (!holdout || i % 2 == 0) train.push_back(i);
    else eval_rows.push_back(i);
  }
  if (static_cast<int>(train.size()) < 10 * (p + 1))
    throw InvalidArgument("fit_conditional: need at least 10x more paths than features (" +
                          std::to_string(train.size()) + " paths for " + std::to_string(p + 1) +
                          " features)");

  Design d = build_design(paths, basis, feats, train);
  Eigen::VectorXd y(train.size());
  for (std::size_t r = 0; r < train.size(); ++r) y(r) = targets[train[r]];
  const double ymean = y.mean();
  y.array() -= ymean;

  Eigen::MatrixXd gram = d.phi.transpose() * d.phi;
  const double lam = ridge < 0.0 ? default_ridge(gram) : ridge;

  RegressionFit fit;
  fit.basis = basis;
  fit.feats = feats;
  fit.feat_mean = d.feat_mean;
  fit.intercept = ymean;
  double cond = 0.0;
  fit.beta = ridge_solve(gram, d.phi.transpose() * y, lam, &cond);

  const Eigen::VectorXd resid = y - d.phi * fit.beta;
  fit.diag.resid_var = resid.squaredNorm() / train.size();
  fit.diag.target_var = y.squaredNorm() / train.size();
  fit.diag.cond = cond;
  fit.diag.n_features = p + 1;
  fit.diag.n_paths = static_cast<int>(train.size());

  if (holdout && !eval_rows.empty()) {
    double ss = 0.0;
    std::vector<double> buf(p);
    for (int i : eval_rows) {
      eval_features(basis, feats, paths.hist(i, k), buf.data());
      double pred = fit.intercept;
      for (int c = 0; c < p; ++c) pred += fit.beta(c) * (buf[c] - fit.feat_mean(c));
      const double e = targets[i] - pred;
      ss += e * e;
    }
    fit.diag.resid_var_holdout = ss / eval_rows.size();
  }
  return fit;
}

double predict(const RegressionFit& fit, const HistView& state_hist) {
  std::vector<double> buf(fit.feats.count);
  eval_features(fit.basis, fit.feats, state_hist, buf.data());
  double out = fit.intercept;
  for (int c = 0; c < fit.feats.count; ++c) out += fit.beta(c) * (buf[c] - fit.feat_mean(c));
  return out;
}

StepDesign build_step_design(const StateBatchView& paths, const FeatureBasis& basis, int k) {
  StepDesign d;
  d.feats = resolve_features(basis, k, paths.dim);
  std::vector<int> rows(paths.n_paths);
  for (int i = 0; i < paths.n_paths; ++i) rows[i] = i;
  Design raw = build_design(paths, basis, d.feats, rows);
  d.phi = std::move(raw.phi);
  d.feat_mean = std::move(raw.feat_mean);
  return d;
}

MultiRegressionFit fit_from_design(const StepDesign& design, const FeatureBasis& basis,
                                   const Eigen::MatrixXd& targets, double ridge) {
  const int p = design.feats.count;
  const int m = static_cast<int>(design.phi.rows());
  if (targets.rows() != m) throw InvalidArgument("fit_from_design: one target row per path");
  if (m < 10 * (p + 1))
    throw InvalidArgument("fit_from_design: need at least 10x more paths than features");

  Eigen::MatrixXd y = targets;
  Eigen::RowVectorXd ymean = y.colwise().mean();
  y.rowwise() -= ymean;

  Eigen::MatrixXd gram = design.phi.transpose() * design.phi;
  const double lam = ridge < 0.0 ? default_ridge(gram) : ridge;

  MultiRegressionFit fit;
  fit.basis = basis;
  fit.feats = design.feats;
  fit.feat_mean = design.feat_mean;
  fit.intercept = ymean.transpose();
  fit.beta = ridge_solve(gram, design.phi.transpose() * y, lam, &fit.cond);
  return fit;
}

Eigen::MatrixXd predict_in_sample(const StepDesign& design, const MultiRegressionFit& fit) {
  Eigen::MatrixXd out = design.phi * fit.beta;
  out.rowwise() += fit.intercept.transpose();
  return out;
}

MultiRegressionFit fit_conditional_multi(const double* targets, int n_targets,
                                         const StateBatchView& paths, const FeatureBasis& basis,
                                         int k, double ridge) {
  StepDesign d = build_step_design(paths, basis, k);
  Eigen::MatrixXd y(paths.n_paths, n_targets);
  for (int i = 0; i < paths.n_paths; ++i)
    for (int j = 0; j < n_targets; ++j) y(i, j) = targets[idx2(i, j, n_targets)];
  return fit_from_design(d, basis, y, ridge);
}

void predict_multi(const MultiRegressionFit& fit, const HistView& state_hist, double* out) {
  std::vector<double> buf(fit.feats.count);
  eval_features(fit.basis, fit.feats, state_hist, buf.data());
  for (int j = 0; j < fit.beta.cols(); ++j) {
    double v = fit.intercept(j);
    for (int c = 0; c < fit.feats.count; ++c) v += fit.beta(c, j) * (buf[c] - fit.feat_mean(c));
    out[j] = v;
  }
}

}  // namespace dmr
