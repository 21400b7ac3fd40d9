#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/paths.hpp"

namespace dmr {

/// Cross-sectional feature map for E[ . | F_k(X)]. Features at step k read the
/// state at the lagged grid indices max(k - lag, 0) (deduplicated), expanded
/// either as polynomials of total degree <= degree or as sin/cos harmonics
/// j*omega, j = 1..degree. A constant feature is always present; degree 0
/// keeps only the constant.
struct FeatureBasis {
  enum class Kind { polynomial, fourier };
  Kind kind = Kind::polynomial;
  int degree = 2;
  std::vector<int> lags = {0, 1, 2, 4};
  double omega = 1.0;

  static FeatureBasis from_strings(const std::string& kind, int degree,
                                   std::vector<int> lags, double omega);
  std::string kind_name() const;
};

/// Feature layout resolved at a fixed step: the unique state indices read and
/// the resulting feature count (constant excluded).
struct StepFeatures {
  int step = 0;
  int state_dim = 0;
  std::vector<int> indices;  // unique grid indices <= step, ascending
  int count = 0;             // non-constant features
};

StepFeatures resolve_features(const FeatureBasis& basis, int step, int state_dim);

/// Writes the `feats.count` non-constant features of one path prefix.
void eval_features(const FeatureBasis& basis, const StepFeatures& feats,
                   const HistView& state, double* out);

/// Ridge least squares with an unpenalized intercept (features and target are
/// centered, so the sample mean of predictions equals the target mean exactly).
struct RegressionFit {
  FeatureBasis basis;
  StepFeatures feats;
  Eigen::VectorXd beta;        // coefficients of centered non-constant features
  Eigen::VectorXd feat_mean;   // training feature means
  double intercept = 0.0;      // training target mean
  struct Diagnostics {
    double resid_var = 0.0;
    double target_var = 0.0;
    double cond = 0.0;
    double resid_var_holdout = -1.0;  // -1 when no holdout split was used
    int n_features = 0;
    int n_paths = 0;
  } diag;
};

/// Fits E[target | F_k(X)] by regression over the batch. ridge < 0 selects the
/// default 1e-8 * mean diagonal of the Gram matrix. holdout fits on the even
/// half and reports the odd-half residual variance in diagnostics.
RegressionFit fit_conditional(const std::vector<double>& targets, const StateBatchView& paths,
                              const FeatureBasis& basis, int k, double ridge = -1.0,
                              bool holdout = false);

double predict(const RegressionFit& fit, const HistView& state_hist);

/// Multi-target variant sharing one Gram factorization; column j of `targets`
/// (M x m, row-major) is fitted independently.
struct MultiRegressionFit {
  FeatureBasis basis;
  StepFeatures feats;
  Eigen::MatrixXd beta;       // (count) x m
  Eigen::VectorXd feat_mean;
  Eigen::VectorXd intercept;  // m
  double cond = 0.0;
};

MultiRegressionFit fit_conditional_multi(const double* targets, int n_targets,
                                         const StateBatchView& paths, const FeatureBasis& basis,
                                         int k, double ridge = -1.0);

void predict_multi(const MultiRegressionFit& fit, const HistView& state_hist, double* out);

/// Centered design matrix of one step over the whole batch, reusable for a
/// fit and its in-sample predictions without re-evaluating features.
struct StepDesign {
  StepFeatures feats;
  Eigen::MatrixXd phi;  // n_paths x count, centered columns
  Eigen::VectorXd feat_mean;
};

StepDesign build_step_design(const StateBatchView& paths, const FeatureBasis& basis, int k);

/// Fit on a prebuilt design; `targets` is n_paths x m, uncentered.
MultiRegressionFit fit_from_design(const StepDesign& design, const FeatureBasis& basis,
                                   const Eigen::MatrixXd& targets, double ridge = -1.0);

/// In-sample predictions (n_paths x m) of a fit produced from `design`.
Eigen::MatrixXd predict_in_sample(const StepDesign& design, const MultiRegressionFit& fit);

/// Core symmetric ridge solve. With ridge exactly 0 a rank-deficient Gram
/// matrix raises NumericalError. cond_out receives lambda_max/lambda_min of
/// the regularized spectrum.
Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs,
                            double ridge, double* cond_out);

}  // namespace dmr
