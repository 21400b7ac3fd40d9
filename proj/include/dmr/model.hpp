#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/expr.hpp"
#include "dmr/paths.hpp"

namespace dmr {

/// Path-dependent coefficient pair (sigma, b). Callbacks receive the state
/// prefix X_{t_0..t_k} and must write finite outputs of the declared shape;
/// they may only read history up to step k (adaptedness).
struct ModelSpec {
  std::string name;
  int state_dim = 1;   // n
  int driver_dim = 1;  // d
  std::vector<double> x0;
  double lipschitz_k = 0.0;
  std::function<void(int k, double t, const HistView& state, double* out)> sigma;  // n x d
  std::function<void(int k, double t, const HistView& state, double* out)> drift;  // n
};

/// Smooth scalar test function with gradient and Hessian callbacks.
struct TestFunction {
  std::string label;
  std::function<double(const double* x, int n)> f;
  std::function<void(const double* x, int n, double* out)> grad;
  std::function<void(const double* x, int n, double* out)> hess;  // n x n row-major
};

/// Evaluates sigma with shape/finiteness checks; throws ModelError on violation.
void eval_sigma(const ModelSpec& model, int k, double t, const HistView& state, double* out);
void eval_drift(const ModelSpec& model, int k, double t, const HistView& state, double* out);

/// a = sigma sigma^T, the n x n diffusion matrix.
Eigen::MatrixXd eval_a(const ModelSpec& model, int k, double t, const HistView& state);

/// Lf = 1/2 sum_ij a_ij d_ij f + sum_i b_i d_i f at the current state value.
double apply_generator(const ModelSpec& model, const TestFunction& f, int k, double t,
                       const HistView& state);

/// Zoo of degenerate examples. Names: M1_scalar_bm, M2_rank_one,
/// M3_rotating_frame, M4_integrator, M5_path_dependent, M5_sup (aliases M1..M5).
ModelSpec builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

/// Custom model from expression strings over {x_i, t}.
struct CustomModelDef {
  int state_dim = 1;
  int driver_dim = 1;
  std::vector<double> x0;
  std::vector<std::vector<std::string>> sigma;  // n rows of d expressions
  std::vector<std::string> drift;               // n expressions
  double lipschitz_k = 0.0;
  std::string name = "custom";
};
ModelSpec make_custom_model(const CustomModelDef& def);

TestFunction tf_coordinate(int i);
TestFunction tf_square(int i);
TestFunction tf_sin(int i);

}  // namespace dmr
