#include "dmr/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace dmr {

namespace {

void check_finite(const double* v, int len, const char* what) {
  for (int i = 0; i < len; ++i)
    if (!std::isfinite(v[i])) throw ModelError(std::string(what) + ": non-finite entry");
}

}  // namespace

void eval_sigma(const ModelSpec& model, int k, double t, const HistView& state, double* out) {
  if (state.len < k + 1) throw ModelError("eval_sigma: state history shorter than step");
  model.sigma(k, t, state, out);
  check_finite(out, model.state_dim * model.driver_dim, "sigma");
}

void eval_drift(const ModelSpec& model, int k, double t, const HistView& state, double* out) {
  if (state.len < k + 1) throw ModelError("eval_drift: state history shorter than step");
  model.drift(k, t, state, out);
  check_finite(out, model.state_dim, "drift");
}

Eigen::MatrixXd eval_a(const ModelSpec& model, int k, double t, const HistView& state) {
  const int n = model.state_dim, d = model.driver_dim;
  std::vector<double> sig(n * d);
  eval_sigma(model, k, t, state, sig.data());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> s(
      sig.data(), n, d);
  return s * s.transpose();
}

double apply_generator(const ModelSpec& model, const TestFunction& f, int k, double t,
                       const HistView& state) {
  const int n = model.state_dim;
  const Eigen::MatrixXd a = eval_a(model, k, t, state);
  std::vector<double> b(n), grad(n), hess(n * n);
  eval_drift(model, k, t, state, b.data());
  const double* x = state.row(k);
  f.grad(x, n, grad.data());
  f.hess(x, n, hess.data());
  double out = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out += 0.5 * a(i, j) * hess[idx2(i, j, n)];
    out += b[i] * grad[i];
  }
  return out;
}

namespace {

ModelSpec base_model(std::string name, int n, int d, double k_lip) {
  ModelSpec m;
  m.name = std::move(name);
  m.state_dim = n;
  m.driver_dim = d;
  m.x0.assign(n, 0.0);
  m.lipschitz_k = k_lip;
  return m;
}

}  // namespace

ModelSpec builtin_model(const std::string& name) {
  std::string id = name;
  if (id == "M1") id = "M1_scalar_bm";
  if (id == "M2") id = "M2_rank_one";
  if (id == "M3") id = "M3_rotating_frame";
  if (id == "M4") id = "M4_integrator";
  if (id == "M5") id = "M5_path_dependent";

  if (id == "M1_scalar_bm") {
    ModelSpec m = base_model(id, 1, 1, 0.0);
    m.sigma = [](int, double, const HistView&, double* out) { out[0] = 1.0; };
    m.drift = [](int, double, const HistView&, double* out) { out[0] = 0.0; };
    return m;
  }
  if (id == "M2_rank_one") {
    ModelSpec m = base_model(id, 1, 2, 0.0);
    m.sigma = [](int, double, const HistView&, double* out) {
      out[0] = 1.0;
      out[1] = 0.0;
    };
    m.drift = [](int, double, const HistView&, double* out) { out[0] = 0.0; };
    return m;
  }
  if (id == "M3_rotating_frame") {
    ModelSpec m = base_model(id, 1, 2, 1.0);
    m.sigma = [](int k, double, const HistView& s, double* out) {
      const double x = s.at(k, 0);
      out[0] = std::cos(x);
      out[1] = std::sin(x);
    };
    m.drift = [](int, double, const HistView&, double* out) { out[0] = 0.0; };
    return m;
  }
  if (id == "M4_integrator") {
    ModelSpec m = base_model(id, 2, 2, 1.0);
    m.sigma = [](int, double, const HistView&, double* out) {
      out[0] = 1.0;
      out[1] = 0.0;
      out[2] = 0.0;
      out[3] = 0.0;
    };
    m.drift = [](int k, double, const HistView& s, double* out) {
      out[0] = 0.0;
      out[1] = s.at(k, 0);
    };
    return m;
  }
  if (id == "M5_path_dependent") {
    ModelSpec m = base_model(id, 1, 2, 0.5);
    m.sigma = [](int k, double, const HistView& s, double* out) {
      out[0] = 1.0 + 0.5 * std::sin(s.at(k, 0));
      out[1] = 0.0;
    };
    m.drift = [](int k, double, const HistView& s, double* out) { out[0] = -0.5 * s.at(k, 0); };
    return m;
  }
  if (id == "M5_sup") {
    // sup-based variant: coefficient reads the running maximum, not just X_t.
    ModelSpec m = base_model(id, 1, 2, 0.5);
    m.sigma = [](int k, double, const HistView& s, double* out) {
      double sup = s.at(0, 0);
      for (int j = 1; j <= k; ++j) sup = std::max(sup, s.at(j, 0));
      out[0] = 1.0 + 0.5 * std::sin(sup);
      out[1] = 0.0;
    };
    m.drift = [](int k, double, const HistView& s, double* out) { out[0] = -0.5 * s.at(k, 0); };
    return m;
  }
  throw InvalidArgument("unknown model '" + name + "'");
}

std::vector<std::string> builtin_model_names() {
  return {"M1_scalar_bm", "M2_rank_one", "M3_rotating_frame", "M4_integrator",
          "M5_path_dependent", "M5_sup"};
}

ModelSpec make_custom_model(const CustomModelDef& def) {
  const int n = def.state_dim, d = def.driver_dim;
  if (n < 1 || d < 1) throw InvalidArgument("custom model: dimensions must be >= 1");
  if (static_cast<int>(def.x0.size()) != n)
    throw InvalidArgument("custom model: x0 length must equal state dimension");
  if (static_cast<int>(def.sigma.size()) != n || static_cast<int>(def.drift.size()) != n)
    throw InvalidArgument("custom model: sigma needs n rows and b needs n entries");

  auto sig = std::make_shared<std::vector<Expr>>();
  for (const auto& row : def.sigma) {
    if (static_cast<int>(row.size()) != d)
      throw InvalidArgument("custom model: each sigma row needs d expressions");
    for (const auto& e : row) {
      Expr ex = Expr::parse(e);
      if (ex.uses_driver())
        throw InvalidArgument("custom model coefficients may not read driver variables");
      sig->push_back(std::move(ex));
    }
  }
  auto dri = std::make_shared<std::vector<Expr>>();
  for (const auto& e : def.drift) {
    Expr ex = Expr::parse(e);
    if (ex.uses_driver())
      throw InvalidArgument("custom model coefficients may not read driver variables");
    dri->push_back(std::move(ex));
  }

  ModelSpec m = base_model(def.name.empty() ? "custom" : def.name, n, d, def.lipschitz_k);
  m.x0 = def.x0;
  m.sigma = [sig](int k, double t, const HistView& s, double* out) {
    Expr::Ctx ctx{t, s.row(k), s.dim, nullptr, 0};
    for (std::size_t i = 0; i < sig->size(); ++i) out[i] = (*sig)[i].eval(ctx);
  };
  m.drift = [dri](int k, double t, const HistView& s, double* out) {
    Expr::Ctx ctx{t, s.row(k), s.dim, nullptr, 0};
    for (std::size_t i = 0; i < dri->size(); ++i) out[i] = (*dri)[i].eval(ctx);
  };
  return m;
}

TestFunction tf_coordinate(int i) {
  TestFunction f;
  f.label = "x" + std::to_string(i + 1);
  f.f = [i](const double* x, int) { return x[i]; };
  f.grad = [i](const double*, int n, double* g) {
    std::fill(g, g + n, 0.0);
    g[i] = 1.0;
  };
  f.hess = [](const double*, int n, double* h) { std::fill(h, h + n * n, 0.0); };
  return f;
}

TestFunction tf_square(int i) {
  TestFunction f;
  f.label = "x" + std::to_string(i + 1) + "^2";
  f.f = [i](const double* x, int) { return x[i] * x[i]; };
  f.grad = [i](const double* x, int n, double* g) {
    std::fill(g, g + n, 0.0);
    g[i] = 2.0 * x[i];
  };
  f.hess = [i](const double*, int n, double* h) {
    std::fill(h, h + n * n, 0.0);
    h[idx2(i, i, n)] = 2.0;
  };
  return f;
}

TestFunction tf_sin(int i) {
  TestFunction f;
  f.label = "sin_x" + std::to_string(i + 1);
  f.f = [i](const double* x, int) { return std::sin(x[i]); };
  f.grad = [i](const double* x, int n, double* g) {
    std::fill(g, g + n, 0.0);
    g[i] = std::cos(x[i]);
  };
  f.hess = [i](const double* x, int n, double* h) {
    std::fill(h, h + n * n, 0.0);
    h[idx2(i, i, n)] = -std::sin(x[i]);
  };
  return f;
}

}  // namespace dmr
