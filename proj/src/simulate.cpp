#include "dmr/simulate.hpp"

#include <cmath>
#include <cstring>

namespace dmr {

namespace {

constexpr double kOverflow = 1e12;

// Integrates one path into preallocated slots. b_val holds running driver
// values B_{t_0..t_k} so adapted drifts can read them.
void euler_one(const ModelSpec& model, const TimeGrid& grid, const double* b_inc,
               const AdaptedDrift* u, double clip_u, double* x_out, double* udot_out,
               std::vector<double>& b_val, std::vector<double>& scratch) {
  const int n = model.state_dim, d = model.driver_dim, nsteps = grid.n_steps;
  const double dt = grid.dt;

  double* sig = scratch.data();          // n*d
  double* bvec = sig + n * d;            // n
  double* uvec = bvec + n;               // d
  double* dw = uvec + d;                 // d

  for (int j = 0; j < n; ++j) x_out[j] = model.x0[j];
  for (int j = 0; j < d; ++j) b_val[j] = 0.0;

  double clip_acc = 0.0;
  bool clipped = false;

  for (int k = 0; k < nsteps; ++k) {
    const double t = grid.times[k];
    const HistView state{x_out, k + 1, n};
    const HistView driver{b_val.data(), k + 1, d};

    eval_sigma(model, k, t, state, sig);
    eval_drift(model, k, t, state, bvec);

    if (u) {
      if (clipped) {
        std::fill(uvec, uvec + d, 0.0);
      } else {
        u->eval(k, t, driver, state, uvec);
        double r = 0.0;
        for (int j = 0; j < d; ++j) r += uvec[j] * uvec[j];
        clip_acc += r * dt;
        if (clip_acc > clip_u) clipped = true;  // zero from the next step on
      }
      if (udot_out) std::memcpy(udot_out + idx2(k, 0, d), uvec, sizeof(double) * d);
      for (int j = 0; j < d; ++j) dw[j] = b_inc[idx2(k, j, d)] + uvec[j] * dt;
    } else {
      std::memcpy(dw, b_inc + idx2(k, 0, d), sizeof(double) * d);
    }

    double* x_next = x_out + idx2(k + 1, 0, n);
    for (int i = 0; i < n; ++i) {
      double s = x_out[idx2(k, i, n)] + bvec[i] * dt;
      for (int j = 0; j < d; ++j) s += sig[idx2(i, j, d)] * dw[j];
      x_next[i] = s;
      if (!(std::abs(s) < kOverflow))
        throw SimulationError("state overflow at step " + std::to_string(k + 1) + ", coordinate " +
                              std::to_string(i + 1));
    }
    for (int j = 0; j < d; ++j)
      b_val[idx2(k + 1, j, d)] = b_val[idx2(k, j, d)] + b_inc[idx2(k, j, d)];
  }
}

void fill_brownian(const TimeGrid& grid, int d, RngSpec rng, double* out) {
  CounterRng gen(rng);
  const double sdt = std::sqrt(grid.dt);
  for (int k = 0; k < grid.n_steps; ++k)
    for (int j = 0; j < d; ++j) out[idx2(k, j, d)] = gen.normal() * sdt;
}

// Shared per-path kernel of the batch drivers.
void batch_kernel(const ModelSpec& model, const TimeGrid& grid, std::uint64_t seed,
                  const AdaptedDrift* u, double clip_u, SimBatch& out, int i,
                  std::vector<double>& b_val, std::vector<double>& scratch) {
  const int n = model.state_dim, d = model.driver_dim, nsteps = grid.n_steps;
  double* b = out.b_inc.data() + static_cast<std::size_t>(i) * nsteps * d;
  fill_brownian(grid, d, RngSpec{seed, static_cast<std::uint64_t>(i)}, b);
  double* x = out.x_val.data() + static_cast<std::size_t>(i) * (nsteps + 1) * n;
  euler_one(model, grid, b, nullptr, kNoClip, x, nullptr, b_val, scratch);
  if (u) {
    double* xu = out.xu_val.data() + static_cast<std::size_t>(i) * (nsteps + 1) * n;
    double* ud = out.udot.data() + static_cast<std::size_t>(i) * nsteps * d;
    euler_one(model, grid, b, u, clip_u, xu, ud, b_val, scratch);
  }
}

SimBatch make_batch_storage(const ModelSpec& model, const TimeGrid& grid, int n_paths,
                            std::uint64_t seed, bool with_u) {
  if (n_paths < 1) throw InvalidArgument("simulate_batch: n_paths must be >= 1");
  SimBatch b;
  b.grid = grid;
  b.n_paths = n_paths;
  b.state_dim = model.state_dim;
  b.driver_dim = model.driver_dim;
  b.seed = seed;
  b.b_inc.resize(static_cast<std::size_t>(n_paths) * grid.n_steps * model.driver_dim);
  b.x_val.resize(static_cast<std::size_t>(n_paths) * (grid.n_steps + 1) * model.state_dim);
  if (with_u) {
    b.xu_val.resize(b.x_val.size());
    b.udot.resize(b.b_inc.size());
  }
  return b;
}

}  // namespace

BrownianPath sample_brownian(const TimeGrid& grid, int dim, RngSpec rng) {
  if (dim < 1) throw InvalidArgument("sample_brownian: dim must be >= 1");
  BrownianPath b;
  b.n_steps = grid.n_steps;
  b.dim = dim;
  b.inc.resize(static_cast<std::size_t>(grid.n_steps) * dim);
  fill_brownian(grid, dim, rng, b.inc.data());
  return b;
}

StatePath euler_solve(const ModelSpec& model, const BrownianPath& b, const AdaptedDrift* u,
                      const TimeGrid& grid, double clip_u, std::vector<double>* udot_out) {
  if (b.n_steps != grid.n_steps || b.dim != model.driver_dim)
    throw InvalidArgument("euler_solve: driver shape mismatch");
  if (u && u->dim != model.driver_dim)
    throw InvalidArgument("euler_solve: drift dimension mismatch");
  StatePath x;
  x.n_steps = grid.n_steps;
  x.dim = model.state_dim;
  x.val.resize(static_cast<std::size_t>(grid.n_steps + 1) * model.state_dim);
  if (udot_out) udot_out->assign(static_cast<std::size_t>(grid.n_steps) * model.driver_dim, 0.0);
  std::vector<double> b_val(static_cast<std::size_t>(grid.n_steps + 1) * model.driver_dim);
  std::vector<double> scratch(model.state_dim * model.driver_dim + model.state_dim +
                              2 * model.driver_dim);
  euler_one(model, grid, b.inc.data(), u, clip_u, x.val.data(),
            udot_out ? udot_out->data() : nullptr, b_val, scratch);
  return x;
}

double girsanov_weight(const std::vector<double>& udot, const BrownianPath& b,
                       const TimeGrid& grid, int sign) {
  if (sign != 1 && sign != -1) throw InvalidArgument("girsanov_weight: sign must be +-1");
  if (static_cast<int>(udot.size()) != b.n_steps * b.dim)
    throw InvalidArgument("girsanov_weight: drift shape mismatch");
  double lin = 0.0, quad = 0.0;
  for (int k = 0; k < b.n_steps; ++k)
    for (int j = 0; j < b.dim; ++j) {
      const double v = udot[idx2(k, j, b.dim)];
      lin += v * b.at(k, j);
      quad += v * v;
    }
  const double w = std::exp(sign * lin - 0.5 * quad * grid.dt);
  if (!std::isfinite(w)) throw SimulationError("girsanov_weight: overflow");
  return w;
}

BrownianPath SimBatch::brownian(int i) const {
  BrownianPath b;
  b.n_steps = grid.n_steps;
  b.dim = driver_dim;
  b.inc.assign(b_path(i), b_path(i) + static_cast<std::size_t>(grid.n_steps) * driver_dim);
  return b;
}

SimBatch simulate_batch(const ModelSpec& model, const TimeGrid& grid, int n_paths,
                        std::uint64_t seed, const AdaptedDrift* u, double clip_u) {
  SimBatch out = make_batch_storage(model, grid, n_paths, seed, u != nullptr);
  // Exceptions may not cross the parallel region; keep the lowest-index error.
  int err_path = n_paths;
  std::string err_msg;
#pragma omp parallel
  {
    std::vector<double> b_val(static_cast<std::size_t>(grid.n_steps + 1) * model.driver_dim);
    std::vector<double> scratch(model.state_dim * model.driver_dim + model.state_dim +
                                2 * model.driver_dim);
#pragma omp for schedule(static)
    for (int i = 0; i < n_paths; ++i) {
      try {
        batch_kernel(model, grid, seed, u, clip_u, out, i, b_val, scratch);
      } catch (const std::exception& e) {
#pragma omp critical
        if (i < err_path) {
          err_path = i;
          err_msg = e.what();
        }
      }
    }
  }
  if (err_path < n_paths)
    throw SimulationError("path " + std::to_string(err_path) + ": " + err_msg);
  return out;
}

SimBatch simulate_batch_serial(const ModelSpec& model, const TimeGrid& grid, int n_paths,
                               std::uint64_t seed, const AdaptedDrift* u, double clip_u) {
  SimBatch out = make_batch_storage(model, grid, n_paths, seed, u != nullptr);
  std::vector<double> b_val(static_cast<std::size_t>(grid.n_steps + 1) * model.driver_dim);
  std::vector<double> scratch(model.state_dim * model.driver_dim + model.state_dim +
                              2 * model.driver_dim);
  for (int i = 0; i < n_paths; ++i)
    batch_kernel(model, grid, seed, u, clip_u, out, i, b_val, scratch);
  return out;
}

}  // namespace dmr
