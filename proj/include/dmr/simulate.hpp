#pragma once

#include <limits>
#include <vector>

#include "dmr/grid.hpp"
#include "dmr/model.hpp"
#include "dmr/paths.hpp"
#include "dmr/rng.hpp"

namespace dmr {

inline constexpr double kNoClip = std::numeric_limits<double>::infinity();

/// N x d independent Normal(0, dt) increments, deterministic in (seed, stream_id).
BrownianPath sample_brownian(const TimeGrid& grid, int dim, RngSpec rng);

/// Euler-Maruyama: X_{k+1} = X_k + b dt + sigma (dB_k + udot_k dt). With u
/// null this is the plain diffusion X; otherwise the drift-perturbed X^U on
/// the same increments (common random numbers). clip_u = R zeroes udot after
/// the first step where the running sum of |udot|^2 dt exceeds R. The
/// effective (post-clip) drift values are written to udot_out when given.
StatePath euler_solve(const ModelSpec& model, const BrownianPath& b, const AdaptedDrift* u,
                      const TimeGrid& grid, double clip_u = kNoClip,
                      std::vector<double>* udot_out = nullptr);

/// exp(sign * sum udot.dB - 1/2 sum |udot|^2 dt) from stored effective drift values.
double girsanov_weight(const std::vector<double>& udot, const BrownianPath& b,
                       const TimeGrid& grid, int sign);

/// Simulated batch, path-major layout. xu_val/udot are empty when no drift was given.
struct SimBatch {
  TimeGrid grid;
  int n_paths = 0;
  int state_dim = 0;
  int driver_dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> b_inc;   // M x N x d
  std::vector<double> x_val;   // M x (N+1) x n
  std::vector<double> xu_val;  // M x (N+1) x n
  std::vector<double> udot;    // M x N x d (effective, along X^U)

  const double* b_path(int i) const {
    return b_inc.data() + static_cast<std::size_t>(i) * grid.n_steps * driver_dim;
  }
  const double* udot_path(int i) const {
    return udot.data() + static_cast<std::size_t>(i) * grid.n_steps * driver_dim;
  }
  StateBatchView x_view() const { return {x_val.data(), n_paths, grid.n_steps, state_dim}; }
  StateBatchView xu_view() const { return {xu_val.data(), n_paths, grid.n_steps, state_dim}; }
  /// View of the perturbed batch when present, else the plain one.
  StateBatchView state_view() const { return xu_val.empty() ? x_view() : xu_view(); }
  BrownianPath brownian(int i) const;
};

/// OpenMP path-parallel batch driver; bit-identical to the serial reference
/// for any worker count (disjoint per-path streams and output slots).
SimBatch simulate_batch(const ModelSpec& model, const TimeGrid& grid, int n_paths,
                        std::uint64_t seed, const AdaptedDrift* u = nullptr,
                        double clip_u = kNoClip);

/// Serial reference implementation kept for testing and benchmarking.
SimBatch simulate_batch_serial(const ModelSpec& model, const TimeGrid& grid, int n_paths,
                               std::uint64_t seed, const AdaptedDrift* u = nullptr,
                               double clip_u = kNoClip);

}  // namespace dmr
