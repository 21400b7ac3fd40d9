#include <cmath>

#include "verify_internal.hpp"

namespace dmr {

using detail::ProjEval;

VerificationReport verify_wick_conditional(const VerifierConfig& cfg, const CameronMartinFn& h) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  if (h.n_steps != grid.n_steps || h.dim != cfg.model.driver_dim)
    throw InvalidArgument("verify_wick_conditional: h shape mismatch");

  auto run = [&](const VerifierConfig& c) {
    SimBatch batch = simulate_batch(c.model, grid, c.n_paths, c.seed);
    const int excluded = detail::apply_rank_jump_filter(c, batch, false);
    const int m = batch.n_paths;

    // rho(dh) and its conditional expectation given F_1(X), pathwise on
    // common increments.
    std::vector<double> rho(m), rho_m(m);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
      const BrownianPath b = batch.brownian(i);
      StatePath x;
      x.n_steps = grid.n_steps;
      x.dim = batch.state_dim;
      const double* base = batch.x_view().path(i);
      x.val.assign(base, base + static_cast<std::size_t>(grid.n_steps + 1) * batch.state_dim);
      const ProjectorSequence p = projector_path(c.model, x, grid, c.rank_tol);
      rho[i] = wick_exponential(h, b);
      rho_m[i] = projected_wick(h, p, b);
    }

    VerificationReport rep;
    rep.name = "verify_wick";
    rep.seed = c.seed;
    rep.config = detail::base_config_json(c);
    if (excluded > 0) rep.notes.push_back("excluded_rank_jump_paths=" + std::to_string(excluded));

    const StateBatchView xs = batch.x_view();
    std::vector<double> samples(m);
    for (const auto& g : weak_functionals()) {
      for (int i = 0; i < m; ++i)
        samples[i] = (rho[i] - rho_m[i]) * g.eval(xs.hist(i, grid.n_steps), grid);
      const MCEstimate est = MCEstimate::of(samples);
      rep.stats.push_back(make_stat("wick_gap[" + g.label + "]", est, three_se(est, c.abs_slack)));
    }
    return rep;
  };
  return with_escalation(cfg, run);
}

VerificationReport verify_commutation(const VerifierConfig& cfg, const AdaptedDrift& u,
                                      bool expect_zero_energy) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  auto run = [&](const VerifierConfig& c) {
    SimBatch batch = simulate_batch(c.model, grid, c.n_paths, c.seed);
    const int excluded = detail::apply_rank_jump_filter(c, batch, false);
    const int m = batch.n_paths, nsteps = grid.n_steps, d = batch.driver_dim;
    const StateBatchView xs = batch.x_view();

    std::vector<double> udot;
    detail::eval_drift_batch(u, batch, false, udot);

    // Per-step fits of E[P_k udot | F_k(X)] with in-sample predictions.
    std::vector<double> pred(static_cast<std::size_t>(m) * nsteps * d);
    for (int k = 0; k < nsteps; ++k) {
      StepDesign design = build_step_design(xs, c.basis, k);
      Eigen::MatrixXd targets(m, d);
      {
        ProjEval pe(c.model, grid, c.rank_tol);
        std::vector<double> pu(d);
        for (int i = 0; i < m; ++i) {
          pe.at(k, xs.hist(i, k));
          pe.apply(udot.data() + (static_cast<std::size_t>(i) * nsteps + k) * d, pu.data());
          for (int j = 0; j < d; ++j) targets(i, j) = pu[j];
        }
      }
      MultiRegressionFit fit = fit_from_design(design, c.basis, targets, c.ridge);
      const Eigen::MatrixXd p = predict_in_sample(design, fit);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j)
          pred[(static_cast<std::size_t>(i) * nsteps + k) * d + j] = p(i, j);
    }

    // Both stochastic integrals per path, on common increments.
    std::vector<double> lhs(m, 0.0), rhs(m, 0.0), energy(m, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
      const double* b = batch.b_path(i);
      double sl = 0.0, sr = 0.0, en = 0.0;
      for (int k = 0; k < nsteps; ++k) {
        for (int j = 0; j < d; ++j) {
          const std::size_t at = (static_cast<std::size_t>(i) * nsteps + k) * d + j;
          sl += udot[at] * b[idx2(k, j, d)];
          sr += pred[at] * b[idx2(k, j, d)];
          en += pred[at] * pred[at] * grid.dt;
        }
      }
      lhs[i] = sl;
      rhs[i] = sr;
      energy[i] = en;
    }

    VerificationReport rep;
    rep.name = "verify_commutation";
    rep.seed = c.seed;
    rep.config = detail::base_config_json(c);
    if (excluded > 0) rep.notes.push_back("excluded_rank_jump_paths=" + std::to_string(excluded));

    std::vector<double> samples(m);
    for (const auto& g : weak_functionals()) {
      for (int i = 0; i < m; ++i)
        samples[i] = (lhs[i] - rhs[i]) * g.eval(xs.hist(i, nsteps), grid);
      const MCEstimate est = MCEstimate::of(samples);
      rep.stats.push_back(
          make_stat("commutation_gap[" + g.label + "]", est, three_se(est, c.abs_slack)));
    }
    const MCEstimate een = MCEstimate::of(energy);
    rep.stats.push_back(make_stat("rhs_energy", een, three_se(een, c.abs_slack),
                                  expect_zero_energy ? StatLine::Rule::abs_le
                                                     : StatLine::Rule::info));
    return rep;
  };
  return with_escalation(cfg, run);
}

}  // namespace dmr
