#include <cmath>

#include "verify_internal.hpp"

namespace dmr {

using detail::ProjEval;

namespace {

// Per-step filter fits along X^U with in-sample predictions. Targets are
// P_k udot (always) and raw udot (when need_raw).
void fit_filters(const VerifierConfig& cfg, const TimeGrid& grid, const SimBatch& batch,
                 const std::vector<double>& udot, bool need_raw, std::vector<double>& pred_pu,
                 std::vector<double>& pred_u) {
  const int m = batch.n_paths, nsteps = grid.n_steps, d = batch.driver_dim;
  const StateBatchView xu = batch.xu_view();
  pred_pu.resize(static_cast<std::size_t>(m) * nsteps * d);
  if (need_raw) pred_u.resize(pred_pu.size());

  for (int k = 0; k < nsteps; ++k) {
    StepDesign design = build_step_design(xu, cfg.basis, k);
    Eigen::MatrixXd t_pu(m, d), t_u(m, d);
    {
      ProjEval pe(cfg.model, grid, cfg.rank_tol);
      std::vector<double> pu(d);
      for (int i = 0; i < m; ++i) {
        const double* uv = udot.data() + (static_cast<std::size_t>(i) * nsteps + k) * d;
        pe.at(k, xu.hist(i, k));
        pe.apply(uv, pu.data());
        for (int j = 0; j < d; ++j) {
          t_pu(i, j) = pu[j];
          if (need_raw) t_u(i, j) = uv[j];
        }
      }
    }
    {
      MultiRegressionFit fit = fit_from_design(design, cfg.basis, t_pu, cfg.ridge);
      const Eigen::MatrixXd p = predict_in_sample(design, fit);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j)
          pred_pu[(static_cast<std::size_t>(i) * nsteps + k) * d + j] = p(i, j);
    }
    if (need_raw) {
      MultiRegressionFit fit = fit_from_design(design, cfg.basis, t_u, cfg.ridge);
      const Eigen::MatrixXd p = predict_in_sample(design, fit);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j)
          pred_u[(static_cast<std::size_t>(i) * nsteps + k) * d + j] = p(i, j);
    }
  }
}

}  // namespace

InnovationBatch build_innovation(const VerifierConfig& cfg, const AdaptedDrift& u,
                                 bool need_raw_filter) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  InnovationBatch ib;
  ib.batch = simulate_batch(cfg.model, grid, cfg.n_paths, cfg.seed, &u, cfg.clip_u);
  detail::apply_rank_jump_filter(cfg, ib.batch, true);
  fit_filters(cfg, grid, ib.batch, ib.batch.udot, need_raw_filter, ib.pred_pu, ib.pred_u);
  return ib;
}

void innovation_increments(const InnovationBatch& ib, int path, double* dz_out) {
  const SimBatch& b = ib.batch;
  const int nsteps = b.grid.n_steps, d = b.driver_dim;
  const double dt = b.grid.dt;
  const double* binc = b.b_path(path);
  const double* ud = b.udot_path(path);
  const double* pp = ib.pred_pu.data() + static_cast<std::size_t>(path) * nsteps * d;
  for (int k = 0; k < nsteps; ++k)
    for (int j = 0; j < d; ++j) {
      const std::size_t at = idx2(k, j, d);
      dz_out[at] = binc[at] + (ud[at] - pp[at]) * dt;
    }
}

std::vector<double> zeta_path(const VerifierConfig& cfg, const InnovationBatch& ib, int path) {
  if (ib.pred_u.empty())
    throw InvalidArgument("zeta_path: innovation batch was built without the raw filter");
  const SimBatch& b = ib.batch;
  const TimeGrid& grid = b.grid;
  const int nsteps = grid.n_steps, d = b.driver_dim;
  std::vector<double> dz(static_cast<std::size_t>(nsteps) * d);
  innovation_increments(ib, path, dz.data());

  std::vector<double> zeta(nsteps + 1, 1.0);
  ProjEval pe(cfg.model, grid, cfg.rank_tol);
  const StateBatchView xu = b.xu_view();
  std::vector<double> pu(d);
  double expo = 0.0;
  const double* pu_hat = ib.pred_u.data() + static_cast<std::size_t>(path) * nsteps * d;
  for (int k = 0; k < nsteps; ++k) {
    pe.at(k, xu.hist(path, k));
    pe.apply(pu_hat + idx2(k, 0, d), pu.data());
    double lin = 0.0, quad = 0.0;
    for (int j = 0; j < d; ++j) {
      lin += pu[j] * dz[idx2(k, j, d)];
      quad += pu[j] * pu[j];
    }
    expo += -lin - 0.5 * quad * grid.dt;
    zeta[k + 1] = std::exp(expo);
    if (!std::isfinite(zeta[k + 1]))
      throw SimulationError("zeta_path: overflow at step " + std::to_string(k + 1));
  }
  return zeta;
}

VerificationReport verify_innovation_martingale(const VerifierConfig& cfg,
                                                const AdaptedDrift& u) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  auto run = [&](const VerifierConfig& c) {
    InnovationBatch ib = build_innovation(c, u, false);
    const SimBatch& batch = ib.batch;
    const int m = batch.n_paths, nsteps = grid.n_steps, d = batch.driver_dim;
    const StateBatchView xu = batch.xu_view();

    const std::pair<double, double> windows[] = {{0.25, 0.5}, {0.5, 1.0}};
    struct GDef {
      const char* label;
      double (*eval)(double);
    };
    const GDef gs[] = {{"g=1", [](double) { return 1.0; }},
                       {"g=x1(s)", [](double v) { return v; }},
                       {"g=x1(s)^2", [](double v) { return v * v; }}};

    // samples[w][g][j][i] flattened; fill in one path sweep.
    std::vector<std::vector<double>> samples(2 * 3 * d, std::vector<double>(m));
#pragma omp parallel
    {
      ProjEval pe(c.model, grid, c.rank_tol);
      std::vector<double> dz(static_cast<std::size_t>(nsteps) * d), pdz(d), msum(d);
#pragma omp for schedule(static)
      for (int i = 0; i < m; ++i) {
        innovation_increments(ib, i, dz.data());
        for (int w = 0; w < 2; ++w) {
          const int ks = grid_index(grid, windows[w].first);
          const int kt = grid_index(grid, windows[w].second);
          std::fill(msum.begin(), msum.end(), 0.0);
          for (int k = ks; k < kt; ++k) {
            pe.at(k, xu.hist(i, k));
            pe.apply(dz.data() + idx2(k, 0, d), pdz.data());
            for (int j = 0; j < d; ++j) msum[j] += pdz[j];
          }
          const double xs = xu.at(i, ks, 0);
          for (int g = 0; g < 3; ++g) {
            const double gv = gs[g].eval(xs);
            for (int j = 0; j < d; ++j) samples[(w * 3 + g) * d + j][i] = msum[j] * gv;
          }
        }
      }
    }

    VerificationReport rep;
    rep.name = "verify_innovation";
    rep.seed = c.seed;
    rep.config = detail::base_config_json(c);
    for (int w = 0; w < 2; ++w)
      for (int g = 0; g < 3; ++g)
        for (int j = 0; j < d; ++j) {
          const MCEstimate est = MCEstimate::of(samples[(w * 3 + g) * d + j]);
          char label[96];
          std::snprintf(label, sizeof(label), "innov_mart[s=%g,t=%g][%s][%d]",
                        windows[w].first, windows[w].second, gs[g].label, j + 1);
          rep.stats.push_back(make_stat(label, est, three_se(est, c.abs_slack)));
        }
    return rep;
  };
  return with_escalation(cfg, run);
}

VerificationReport verify_zeta_identity(const VerifierConfig& cfg, const AdaptedDrift& u) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  auto run = [&](const VerifierConfig& c) {
    InnovationBatch ib = build_innovation(c, u, true);
    const SimBatch& batch = ib.batch;
    const int m = batch.n_paths, nsteps = grid.n_steps;
    const StateBatchView xu = batch.xu_view();
    const StateBatchView xp = batch.x_view();

    std::vector<double> zeta1(m);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) zeta1[i] = zeta_path(c, ib, i).back();

    struct GDef {
      const char* label;
      double (*eval)(double);
    };
    const GDef gs[] = {{"g=x1", [](double v) { return v; }},
                       {"g=x1^2", [](double v) { return v * v; }},
                       {"g=sin_x1", [](double v) { return std::sin(v); }}};

    VerificationReport rep;
    rep.name = "verify_zeta";
    rep.seed = c.seed;
    rep.config = detail::base_config_json(c);
    std::vector<double> samples(m);
    for (const auto& g : gs) {
      for (int i = 0; i < m; ++i)
        samples[i] = zeta1[i] * g.eval(xu.at(i, nsteps, 0)) - g.eval(xp.at(i, nsteps, 0));
      const MCEstimate est = MCEstimate::of(samples);
      rep.stats.push_back(
          make_stat(std::string("zeta_identity[") + g.label + "]", est, three_se(est, c.abs_slack)));
    }
    return rep;
  };
  return with_escalation(cfg, run);
}

MCEstimate entropy_formula(const VerifierConfig& cfg, const AdaptedDrift& u) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  InnovationBatch ib = build_innovation(cfg, u, true);
  const SimBatch& batch = ib.batch;
  const int m = batch.n_paths, nsteps = grid.n_steps, d = batch.driver_dim;
  const StateBatchView xu = batch.xu_view();

  std::vector<double> ent(m);
#pragma omp parallel
  {
    ProjEval pe(cfg.model, grid, cfg.rank_tol);
    std::vector<double> pu(d);
#pragma omp for schedule(static)
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      const double* pu_hat = ib.pred_u.data() + static_cast<std::size_t>(i) * nsteps * d;
      for (int k = 0; k < nsteps; ++k) {
        pe.at(k, xu.hist(i, k));
        pe.apply(pu_hat + idx2(k, 0, d), pu.data());
        for (int j = 0; j < d; ++j) s += pu[j] * pu[j];
      }
      ent[i] = 0.5 * s * grid.dt;
    }
  }
  return MCEstimate::of(ent);
}

VerificationReport entropy_report(const VerifierConfig& cfg, const AdaptedDrift& u) {
  VerificationReport rep;
  rep.name = "entropy";
  rep.seed = cfg.seed;
  rep.config = detail::base_config_json(cfg);
  const MCEstimate est = entropy_formula(cfg, u);
  rep.stats.push_back(
      make_stat("entropy_nonneg", est, -three_se(est, cfg.abs_slack), StatLine::Rule::ge));
  return rep;
}

SimBatch monge_ampere_solve(const VerifierConfig& cfg, const std::vector<Expr>& vdot) {
  if (static_cast<int>(vdot.size()) != cfg.model.driver_dim)
    throw InvalidArgument("monge_ampere_solve: v needs one component per driver dimension");
  for (const auto& e : vdot)
    if (e.uses_driver())
      throw InvalidArgument("monge_ampere_solve: v must be adapted to the state filtration");
  const TimeGrid grid = make_grid(cfg.n_steps);

  AdaptedDrift u;
  u.dim = cfg.model.driver_dim;
  auto shared = std::make_shared<std::vector<Expr>>(vdot);
  u.eval = [shared](int k, double t, const HistView&, const HistView& state, double* out) {
    Expr::Ctx ctx{t, state.row(k), state.dim, nullptr, 0};
    for (std::size_t j = 0; j < shared->size(); ++j) out[j] = -(*shared)[j].eval(ctx);
  };
  return simulate_batch(cfg.model, grid, cfg.n_paths, cfg.seed, &u, cfg.clip_u);
}

namespace {

// Evaluates the v expressions along X^U for one (path, step).
void eval_v_at(const std::vector<Expr>& vdot, const TimeGrid& grid, const StateBatchView& xu,
               int i, int k, double* out) {
  Expr::Ctx ctx{grid.times[k], xu.path(i) + static_cast<std::size_t>(k) * xu.dim, xu.dim,
                nullptr, 0};
  for (std::size_t j = 0; j < vdot.size(); ++j) out[j] = vdot[j].eval(ctx);
}

}  // namespace

VerificationReport monge_ampere_residual(const VerifierConfig& cfg, const std::vector<Expr>& vdot,
                                         const std::vector<Expr>* u_override) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  auto run = [&](const VerifierConfig& c) {
    SimBatch batch = monge_ampere_solve(c, vdot);
    detail::apply_rank_jump_filter(c, batch, true);
    const int m = batch.n_paths, nsteps = grid.n_steps, d = batch.driver_dim;
    const StateBatchView xu = batch.xu_view();

    // The filter input: the solved drift, or a foreign one (negative control).
    std::vector<double> u_filter;
    if (u_override) {
      AdaptedDrift uo = drift_from_exprs(*u_override);
      if (uo.dim != d) throw InvalidArgument("u override dimension mismatch");
      detail::eval_drift_batch(uo, batch, true, u_filter);
    } else {
      u_filter = batch.udot;
    }

    std::vector<double> pred_pu, pred_u;
    fit_filters(c, grid, batch, u_filter, true, pred_pu, pred_u);

    std::vector<double> r_balance(m), r_density(m), r_entropy(m);
#pragma omp parallel
    {
      ProjEval pe(c.model, grid, c.rank_tol);
      std::vector<double> vv(d), pv(d), tmp(d), pb(d), pu(d);
#pragma omp for schedule(static)
      for (int i = 0; i < m; ++i) {
        const double* binc = batch.b_path(i);
        const double* ud = batch.udot_path(i);
        const double* pp = pred_pu.data() + static_cast<std::size_t>(i) * nsteps * d;
        const double* pu_hat = pred_u.data() + static_cast<std::size_t>(i) * nsteps * d;
        double bal = 0.0, logl = 0.0, zexp = 0.0, bound = 0.0;
        for (int k = 0; k < nsteps; ++k) {
          pe.at(k, xu.hist(i, k));
          eval_v_at(vdot, grid, xu, i, k, vv.data());
          pe.apply(vv.data(), pv.data());

          // (i) projected drift balance |P(v + E[u|F])|^2.
          for (int j = 0; j < d; ++j) tmp[j] = vv[j] + pu_hat[idx2(k, j, d)];
          pe.apply(tmp.data(), pb.data());
          for (int j = 0; j < d; ++j) bal += pb[j] * pb[j] * grid.dt;

          // density exponent along dU = dB + udot dt.
          for (int j = 0; j < d; ++j) {
            const double du = binc[idx2(k, j, d)] + ud[idx2(k, j, d)] * grid.dt;
            logl += -pv[j] * du;
          }
          double pv2 = 0.0;
          for (int j = 0; j < d; ++j) pv2 += pv[j] * pv[j];
          logl -= 0.5 * pv2 * grid.dt;

          // zeta exponent along dZ = dB + (udot - E[P udot|F]) dt.
          pe.apply(pu_hat + idx2(k, 0, d), pu.data());
          double lin = 0.0, quad = 0.0;
          for (int j = 0; j < d; ++j) {
            const double dz = binc[idx2(k, j, d)] + (ud[idx2(k, j, d)] - pp[idx2(k, j, d)]) * grid.dt;
            lin += pu[j] * dz;
            quad += pu[j] * pu[j];
          }
          zexp += -lin - 0.5 * quad * grid.dt;
          bound += 0.5 * quad * grid.dt;
        }
        r_balance[i] = bal;
        r_density[i] = std::exp(logl) * std::exp(zexp) - 1.0;
        r_entropy[i] = logl - bound;
      }
    }

    VerificationReport rep;
    rep.name = "monge_ampere";
    rep.seed = c.seed;
    rep.config = detail::base_config_json(c);
    if (u_override) rep.notes.push_back("u_override=negative_control");
    const MCEstimate e1 = MCEstimate::of(r_balance);
    rep.stats.push_back(make_stat("ma_drift_balance", e1, three_se(e1, c.abs_slack)));
    const MCEstimate e2 = MCEstimate::of(r_density);
    rep.stats.push_back(make_stat("ma_density_identity", e2, three_se(e2, c.abs_slack)));
    const MCEstimate e3 = MCEstimate::of(r_entropy);
    rep.stats.push_back(make_stat("ma_entropy_equality", e3, three_se(e3, c.abs_slack)));
    return rep;
  };
  return with_escalation(cfg, run);
}

VerificationReport entropy_inequality_check(const VerifierConfig& cfg,
                                            const std::vector<Expr>& vdot,
                                            const std::vector<double>& clip_levels) {
  const TimeGrid grid = make_grid(cfg.n_steps);
  VerificationReport rep;
  rep.name = "entropy_inequality";
  rep.seed = cfg.seed;
  rep.config = detail::base_config_json(cfg);

  for (double level : clip_levels) {
    VerifierConfig c = cfg;
    c.clip_u = level;
    SimBatch batch = monge_ampere_solve(c, vdot);
    detail::apply_rank_jump_filter(c, batch, true);
    const int m = batch.n_paths, nsteps = grid.n_steps, d = batch.driver_dim;
    const StateBatchView xu = batch.xu_view();

    std::vector<double> pred_pu, pred_u;
    fit_filters(c, grid, batch, batch.udot, true, pred_pu, pred_u);

    // log l along the effective drift (v_eff = -udot) and the formula bound.
    std::vector<double> gap(m);
#pragma omp parallel
    {
      ProjEval pe(c.model, grid, c.rank_tol);
      std::vector<double> puv(d), pu(d);
#pragma omp for schedule(static)
      for (int i = 0; i < m; ++i) {
        const double* binc = batch.b_path(i);
        const double* ud = batch.udot_path(i);
        const double* pu_hat = pred_u.data() + static_cast<std::size_t>(i) * nsteps * d;
        double logl = 0.0, bound = 0.0;
        for (int k = 0; k < nsteps; ++k) {
          pe.at(k, xu.hist(i, k));
          pe.apply(ud + idx2(k, 0, d), puv.data());
          pe.apply(pu_hat + idx2(k, 0, d), pu.data());
          double pv2 = 0.0, pe2 = 0.0;
          for (int j = 0; j < d; ++j) {
            const double du = binc[idx2(k, j, d)] + ud[idx2(k, j, d)] * grid.dt;
            logl += puv[j] * du;
            pv2 += puv[j] * puv[j];
            pe2 += pu[j] * pu[j];
          }
          logl -= 0.5 * pv2 * grid.dt;
          bound += 0.5 * pe2 * grid.dt;
        }
        gap[i] = logl - bound;
      }
    }
    const MCEstimate est = MCEstimate::of(gap);
    const bool unclipped = !std::isfinite(level);
    char label[64];
    if (unclipped)
      std::snprintf(label, sizeof(label), "entropy_gap[clip=inf]");
    else
      std::snprintf(label, sizeof(label), "entropy_gap[clip=%g]", level);
    rep.stats.push_back(make_stat(label, est, three_se(est, cfg.abs_slack), StatLine::Rule::le));
    if (unclipped)
      rep.stats.push_back(make_stat("entropy_equality[clip=inf]", est,
                                    three_se(est, cfg.abs_slack), StatLine::Rule::abs_le));
  }
  return rep;
}

}  // namespace dmr
