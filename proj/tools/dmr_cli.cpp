// Command-line front end: experiment configuration, verifier dispatch,
// report emission. Exit codes: 0 all statistics pass, 1 verification or
// runtime failure, 2 configuration error (machine-readable JSON on stdout).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dmr/acceptance.hpp"
#include "dmr/config.hpp"
#include "dmr/verify.hpp"
#include "json.hpp"

namespace {

using namespace dmr;

int fail_config(const std::string& msg, const std::string& where = "") {
  nlohmann::ordered_json j;
  j["error"]["message"] = msg;
  if (!where.empty()) j["error"]["location"] = where;
  std::cout << j.dump(2) << "\n";
  return 2;
}

int fail_runtime(const std::string& msg) {
  nlohmann::ordered_json j;
  j["error"]["message"] = msg;
  std::cout << j.dump(2) << "\n";
  return 1;
}

PathFunctional parse_functional(const ExperimentConfig& cfg, const TimeGrid& grid, int d) {
  const std::string& s = cfg.functional;
  if (s.rfind("lin:", 0) == 0 || s.rfind("sq:", 0) == 0) {
    const bool sq = s[0] == 's';
    const std::string expr = s.substr(sq ? 3 : 4);
    auto h = std::make_shared<CameronMartinFn>(cm_from_exprs(parse_expr_vector(expr, d), grid));
    return sq ? squared_dm_functional(h) : linear_dm_functional(h);
  }
  return terminal_functional(Expr::parse(s));
}

AdaptedDrift require_u(const ExperimentConfig& cfg, int d, bool allow_default_zero) {
  if (cfg.u.empty()) {
    if (!allow_default_zero) throw InvalidArgument("this verifier requires --u");
    std::vector<Expr> zeros;
    for (int j = 0; j < d; ++j) zeros.push_back(Expr::parse("0"));
    return drift_from_exprs(std::move(zeros));
  }
  return drift_from_exprs(parse_expr_vector(cfg.u, d));
}

void dump_paths_csv(const ExperimentConfig& cfg, const SimBatch& batch, const TimeGrid& grid) {
  if (cfg.dump_paths <= 0) return;
  std::filesystem::create_directories(cfg.out);
  std::ofstream f(cfg.out + "/paths.csv");
  const int n = batch.state_dim, d = batch.driver_dim;
  f << "path,step,t";
  for (int i = 0; i < n; ++i) f << ",x_" << (i + 1);
  for (int j = 0; j < d; ++j) f << ",db_" << (j + 1);
  f << "\n";
  const StateBatchView xs = batch.xu_val.empty() ? batch.x_view() : batch.xu_view();
  const int m = std::min(cfg.dump_paths, batch.n_paths);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k <= grid.n_steps; ++k) {
      f << i << "," << k << "," << format_double(grid.times[k]);
      for (int c = 0; c < n; ++c) f << "," << format_double(xs.at(i, k, c));
      for (int j = 0; j < d; ++j)
        f << "," << (k < grid.n_steps ? format_double(batch.b_path(i)[idx2(k, j, d)]) : "");
      f << "\n";
    }
  }
}

VerificationReport run_simulate(const ExperimentConfig& cfg, const VerifierConfig& vc) {
  const TimeGrid grid = make_grid(vc.n_steps);
  const int d = vc.model.driver_dim;
  std::optional<AdaptedDrift> u;
  if (!cfg.u.empty()) u = drift_from_exprs(parse_expr_vector(cfg.u, d));
  SimBatch batch = simulate_batch(vc.model, grid, vc.n_paths, vc.seed, u ? &*u : nullptr,
                                  vc.clip_u);

  VerificationReport rep;
  rep.name = "simulate";
  rep.seed = vc.seed;

  // Brownian scaling sanity on the terminal driver value.
  const int m = batch.n_paths;
  std::vector<double> comp(m), samples(m);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int k = 0; k < grid.n_steps; ++k) s += batch.b_path(i)[idx2(k, j, d)];
      comp[i] = s;
    }
    double mean = 0.0;
    for (double v : comp) mean += v;
    mean /= m;
    for (int i = 0; i < m; ++i) {
      const double c = comp[i] - mean;
      samples[i] = c * c - 1.0;
    }
    const MCEstimate est = MCEstimate::of(samples);
    rep.stats.push_back(
        make_stat("var_b" + std::to_string(j + 1) + "_minus_1", est, three_se(est, vc.abs_slack)));
  }
  // |B_1|^2 concentrates at d.
  for (int i = 0; i < m; ++i) {
    double s2 = 0.0;
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < grid.n_steps; ++k) s += batch.b_path(i)[idx2(k, j, d)];
      s2 += s * s;
    }
    samples[i] = s2 - d;
  }
  const MCEstimate est = MCEstimate::of(samples);
  rep.stats.push_back(make_stat("norm_b1_sq_minus_d", est, three_se(est, vc.abs_slack)));

  dump_paths_csv(cfg, batch, grid);
  return rep;
}

VerificationReport run_innovation_diag(const ExperimentConfig& cfg, const VerifierConfig& vc) {
  const TimeGrid grid = make_grid(vc.n_steps);
  AdaptedDrift u = require_u(cfg, vc.model.driver_dim, true);
  InnovationBatch ib = build_innovation(vc, u, false);
  const int m = ib.batch.n_paths, nsteps = grid.n_steps, d = ib.batch.driver_dim;

  std::vector<double> corr(m);
  std::vector<double> dz(static_cast<std::size_t>(nsteps) * d);
  std::ofstream dump;
  if (cfg.dump_paths > 0) {
    std::filesystem::create_directories(cfg.out);
    dump.open(cfg.out + "/innovations.csv");
    dump << "path,step,t";
    for (int j = 0; j < d; ++j) dump << ",dz_" << (j + 1);
    dump << "\n";
  }
  for (int i = 0; i < m; ++i) {
    innovation_increments(ib, i, dz.data());
    double en = 0.0;
    for (int k = 0; k < nsteps; ++k)
      for (int j = 0; j < d; ++j) {
        const double c = dz[idx2(k, j, d)] - ib.batch.b_path(i)[idx2(k, j, d)];
        en += c * c;  // (udot - E[P udot|F])^2 dt^2
      }
    corr[i] = en / grid.dt;
    if (dump.is_open() && i < cfg.dump_paths) {
      for (int k = 0; k < nsteps; ++k) {
        dump << i << "," << k << "," << format_double(grid.times[k]);
        for (int j = 0; j < d; ++j) dump << "," << format_double(dz[idx2(k, j, d)]);
        dump << "\n";
      }
    }
  }
  VerificationReport rep;
  rep.name = "innovation";
  rep.seed = vc.seed;
  rep.stats.push_back(make_stat("correction_energy", MCEstimate::of(corr), 0.0,
                                StatLine::Rule::info));
  return rep;
}

VerificationReport run_represent(const ExperimentConfig& cfg, const VerifierConfig& vc) {
  const TimeGrid grid = make_grid(vc.n_steps);
  RepresentationResult res =
      represent_functional(vc, parse_functional(cfg, grid, vc.model.driver_dim));
  VerificationReport rep;
  rep.name = "represent";
  rep.seed = vc.seed;
  MCEstimate t;
  t.mean = res.target_std;
  t.n_samples = res.n_paths;
  rep.stats.push_back(make_stat("target_std", t, 0.0, StatLine::Rule::info));
  MCEstimate r;
  r.mean = res.residual_l2;
  r.n_samples = res.n_paths;
  rep.stats.push_back(make_stat("residual_l2", r, 0.0, StatLine::Rule::info));
  rep.stats.push_back(make_stat("integrand_energy", res.energy, 0.0, StatLine::Rule::info));
  if (res.residual_warning)
    rep.notes.push_back("warning: residual exceeds 20% of target std (basis too small?)");
  return rep;
}

VerificationReport run_chaos(const ExperimentConfig& cfg, const VerifierConfig& vc) {
  const TimeGrid grid = make_grid(vc.n_steps);
  ChaosResult res = chaos_expand(vc, parse_functional(cfg, grid, vc.model.driver_dim),
                                 cfg.max_order, cfg.n_blocks);
  VerificationReport rep;
  rep.name = "chaos";
  rep.seed = vc.seed;
  MCEstimate t;
  t.mean = res.target_std;
  t.n_samples = res.n_paths;
  rep.stats.push_back(make_stat("target_std", t, 0.0, StatLine::Rule::info));
  for (std::size_t q = 0; q < res.resid_std.size(); ++q) {
    MCEstimate e;
    e.mean = res.resid_std[q];
    e.n_samples = res.n_paths;
    rep.stats.push_back(make_stat("resid_std_after_order" + std::to_string(q + 1), e, 0.0,
                                  StatLine::Rule::info));
    MCEstimate x;
    x.mean = res.explained[q];
    x.n_samples = res.n_paths;
    rep.stats.push_back(make_stat("explained_order" + std::to_string(q + 1), x,
                                  res.null_bound[q], StatLine::Rule::info));
  }
  std::filesystem::create_directories(cfg.out);
  for (std::size_t q = 0; q < res.kernels.size(); ++q) {
    std::ofstream f(cfg.out + "/kernel_order" + std::to_string(q + 1) + ".json");
    f << res.kernels[q].to_json() << "\n";
  }
  return rep;
}

int dispatch(const std::string& cmd, ExperimentConfig cfg) {
  cfg.verifier = cmd;
  VerifierConfig vc = cfg.to_verifier_config();
  const TimeGrid grid = make_grid(vc.n_steps);
  const int d = vc.model.driver_dim;

  if (cmd == "suite") {
    SuiteOptions opts;
    opts.seed = cfg.seed;
    opts.scale = cfg.scale;
    std::vector<VerificationReport> parts = run_suite(opts);
    bool all = true;
    for (const auto& r : parts) {
      std::printf("[%s] %s (%d/%zu statistics)\n", r.name.c_str(),
                  r.pass() ? "PASS" : "FAIL", static_cast<int>(r.stats.size()) - r.n_failures(),
                  r.stats.size());
      all = all && r.pass();
    }
    write_suite_report(parts, cfg.to_json(), cfg.seed, cfg.out);
    std::printf("suite: %s\n", all ? "PASS" : "FAIL");
    return all ? 0 : 1;
  }

  VerificationReport rep;
  if (cmd == "simulate") {
    rep = run_simulate(cfg, vc);
  } else if (cmd == "projector-check") {
    SuiteOptions opts;
    opts.seed = cfg.seed;
    rep = criterion_projector_algebra(opts);
    rep.name = "projector_check";
  } else if (cmd == "verify-wick") {
    std::string hs = cfg.h;
    if (hs.empty()) {
      hs = "(1";
      for (int j = 1; j < d; ++j) hs += ",1";
      hs += ")";
    }
    rep = verify_wick_conditional(vc, cm_from_exprs(parse_expr_vector(hs, d), grid));
  } else if (cmd == "verify-commutation") {
    rep = verify_commutation(vc, require_u(cfg, d, false));
  } else if (cmd == "represent") {
    rep = run_represent(cfg, vc);
  } else if (cmd == "chaos") {
    rep = run_chaos(cfg, vc);
  } else if (cmd == "innovation") {
    rep = run_innovation_diag(cfg, vc);
  } else if (cmd == "zeta") {
    rep = verify_zeta_identity(vc, require_u(cfg, d, false));
  } else if (cmd == "verify-innovation") {
    rep = verify_innovation_martingale(vc, require_u(cfg, d, true));
  } else if (cmd == "entropy") {
    rep = entropy_report(vc, require_u(cfg, d, false));
  } else if (cmd == "monge-ampere") {
    if (cfg.v.empty()) throw InvalidArgument("monge-ampere requires --v");
    const auto v = parse_expr_vector(cfg.v, d);
    if (cfg.u_override.empty()) {
      rep = monge_ampere_residual(vc, v);
    } else {
      const auto uo = parse_expr_vector(cfg.u_override, d);
      rep = monge_ampere_residual(vc, v, &uo);
    }
  } else {
    throw InvalidArgument("unknown subcommand '" + cmd + "'");
  }

  rep.config = cfg.to_json();
  rep.seed = cfg.seed;
  write_report(rep, cfg.out);
  for (const auto& s : rep.stats)
    if (!s.pass)
      std::printf("FAIL %s: mean=%.6g threshold=%.6g\n", s.label.c_str(), s.est.mean,
                  s.threshold);
  std::printf("%s: %s (%d/%zu statistics, reports in %s)\n", rep.name.c_str(),
              rep.pass() ? "PASS" : "FAIL", static_cast<int>(rep.stats.size()) - rep.n_failures(),
              rep.stats.size(), cfg.out.c_str());
  return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo verifiers for degenerate diffusions: minimal-martingale "
               "representation, innovation processes, and causal entropy transport"};
  app.require_subcommand(1);

  std::string config_file;
  ExperimentConfig flags;
  std::string basis_kind = flags.basis_kind;
  std::vector<int> basis_lags = flags.basis_lags;
  double clip_u = 0.0;

  const std::vector<std::string> cmds = {"simulate",   "projector-check", "verify-wick",
                                         "verify-commutation", "represent", "chaos",
                                         "innovation", "zeta", "verify-innovation", "entropy",
                                         "monge-ampere", "suite"};
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    CLI::App* s = app.add_subcommand(c);
    s->add_option("--config", config_file, "experiment config JSON file");
    s->add_option("--model", flags.model, "builtin model name (M1..M5 or full names)");
    s->add_option("--n-steps", flags.n_steps, "grid steps on [0,1]");
    s->add_option("--n-paths", flags.n_paths, "Monte Carlo sample size");
    s->add_option("--seed", flags.seed, "RNG seed");
    s->add_option("--rank-tol", flags.rank_tol, "relative SVD rank threshold");
    s->add_option("--ridge", flags.ridge, "ridge parameter (<0 = default scale)");
    s->add_option("--clip-u", clip_u, "zero udot once its running L2 mass exceeds R");
    s->add_option("--basis", basis_kind, "feature basis kind: polynomial|fourier");
    s->add_option("--basis-degree", flags.basis_degree, "basis degree (0 = constant only)");
    s->add_option("--basis-lags", basis_lags, "basis lag offsets")->delimiter(',');
    s->add_option("--basis-omega", flags.basis_omega, "fourier base frequency");
    s->add_flag("--holdout", flags.holdout, "report train/holdout residual gap");
    s->add_flag("--exclude-rank-jumps", flags.exclude_rank_jumps,
                "drop paths with projector rank changes");
    s->add_option("--h", flags.h, "Cameron-Martin derivative expression, e.g. \"(1,0)\"");
    s->add_option("--u", flags.u, "adapted drift expression over t,x_i,b_i");
    s->add_option("--v", flags.v, "state-adapted drift expression (density construction)");
    s->add_option("--u-override", flags.u_override, "foreign drift for the negative control");
    s->add_option("--functional", flags.functional,
                  "target functional: expr over x_i at t=1, or lin:<h>, sq:<h>");
    s->add_option("--max-order", flags.max_order, "chaos truncation order");
    s->add_option("--n-blocks", flags.n_blocks, "kernel blocks per axis");
    s->add_option("--dump-paths", flags.dump_paths, "dump the first K paths as CSV");
    s->add_option("--scale", flags.scale, "suite: multiplier on path counts");
    s->add_option("--out", flags.out, "output directory");
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    return fail_config(e.what(), "command line");
  }

  CLI::App* active = nullptr;
  for (auto* s : subs)
    if (s->parsed()) active = s;
  if (!active) return fail_config("missing subcommand", "command line");

  try {
    ExperimentConfig cfg;
    if (active->count("--config") > 0) {
      std::ifstream f(config_file);
      if (!f) return fail_config("cannot open config file", config_file);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::parse_error& e) {
        return fail_config(e.what(), config_file + ":byte " + std::to_string(e.byte));
      }
      cfg = ExperimentConfig::from_json(j);
    }
    // Explicit command-line flags override the file.
    auto set = [&](const char* name) { return active->count(name) > 0; };
    if (set("--model")) { cfg.model = flags.model; cfg.custom_model.reset(); }
    if (set("--n-steps")) cfg.n_steps = flags.n_steps;
    if (set("--n-paths")) cfg.n_paths = flags.n_paths;
    if (set("--seed")) cfg.seed = flags.seed;
    if (set("--rank-tol")) cfg.rank_tol = flags.rank_tol;
    if (set("--ridge")) cfg.ridge = flags.ridge;
    if (set("--clip-u")) cfg.clip_u = clip_u;
    if (set("--basis")) cfg.basis_kind = basis_kind;
    if (set("--basis-degree")) cfg.basis_degree = flags.basis_degree;
    if (set("--basis-lags")) cfg.basis_lags = basis_lags;
    if (set("--basis-omega")) cfg.basis_omega = flags.basis_omega;
    if (set("--holdout")) cfg.holdout = flags.holdout;
    if (set("--exclude-rank-jumps")) cfg.exclude_rank_jumps = flags.exclude_rank_jumps;
    if (set("--h")) cfg.h = flags.h;
    if (set("--u")) cfg.u = flags.u;
    if (set("--v")) cfg.v = flags.v;
    if (set("--u-override")) cfg.u_override = flags.u_override;
    if (set("--functional")) cfg.functional = flags.functional;
    if (set("--max-order")) cfg.max_order = flags.max_order;
    if (set("--n-blocks")) cfg.n_blocks = flags.n_blocks;
    if (set("--dump-paths")) cfg.dump_paths = flags.dump_paths;
    if (set("--scale")) cfg.scale = flags.scale;
    if (set("--out")) cfg.out = flags.out;

    try {
      return dispatch(active->get_name(), std::move(cfg));
    } catch (const InvalidArgument& e) {
      return fail_config(e.what());
    } catch (const ModelError& e) {
      return fail_config(e.what());
    } catch (const std::exception& e) {
      return fail_runtime(e.what());
    }
  } catch (const InvalidArgument& e) {
    return fail_config(e.what());
  } catch (const std::exception& e) {
    return fail_runtime(e.what());
  }
}
