#pragma once

#include <optional>
#include <string>

#include "dmr/condexp.hpp"
#include "dmr/model.hpp"
#include "dmr/verify.hpp"
#include "json.hpp"

namespace dmr {

/// One experiment: verifier name plus every knob, with explicit defaults.
/// Round-trips losslessly through JSON; the echoed form appears verbatim in
/// every report.
struct ExperimentConfig {
  std::string verifier = "simulate";
  std::string model = "M1_scalar_bm";
  std::optional<CustomModelDef> custom_model;
  int n_steps = 64;
  int n_paths = 10000;
  std::uint64_t seed = 12345;
  double rank_tol = 1e-10;
  double ridge = -1.0;
  double clip_u = kNoClip;
  std::string basis_kind = "polynomial";
  int basis_degree = 2;
  std::vector<int> basis_lags = {0, 1, 2, 4};
  double basis_omega = 1.0;
  bool holdout = false;
  bool exclude_rank_jumps = false;
  std::string h;           // expression strings; empty = verifier default
  std::string u;
  std::string v;
  std::string u_override;
  std::string functional = "x1";
  int max_order = 2;
  int n_blocks = 8;
  int dump_paths = 0;
  double scale = 1.0;      // suite only
  std::string out = "out";

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  ModelSpec resolve_model() const;
  FeatureBasis resolve_basis() const;
  VerifierConfig to_verifier_config() const;
};

}  // namespace dmr
