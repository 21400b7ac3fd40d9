#include "dmr/config.hpp"

#include <cmath>

namespace dmr {

namespace {

CustomModelDef custom_from_json(const nlohmann::json& j) {
  CustomModelDef def;
  def.state_dim = j.at("n").get<int>();
  def.driver_dim = j.at("d").get<int>();
  def.x0 = j.at("x0").get<std::vector<double>>();
  def.sigma = j.at("sigma").get<std::vector<std::vector<std::string>>>();
  def.drift = j.at("b").get<std::vector<std::string>>();
  def.lipschitz_k = j.value("lipschitz_k", 0.0);
  def.name = j.value("name", std::string("custom"));
  return def;
}

nlohmann::ordered_json custom_to_json(const CustomModelDef& def) {
  nlohmann::ordered_json j;
  j["name"] = def.name;
  j["n"] = def.state_dim;
  j["d"] = def.driver_dim;
  j["x0"] = def.x0;
  j["sigma"] = def.sigma;
  j["b"] = def.drift;
  j["lipschitz_k"] = def.lipschitz_k;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto& v = it.value();
    try {
      if (key == "verifier") c.verifier = v.get<std::string>();
      else if (key == "model") {
        if (v.is_string()) c.model = v.get<std::string>();
        else {
          c.custom_model = custom_from_json(v);
          c.model = c.custom_model->name;
        }
      } else if (key == "n_steps") c.n_steps = v.get<int>();
      else if (key == "n_paths") c.n_paths = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "rank_tol") c.rank_tol = v.get<double>();
      else if (key == "ridge") c.ridge = v.get<double>();
      else if (key == "clip_u") c.clip_u = v.is_null() ? kNoClip : v.get<double>();
      else if (key == "basis") {
        c.basis_kind = v.value("kind", c.basis_kind);
        c.basis_degree = v.value("degree", c.basis_degree);
        if (v.contains("lags")) c.basis_lags = v.at("lags").get<std::vector<int>>();
        c.basis_omega = v.value("omega", c.basis_omega);
      } else if (key == "holdout") c.holdout = v.get<bool>();
      else if (key == "exclude_rank_jumps") c.exclude_rank_jumps = v.get<bool>();
      else if (key == "h") c.h = v.is_null() ? "" : v.get<std::string>();
      else if (key == "u") c.u = v.is_null() ? "" : v.get<std::string>();
      else if (key == "v") c.v = v.is_null() ? "" : v.get<std::string>();
      else if (key == "u_override") c.u_override = v.is_null() ? "" : v.get<std::string>();
      else if (key == "functional") c.functional = v.get<std::string>();
      else if (key == "max_order") c.max_order = v.get<int>();
      else if (key == "n_blocks") c.n_blocks = v.get<int>();
      else if (key == "dump_paths") c.dump_paths = v.get<int>();
      else if (key == "scale") c.scale = v.get<double>();
      else if (key == "out") c.out = v.get<std::string>();
      else throw InvalidArgument("config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("config: bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["verifier"] = verifier;
  if (custom_model)
    j["model"] = custom_to_json(*custom_model);
  else
    j["model"] = model;
  j["n_steps"] = n_steps;
  j["n_paths"] = n_paths;
  j["seed"] = seed;
  j["rank_tol"] = rank_tol;
  j["ridge"] = ridge;
  if (std::isfinite(clip_u))
    j["clip_u"] = clip_u;
  else
    j["clip_u"] = nullptr;
  nlohmann::ordered_json b;
  b["kind"] = basis_kind;
  b["degree"] = basis_degree;
  b["lags"] = basis_lags;
  b["omega"] = basis_omega;
  j["basis"] = b;
  j["holdout"] = holdout;
  j["exclude_rank_jumps"] = exclude_rank_jumps;
  j["h"] = h.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(h);
  j["u"] = u.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(u);
  j["v"] = v.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
  j["u_override"] =
      u_override.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(u_override);
  j["functional"] = functional;
  j["max_order"] = max_order;
  j["n_blocks"] = n_blocks;
  j["dump_paths"] = dump_paths;
  j["scale"] = scale;
  j["out"] = out;
  return j;
}

ModelSpec ExperimentConfig::resolve_model() const {
  if (custom_model) return make_custom_model(*custom_model);
  return builtin_model(model);
}

FeatureBasis ExperimentConfig::resolve_basis() const {
  return FeatureBasis::from_strings(basis_kind, basis_degree, basis_lags, basis_omega);
}

VerifierConfig ExperimentConfig::to_verifier_config() const {
  VerifierConfig v;
  v.model = resolve_model();
  v.n_steps = n_steps;
  v.n_paths = n_paths;
  v.seed = seed;
  v.basis = resolve_basis();
  v.rank_tol = rank_tol;
  v.ridge = ridge;
  v.clip_u = clip_u;
  v.holdout = holdout;
  v.exclude_rank_jumps = exclude_rank_jumps;
  return v;
}

}  // namespace dmr
