#include "dmr/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace dmr {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

StatLine make_stat(std::string label, MCEstimate est, double threshold, StatLine::Rule rule) {
  StatLine s;
  s.label = std::move(label);
  s.est = est;
  s.threshold = threshold;
  s.rule = rule;
  switch (rule) {
    case StatLine::Rule::abs_le: s.pass = std::abs(est.mean) <= threshold; break;
    case StatLine::Rule::le: s.pass = est.mean <= threshold; break;
    case StatLine::Rule::ge: s.pass = est.mean >= threshold; break;
    case StatLine::Rule::info: s.pass = true; break;
  }
  return s;
}

bool VerificationReport::pass() const { return n_failures() == 0; }

int VerificationReport::n_failures() const {
  int n = 0;
  for (const auto& s : stats)
    if (!s.pass) ++n;
  return n;
}

namespace {

const char* rule_name(StatLine::Rule r) {
  switch (r) {
    case StatLine::Rule::abs_le: return "abs_le";
    case StatLine::Rule::le: return "le";
    case StatLine::Rule::ge: return "ge";
    case StatLine::Rule::info: return "info";
  }
  return "?";
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

nlohmann::ordered_json stat_json(const StatLine& s) {
  nlohmann::ordered_json j;
  j["label"] = s.label;
  j["mean"] = s.est.mean;
  j["std_error"] = s.est.std_error;
  j["n_samples"] = s.est.n_samples;
  j["threshold"] = s.threshold;
  j["rule"] = rule_name(s.rule);
  j["pass"] = s.pass;
  return j;
}

}  // namespace

nlohmann::ordered_json report_json(const VerificationReport& rep, bool with_timestamp) {
  nlohmann::ordered_json j;
  j["name"] = rep.name;
  j["seed"] = rep.seed;
  j["pass"] = rep.pass();
  j["escalated"] = rep.escalated;
  j["config"] = rep.config;
  j["statistics"] = nlohmann::ordered_json::array();
  for (const auto& s : rep.stats) j["statistics"].push_back(stat_json(s));
  j["notes"] = rep.notes;
  if (with_timestamp) j["timestamp"] = iso_timestamp();
  return j;
}

std::string report_csv(const VerificationReport& rep) {
  std::string out = "label,mean,std_error,n,threshold,pass\n";
  for (const auto& s : rep.stats) {
    out += s.label + "," + format_double(s.est.mean) + "," + format_double(s.est.std_error) +
           "," + std::to_string(s.est.n_samples) + "," + format_double(s.threshold) + "," +
           (s.pass ? "1" : "0") + "\n";
  }
  return out;
}

void write_report(const VerificationReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/report.json");
    f << report_json(rep, true).dump(2) << "\n";
  }
  {
    std::ofstream f(out_dir + "/stats.csv");
    f << report_csv(rep);
  }
}

void write_suite_report(const std::vector<VerificationReport>& parts,
                        const nlohmann::ordered_json& config, std::uint64_t seed,
                        const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  bool all = true;
  nlohmann::ordered_json j;
  j["name"] = "suite";
  j["seed"] = seed;
  for (const auto& r : parts) all = all && r.pass();
  j["pass"] = all;
  j["config"] = config;
  j["parts"] = nlohmann::ordered_json::array();
  std::string csv = "label,mean,std_error,n,threshold,pass\n";
  for (const auto& r : parts) {
    j["parts"].push_back(report_json(r, false));
    for (const auto& s : r.stats)
      csv += r.name + "." + s.label + "," + format_double(s.est.mean) + "," +
             format_double(s.est.std_error) + "," + std::to_string(s.est.n_samples) + "," +
             format_double(s.threshold) + "," + (s.pass ? "1" : "0") + "\n";
  }
  j["timestamp"] = iso_timestamp();
  {
    std::ofstream f(out_dir + "/report.json");
    f << j.dump(2) << "\n";
  }
  {
    std::ofstream f(out_dir + "/stats.csv");
    f << csv;
  }
}

}  // namespace dmr
