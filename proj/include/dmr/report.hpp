#pragma once

#include <string>
#include <vector>

#include "dmr/estimate.hpp"
#include "json.hpp"

namespace dmr {

/// One statistic with its pass rule. `threshold` is the numeric bound the
/// rule compares against (typically 3 standard errors plus a small absolute
/// slack for statistics that are exact up to rounding).
struct StatLine {
  std::string label;
  MCEstimate est;
  double threshold = 0.0;
  enum class Rule { abs_le, le, ge, info } rule = Rule::abs_le;
  bool pass = true;
};

StatLine make_stat(std::string label, MCEstimate est, double threshold,
                   StatLine::Rule rule = StatLine::Rule::abs_le);

struct VerificationReport {
  std::string name;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;  // resolved config echo
  std::vector<StatLine> stats;
  std::vector<std::string> notes;
  bool escalated = false;  // re-run at 4x samples was triggered

  bool pass() const;
  int n_failures() const;
};

/// Deterministic JSON body; the timestamp field is appended only when
/// `with_timestamp` (excluded from determinism comparisons).
nlohmann::ordered_json report_json(const VerificationReport& rep, bool with_timestamp);

/// CSV lines "label,mean,std_error,n,threshold,pass" with 17 significant digits.
std::string report_csv(const VerificationReport& rep);

/// Writes report.json and stats.csv under out_dir (created if missing).
void write_report(const VerificationReport& rep, const std::string& out_dir);

/// Aggregate writer for suite runs: one report.json/stats.csv covering all parts.
void write_suite_report(const std::vector<VerificationReport>& parts,
                        const nlohmann::ordered_json& config, std::uint64_t seed,
                        const std::string& out_dir);

std::string format_double(double v);  // %.17g

}  // namespace dmr
