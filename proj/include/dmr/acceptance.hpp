#pragma once

#include <vector>

#include "dmr/report.hpp"

namespace dmr {

/// Full-battery options: `scale` multiplies the default path counts (used by
/// the determinism check to run the whole battery cheaply).
struct SuiteOptions {
  std::uint64_t seed = 12345;
  double scale = 1.0;

  int paths(int base) const;
};

VerificationReport criterion_projector_algebra(const SuiteOptions& o);   // C1
VerificationReport criterion_classical_reduction(const SuiteOptions& o); // C2
VerificationReport criterion_wick_degenerate(const SuiteOptions& o);     // C3
VerificationReport criterion_commutation(const SuiteOptions& o);         // C4
VerificationReport criterion_chaos(const SuiteOptions& o);               // C5
VerificationReport criterion_innovation(const SuiteOptions& o);          // C6
VerificationReport criterion_entropy(const SuiteOptions& o);             // C7
VerificationReport criterion_monge_ampere(const SuiteOptions& o);        // C8

std::vector<VerificationReport> run_suite(const SuiteOptions& o);

}  // namespace dmr
