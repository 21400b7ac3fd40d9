#include "dmr/estimate.hpp"

#include <cmath>

namespace dmr {

MCEstimate MCEstimate::of(const std::vector<double>& xs) {
  MCEstimate e;
  e.n_samples = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / xs.size();
  if (xs.size() < 2) return e;
  double ss = 0.0;
  for (double x : xs) {
    const double c = x - e.mean;
    ss += c * c;
  }
  const double var = ss / (xs.size() - 1);
  e.std_error = std::sqrt(var / xs.size());
  return e;
}

}  // namespace dmr
