#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dmr {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Read-only view over the first `len` rows of a row-major (rows x dim) array.
/// Used to hand path prefixes to adapted callbacks without copying.
struct HistView {
  const double* data = nullptr;
  int len = 0;
  int dim = 0;

  const double* row(int k) const { return data + static_cast<std::size_t>(k) * dim; }
  double at(int k, int j) const { return row(k)[j]; }
  bool empty() const { return len == 0; }
};

inline std::size_t idx2(int i, int j, int dim) {
  return static_cast<std::size_t>(i) * dim + j;
}

}  // namespace dmr
