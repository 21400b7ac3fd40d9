#pragma once

#include <string>
#include <vector>

#include "dmr/grid.hpp"
#include "dmr/paths.hpp"
#include "dmr/projector.hpp"

namespace dmr {

/// sum_k xi_k . dB_k for an adapted per-step integrand xi (N x d).
double ito_integral(const std::vector<double>& xi, const BrownianPath& b);

/// dm_k = P_k dB_k, the increments of the minimal martingale m.
void projected_increments(const ProjectorSequence& p, const BrownianPath& b, double* dm_out);

/// exp(sum hdot.dB - 1/2 sum |hdot|^2 dt).
double wick_exponential(const CameronMartinFn& h, const BrownianPath& b);

/// exp(sum (P hdot).dB - 1/2 sum |P hdot|^2 dt) = the Wick exponential of h
/// against m, since hdot.dm = (P hdot).dB.
double projected_wick(const CameronMartinFn& h, const ProjectorSequence& p,
                      const BrownianPath& b);

/// Piecewise-constant kernel on the order-q simplex {k_1 > ... > k_q}. Steps
/// are grouped into n_blocks equal blocks; coefficient blocks are stored
/// row-major over (block tuple, component tuple). Only non-increasing block
/// tuples are reachable from the simplex and carry data.
struct SimplexKernel {
  int order = 1;
  int n_steps = 0;
  int n_blocks = 1;
  int dim = 1;
  std::vector<double> coeffs;  // n_blocks^order * dim^order

  double& at(const int* blocks, const int* comps);
  double at(const int* blocks, const int* comps) const;
  int block_of(int step) const;

  static SimplexKernel zeros(int order, int n_steps, int n_blocks, int dim);
  std::string to_json() const;
  static SimplexKernel from_json(const std::string& text);
};

inline constexpr int kMaxChaosOrder = 3;

/// Ordered sum over the simplex via a forward recursion in one sweep:
/// sum_{k_1>...>k_q} <f, dm_{k_1} x ... x dm_{k_q}>. dm is N x d row-major.
double iterated_integral(const SimplexKernel& f, const double* dm, int n_steps, int dim,
                         int max_order = kMaxChaosOrder);

}  // namespace dmr
