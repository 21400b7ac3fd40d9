#include "dmr/ito.hpp"

#include <cmath>

#include "json.hpp"

namespace dmr {

double ito_integral(const std::vector<double>& xi, const BrownianPath& b) {
  if (static_cast<int>(xi.size()) != b.n_steps * b.dim)
    throw InvalidArgument("ito_integral: integrand shape mismatch");
  double s = 0.0;
  for (int k = 0; k < b.n_steps; ++k)
    for (int j = 0; j < b.dim; ++j) s += xi[idx2(k, j, b.dim)] * b.at(k, j);
  return s;
}

void projected_increments(const ProjectorSequence& p, const BrownianPath& b, double* dm_out) {
  if (p.n_steps != b.n_steps || p.dim != b.dim)
    throw InvalidArgument("projected_increments: shape mismatch");
  for (int k = 0; k < b.n_steps; ++k)
    apply_projector(p.mat(k), p.dim, b.row(k), dm_out + idx2(k, 0, b.dim));
}

double wick_exponential(const CameronMartinFn& h, const BrownianPath& b) {
  if (h.n_steps != b.n_steps || h.dim != b.dim)
    throw InvalidArgument("wick_exponential: shape mismatch");
  const double dt = 1.0 / b.n_steps;
  double lin = 0.0, quad = 0.0;
  for (int k = 0; k < b.n_steps; ++k)
    for (int j = 0; j < b.dim; ++j) {
      const double v = h.hdot[idx2(k, j, b.dim)];
      lin += v * b.at(k, j);
      quad += v * v;
    }
  const double w = std::exp(lin - 0.5 * quad * dt);
  if (!std::isfinite(w)) throw SimulationError("wick_exponential: overflow");
  return w;
}

double projected_wick(const CameronMartinFn& h, const ProjectorSequence& p,
                      const BrownianPath& b) {
  if (h.n_steps != b.n_steps || h.dim != b.dim || p.n_steps != b.n_steps || p.dim != b.dim)
    throw InvalidArgument("projected_wick: shape mismatch");
  const double dt = 1.0 / b.n_steps;
  const int d = b.dim;
  double lin = 0.0, quad = 0.0;
  std::vector<double> ph(d);
  for (int k = 0; k < b.n_steps; ++k) {
    apply_projector(p.mat(k), d, h.row(k), ph.data());
    for (int j = 0; j < d; ++j) {
      lin += ph[j] * b.at(k, j);
      quad += ph[j] * ph[j];
    }
  }
  const double w = std::exp(lin - 0.5 * quad * dt);
  if (!std::isfinite(w)) throw SimulationError("projected_wick: overflow");
  return w;
}

namespace {

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

SimplexKernel SimplexKernel::zeros(int order, int n_steps, int n_blocks, int dim) {
  if (order < 1) throw InvalidArgument("SimplexKernel: order must be >= 1");
  if (n_blocks < 1 || n_blocks > n_steps)
    throw InvalidArgument("SimplexKernel: n_blocks must be in [1, n_steps]");
  SimplexKernel f;
  f.order = order;
  f.n_steps = n_steps;
  f.n_blocks = n_blocks;
  f.dim = dim;
  f.coeffs.assign(ipow(n_blocks, order) * ipow(dim, order), 0.0);
  return f;
}

int SimplexKernel::block_of(int step) const {
  // Equal blocks; the last block absorbs the remainder.
  const int per = n_steps / n_blocks;
  return std::min(step / per, n_blocks - 1);
}

double& SimplexKernel::at(const int* blocks, const int* comps) {
  std::size_t bi = 0, ci = 0;
  for (int r = 0; r < order; ++r) {
    bi = bi * n_blocks + blocks[r];
    ci = ci * dim + comps[r];
  }
  return coeffs[bi * ipow(dim, order) + ci];
}

double SimplexKernel::at(const int* blocks, const int* comps) const {
  return const_cast<SimplexKernel*>(this)->at(blocks, comps);
}

std::string SimplexKernel::to_json() const {
  nlohmann::ordered_json j;
  j["order"] = order;
  j["n_steps"] = n_steps;
  j["n_blocks"] = n_blocks;
  j["dim"] = dim;
  j["coeffs"] = coeffs;  // row-major over (block tuple, component tuple)
  return j.dump(2);
}

SimplexKernel SimplexKernel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SimplexKernel f = zeros(j.at("order").get<int>(), j.at("n_steps").get<int>(),
                          j.at("n_blocks").get<int>(), j.at("dim").get<int>());
  auto c = j.at("coeffs").get<std::vector<double>>();
  if (c.size() != f.coeffs.size()) throw InvalidArgument("SimplexKernel: coefficient count mismatch");
  f.coeffs = std::move(c);
  return f;
}

double iterated_integral(const SimplexKernel& f, const double* dm, int n_steps, int dim,
                         int max_order) {
  if (f.order > max_order)
    throw InvalidArgument("iterated_integral: order " + std::to_string(f.order) +
                          " exceeds configured maximum " + std::to_string(max_order));
  if (f.n_steps != n_steps || f.dim != dim)
    throw InvalidArgument("iterated_integral: shape mismatch");
  const int q = f.order, nb = f.n_blocks;

  // Forward recursion in one ascending sweep. acc[r] holds, per flattened
  // tuple ((b_1..b_r), (j_1..j_r)), the ordered sum over already-processed
  // steps k_1 > ... > k_r of dm^{j_1}_{k_1} ... dm^{j_r}_{k_r}. Contracting
  // the kernel's first slot against dm_k BEFORE updating keeps k strictly
  // above the suffix indices. Cost O(N * q * blocks^{q-1} * d^q).
  std::vector<std::vector<double>> acc(q);
  for (int r = 1; r < q; ++r) acc[r].assign(ipow(nb, r) * ipow(dim, r), 0.0);

  double total = 0.0;
  for (int k = 0; k < n_steps; ++k) {
    const int bk = f.block_of(k);
    const double* w = dm + idx2(k, 0, dim);

    if (q == 1) {
      for (int j = 0; j < dim; ++j)
        total += f.coeffs[static_cast<std::size_t>(bk) * dim + j] * w[j];
    } else {
      const auto& suff = acc[q - 1];
      const std::size_t nbs = ipow(nb, q - 1), ds = ipow(dim, q - 1);
      for (int j = 0; j < dim; ++j) {
        if (w[j] == 0.0) continue;
        for (std::size_t sb = 0; sb < nbs; ++sb) {
          const std::size_t cbase = (static_cast<std::size_t>(bk) * nbs + sb) * ds * dim +
                                    static_cast<std::size_t>(j) * ds;
          const std::size_t abase = sb * ds;
          double dot = 0.0;
          for (std::size_t sc = 0; sc < ds; ++sc) dot += f.coeffs[cbase + sc] * suff[abase + sc];
          total += w[j] * dot;
        }
      }
    }

    // Update accumulators high-to-low so acc[r-1] is still pre-step-k.
    for (int r = q - 1; r >= 2; --r) {
      auto& target = acc[r];
      const auto& lower = acc[r - 1];
      const std::size_t nbs = ipow(nb, r - 1), ds = ipow(dim, r - 1);
      for (int j = 0; j < dim; ++j) {
        if (w[j] == 0.0) continue;
        for (std::size_t sb = 0; sb < nbs; ++sb) {
          const std::size_t tbase = (static_cast<std::size_t>(bk) * nbs + sb) * ds * dim +
                                    static_cast<std::size_t>(j) * ds;
          const std::size_t lbase = sb * ds;
          for (std::size_t sc = 0; sc < ds; ++sc) target[tbase + sc] += w[j] * lower[lbase + sc];
        }
      }
    }
    if (q >= 2)
      for (int j = 0; j < dim; ++j) acc[1][static_cast<std::size_t>(bk) * dim + j] += w[j];
  }
  return total;
}

}  // namespace dmr
