#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dmr/common.hpp"

namespace dmr {

/// Small arithmetic expression over {x_i, b_i, t, pi, sin, cos, +, -, *, /}.
/// x_i are state coordinates, b_i driver coordinates, t the current time.
/// Used for custom model coefficients and for the h/u/v drift strings.
class Expr {
 public:
  struct Ctx {
    double t = 0.0;
    const double* x = nullptr;
    int nx = 0;
    const double* b = nullptr;
    int nb = 0;
  };

  double eval(const Ctx& ctx) const;
  bool uses_state() const { return uses_state_; }
  bool uses_driver() const { return uses_driver_; }
  const std::string& source() const { return source_; }

  /// Throws InvalidArgument with a character offset on malformed input.
  static Expr parse(std::string_view src);

 private:
  enum class Op : std::uint8_t {
    kConst, kTime, kState, kDriver, kAdd, kSub, kMul, kDiv, kNeg, kSin, kCos
  };
  struct Node {
    Op op;
    int a = -1, b = -1;  // child indices
    double value = 0.0;  // kConst
    int index = 0;       // kState / kDriver coordinate (0-based)
  };

  std::vector<Node> nodes_;
  int root_ = -1;
  bool uses_state_ = false;
  bool uses_driver_ = false;
  std::string source_;

  friend class ExprParser;
};

/// Parses "(e1, e2, ...)" or a single scalar expression into components.
/// expected_dim < 0 accepts any arity; otherwise mismatches throw.
std::vector<Expr> parse_expr_vector(std::string_view src, int expected_dim);

}  // namespace dmr
