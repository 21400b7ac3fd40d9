#include "dmr/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace dmr {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  Expr run() {
    Expr e;
    e.source_ = std::string(src_);
    out_ = &e;
    e.root_ = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  Expr* out_ = nullptr;

  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("expression error at offset " + std::to_string(pos_) + ": " + what +
                          " in \"" + std::string(src_) + "\"");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  int add(Expr::Node n) {
    out_->nodes_.push_back(n);
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  int parse_sum() {
    int lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = add({Expr::Op::kAdd, lhs, parse_term()});
      else if (eat('-'))
        lhs = add({Expr::Op::kSub, lhs, parse_term()});
      else
        return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (eat('*'))
        lhs = add({Expr::Op::kMul, lhs, parse_factor()});
      else if (eat('/'))
        lhs = add({Expr::Op::kDiv, lhs, parse_factor()});
      else
        return lhs;
    }
  }

  int parse_factor() {
    if (eat('-')) return add({Expr::Op::kNeg, parse_factor(), -1});
    if (eat('+')) return parse_factor();
    return parse_atom();
  }

  int parse_index_suffix() {
    // x1, x_1, b2, ... (1-based in the surface syntax)
    if (pos_ < src_.size() && src_[pos_] == '_') ++pos_;
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected coordinate index");
    int idx = std::atoi(std::string(src_.substr(start, pos_ - start)).c_str());
    if (idx < 1) fail("coordinate indices are 1-based");
    return idx - 1;
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];

    if (c == '(') {
      ++pos_;
      int inner = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.data() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return add({Expr::Op::kConst, -1, -1, v});
    }

    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      std::string word(src_.substr(start, pos_ - start));
      if (word == "t") return add({Expr::Op::kTime, -1, -1});
      if (word == "pi") return add({Expr::Op::kConst, -1, -1, std::numbers::pi});
      if (word == "x") {
        out_->uses_state_ = true;
        Expr::Node n{Expr::Op::kState, -1, -1};
        n.index = parse_index_suffix();
        return add(n);
      }
      if (word == "b") {
        out_->uses_driver_ = true;
        Expr::Node n{Expr::Op::kDriver, -1, -1};
        n.index = parse_index_suffix();
        return add(n);
      }
      if (word == "sin" || word == "cos") {
        if (!eat('(')) fail("expected '(' after function name");
        int arg = parse_sum();
        if (!eat(')')) fail("expected ')'");
        return add({word == "sin" ? Expr::Op::kSin : Expr::Op::kCos, arg, -1});
      }
      pos_ = start;
      fail("unknown identifier '" + word + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

Expr Expr::parse(std::string_view src) { return ExprParser(src).run(); }

double Expr::eval(const Ctx& ctx) const {
  // Nodes are appended children-first, so a single forward sweep evaluates.
  thread_local std::vector<double> stack;
  stack.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    double v = 0.0;
    switch (n.op) {
      case Op::kConst: v = n.value; break;
      case Op::kTime: v = ctx.t; break;
      case Op::kState:
        if (n.index >= ctx.nx) throw InvalidArgument("expression reads x" + std::to_string(n.index + 1) + " beyond state dimension");
        v = ctx.x[n.index];
        break;
      case Op::kDriver:
        if (n.index >= ctx.nb) throw InvalidArgument("expression reads b" + std::to_string(n.index + 1) + " beyond driver dimension");
        v = ctx.b[n.index];
        break;
      case Op::kAdd: v = stack[n.a] + stack[n.b]; break;
      case Op::kSub: v = stack[n.a] - stack[n.b]; break;
      case Op::kMul: v = stack[n.a] * stack[n.b]; break;
      case Op::kDiv: v = stack[n.a] / stack[n.b]; break;
      case Op::kNeg: v = -stack[n.a]; break;
      case Op::kSin: v = std::sin(stack[n.a]); break;
      case Op::kCos: v = std::cos(stack[n.a]); break;
    }
    stack[i] = v;
  }
  return stack[root_];
}

std::vector<Expr> parse_expr_vector(std::string_view src, int expected_dim) {
  // "(e1, e2, ...)" splits on top-level commas; a bare scalar is a 1-vector.
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i]))) ++i;
  std::size_t end = src.size();
  while (end > i && std::isspace(static_cast<unsigned char>(src[end - 1]))) --end;
  if (i < end && src[i] == '(' && src[end - 1] == ')') {
    int depth = 0;
    bool top_comma = false;
    for (std::size_t j = i; j < end; ++j) {
      if (src[j] == '(') ++depth;
      if (src[j] == ')') --depth;
      if (src[j] == ',' && depth == 1) top_comma = true;
    }
    if (top_comma) {
      std::size_t start = i + 1;
      int depth2 = 0;
      for (std::size_t j = i + 1; j < end - 1; ++j) {
        if (src[j] == '(') ++depth2;
        if (src[j] == ')') --depth2;
        if (src[j] == ',' && depth2 == 0) {
          parts.push_back(src.substr(start, j - start));
          start = j + 1;
        }
      }
      parts.push_back(src.substr(start, end - 1 - start));
    }
  }
  if (parts.empty()) parts.push_back(src);

  if (expected_dim >= 0 && static_cast<int>(parts.size()) != expected_dim)
    throw InvalidArgument("expected a " + std::to_string(expected_dim) +
                          "-component expression, got " + std::to_string(parts.size()) +
                          " in \"" + std::string(src) + "\"");
  std::vector<Expr> out;
  out.reserve(parts.size());
  for (auto p : parts) out.push_back(Expr::parse(p));
  return out;
}

}  // namespace dmr
