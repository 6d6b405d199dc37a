#pragma once

// Minimal reverse-mode scalar tape.
//
// Design notes
// ------------
// Nodes are appended to a flat array; each records at most two parents with
// local partial derivatives frozen at forward time. backward() is a single
// reverse sweep. Inputs carry an opaque param_id; the same id may appear on
// several leaves and the caller sums their adjoints.
//
// Non-smooth operations (abs, relu, max, min, the guarded sqrt) commit to a
// branch at forward time. Subgradient conventions: abs' (0) = 0, relu'(0) = 0,
// max/min ties take the first operand, sqrt_or_zero'(0) = 0. Each such node
// also reports how far its argument sits from the branch point: the tape
// keeps the minimum, and hashes every branch choice into a signature, so a
// finite-difference harness can recognize and skip probes that straddle a
// kink. Margins are normalized so that one threshold (1e-4, with step 1e-5)
// guarantees the probe stays on a single smooth branch with relative error
// below 1e-4: piecewise-linear nodes store the raw distance, sqrt_or_zero
// stores a tenth of its value because its curvature grows as the argument
// shrinks.

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace boxel {

class Tape {
 public:
  using Idx = std::int32_t;

  Idx input(double value, std::int64_t param_id) {
    Idx id = leaf(value);
    inputs_.emplace_back(id, param_id);
    return id;
  }

  Idx constant(double value) { return leaf(value); }

  Idx add(Idx a, Idx b) { return node(value_[a] + value_[b], a, 1.0, b, 1.0); }
  Idx sub(Idx a, Idx b) { return node(value_[a] - value_[b], a, 1.0, b, -1.0); }
  Idx mul(Idx a, Idx b) { return node(value_[a] * value_[b], a, value_[b], b, value_[a]); }
  Idx neg(Idx a) { return node(-value_[a], a, -1.0); }
  Idx scale(Idx a, double k) { return node(k * value_[a], a, k); }
  Idx shift(Idx a, double k) { return node(value_[a] + k, a, 1.0); }
  Idx square(Idx a) { return node(value_[a] * value_[a], a, 2.0 * value_[a]); }

  Idx abs_val(Idx a) {
    double v = value_[a];
    kink(std::abs(v), v >= 0.0);
    return node(std::abs(v), a, v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
  }

  Idx relu(Idx a) {
    double v = value_[a];
    kink(std::abs(v), v > 0.0);
    return node(v > 0.0 ? v : 0.0, a, v > 0.0 ? 1.0 : 0.0);
  }

  Idx vmax(Idx a, Idx b) {
    double va = value_[a], vb = value_[b];
    kink(std::abs(va - vb), va >= vb);
    if (va >= vb) return node(va, a, 1.0);
    return node(vb, b, 1.0);
  }

  Idx vmin(Idx a, Idx b) {
    double va = value_[a], vb = value_[b];
    kink(std::abs(va - vb), va <= vb);
    if (va <= vb) return node(va, a, 1.0);
    return node(vb, b, 1.0);
  }

  // sqrt for nonnegative arguments with a flat branch at zero.
  Idx sqrt_or_zero(Idx a) {
    double v = value_[a];
    double s = v > 0.0 ? std::sqrt(v) : 0.0;
    kink(0.1 * s, v > 0.0);
    return node(s, a, v > 0.0 ? 0.5 / s : 0.0);
  }

  double value(Idx a) const { return value_[a]; }

  void backward(Idx root);

  double adjoint(Idx a) const { return adjoint_[a]; }

  template <typename F>
  void for_each_input(F&& f) const {
    for (const auto& [idx, param_id] : inputs_) f(param_id, adjoint_[idx]);
  }

  double min_kink_margin() const { return min_margin_; }
  std::uint64_t branch_signature() const { return signature_; }

  std::size_t size() const { return value_.size(); }

 private:
  struct Node {
    Idx p1 = -1, p2 = -1;
    double d1 = 0.0, d2 = 0.0;
  };

  Idx leaf(double v) {
    value_.push_back(v);
    nodes_.push_back(Node{});
    return static_cast<Idx>(value_.size() - 1);
  }

  Idx node(double v, Idx p1, double d1, Idx p2 = -1, double d2 = 0.0) {
    value_.push_back(v);
    nodes_.push_back(Node{p1, p2, d1, d2});
    return static_cast<Idx>(value_.size() - 1);
  }

  void kink(double margin, bool branch) {
    if (margin < min_margin_) min_margin_ = margin;
    signature_ = (signature_ ^ (branch ? 0x9e3779b97f4a7c15ULL : 0xc2b2ae3d27d4eb4fULL)) *
                 0x100000001b3ULL;
  }

  std::vector<Node> nodes_;
  std::vector<double> value_;
  std::vector<double> adjoint_;
  std::vector<std::pair<Idx, std::int64_t>> inputs_;
  double min_margin_ = std::numeric_limits<double>::infinity();
  std::uint64_t signature_ = 0xcbf29ce484222325ULL;
};

}  // namespace boxel
