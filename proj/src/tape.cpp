#include "boxel/tape.hpp"

namespace boxel {

void Tape::backward(Idx root) {
  adjoint_.assign(value_.size(), 0.0);
  adjoint_[root] = 1.0;
  for (Idx i = static_cast<Idx>(value_.size()) - 1; i >= 0; --i) {
    double a = adjoint_[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    if (n.p1 >= 0) adjoint_[n.p1] += a * n.d1;
    if (n.p2 >= 0) adjoint_[n.p2] += a * n.d2;
  }
}

}  // namespace boxel
