#pragma once

// Axis-aligned box algebra over extended coordinates.
//
// Design notes
// ------------
// A box lives in (R u {empty})^n: each coordinate is either a closed interval
// [center - offset, center + offset] or the empty component. The mask records
// which coordinates are present (1) versus empty (0). This keeps intersection
// closed: two disjoint intervals produce an empty component, never a covering
// hull. A box whose mask is all-zeros is the fully-empty box (the bottom
// concept); `universal` encodes the whole space (the top concept) and wins
// over the numeric fields, which it keeps inert with an all-ones mask.
//
// Masked-out coordinates still carry numeric values so that serialization and
// arithmetic stay total: after an empty intersection the center is the gap
// midpoint and the offset 0. Every downstream formula multiplies by the mask,
// so these values never influence a result.
//
// Translation boxes for roles: a pair (x, y) is related by role r iff
// x - y lies in r's box. The existential box of (role, filler) is then the
// Minkowski sum {x : exists y in filler with x - y in role}: centers add,
// offsets add. Composition of two roles adds the same way. The all-variant
// existential box keeps the center sum but clips the offset to
// max{0, o(role) - o(filler)}: when the role box is at least as wide as the
// filler, every point of it relates to EVERY filler point. A wider filler
// leaves no such points; the clamp then degenerates to the center point so
// the operator stays total and differentiable. Either way the result is
// contained in the plain existential box.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace boxel {

enum class Norm { L2, L1 };

struct ExtendedBox {
  std::vector<double> center;
  std::vector<double> offset;        // nonnegative elementwise
  std::vector<std::uint8_t> mask;    // 1 = interval present, 0 = empty component
  bool universal = false;            // whole space; mask all-ones, numerics inert

  std::size_t dim() const { return center.size(); }
};

// Operation applied to a box outside its domain (wrong dimension, universal
// operand where a bounded one is required).
class BoxOperationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Existential construction over a filler with an empty component.
class BottomFillerError : public BoxOperationError {
 public:
  using BoxOperationError::BoxOperationError;
};

ExtendedBox plain_box(std::vector<double> center, std::vector<double> offset);
ExtendedBox point_box(std::vector<double> center);
ExtendedBox empty_box(std::size_t n);
ExtendedBox universal_box(std::size_t n);

// True iff every component is present and the box is bounded.
bool is_plain(const ExtendedBox& b);
// True iff every component is empty (the bottom box).
bool fully_masked(const ExtendedBox& b);
// True iff at least one component is empty (the box denotes the empty set).
bool any_masked(const ExtendedBox& b);

double norm_value(const std::vector<double>& v, Norm norm);

// Componentwise intersection. Empty components propagate; disjoint intervals
// yield an empty component; the universal box is the identity.
ExtendedBox intersect(const ExtendedBox& a, const ExtendedBox& b);

// Minkowski translation box: center c(role)+c(filler), offset o(role)+o(filler).
// Both inputs must be plain; a masked filler raises BottomFillerError, a
// universal one BoxOperationError.
ExtendedBox exists_box(const ExtendedBox& role, const ExtendedBox& filler);

// All-variant translation box: center c(role)+c(filler), offset
// max{0, o(role)-o(filler)}. Same preconditions as exists_box.
ExtendedBox exists_all_box(const ExtendedBox& role, const ExtendedBox& filler);

// Relational composition of two role boxes: centers add, offsets add.
ExtendedBox compose_roles(const ExtendedBox& r, const ExtendedBox& t);

// Coordinatewise |c1 - c2| - o1 - o2. Negative where the coordinate intervals
// overlap. Masks are NOT applied here; callers apply them.
std::vector<double> box_distance(const ExtendedBox& a, const ExtendedBox& b);

// Masked inclusion penalty, zero iff `a` sits inside `b` with margin `gamma`
// on shared coordinates and has zero offset wherever `b` is masked out:
//   || o(a) * m_a * (1 - m_b) || + || max{0, (d(a,b) + 2 o(a)) * m_a * m_b - gamma} ||
// A universal `b` gives 0; a universal `a` over a bounded `b` returns +inf.
double inclusion_loss(const ExtendedBox& a, const ExtendedBox& b, double gamma,
                      Norm norm = Norm::L2);

// Negative-sample penalty (1 - ||max{0, -d(a,b) - gamma}||)^2. With
// `per_coordinate` the norm is replaced by a per-coordinate mean of
// (1 - max{0, -d_j - gamma})^2. Inputs must be plain boxes.
double non_inclusion_loss(const ExtendedBox& a, const ExtendedBox& b, double gamma,
                          Norm norm = Norm::L2, bool per_coordinate = false);

// Closed-interval membership on every present coordinate; a box with any
// empty component contains no point; a universal box contains every point.
bool contains_point(const ExtendedBox& b, const std::vector<double>& x);

// Fraction of `samples` random box pairs whose standard intersection is
// non-empty. Per coordinate, both centers are uniform in [-1,1] and the pair
// shares one offset uniform in (0,1]; under that model the probability is
// exactly (2/3)^n.
// Deterministic given the seed and independent of thread count: each sample
// draws from its own counter-based stream. threads = 0 picks the runtime
// default, 1 forces the serial reference path.
double monte_carlo_intersection_probability(std::size_t n, std::size_t samples,
                                            std::uint64_t seed, int threads = 0);
double monte_carlo_intersection_probability_serial(std::size_t n, std::size_t samples,
                                                   std::uint64_t seed);

}  // namespace boxel
