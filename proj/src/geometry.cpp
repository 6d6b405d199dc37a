#include "boxel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boxel/rng.hpp"

#ifdef BOXEL_HAVE_OPENMP
#include <omp.h>
#endif

namespace boxel {

namespace {

void require_same_dim(const ExtendedBox& a, const ExtendedBox& b, const char* op) {
  if (a.dim() != b.dim())
    throw BoxOperationError(std::string(op) + ": dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
}

void require_plain(const ExtendedBox& b, const char* op, const char* operand) {
  if (b.universal)
    throw BoxOperationError(std::string(op) + ": " + operand + " must be bounded");
  for (std::size_t j = 0; j < b.dim(); ++j)
    if (!b.mask[j])
      throw BottomFillerError(std::string(op) + ": " + operand + " has an empty component");
}

}  // namespace

ExtendedBox plain_box(std::vector<double> center, std::vector<double> offset) {
  ExtendedBox b;
  b.mask.assign(center.size(), 1);
  b.center = std::move(center);
  b.offset = std::move(offset);
  return b;
}

ExtendedBox point_box(std::vector<double> center) {
  std::vector<double> zero(center.size(), 0.0);
  return plain_box(std::move(center), std::move(zero));
}

ExtendedBox empty_box(std::size_t n) {
  ExtendedBox b;
  b.center.assign(n, 0.0);
  b.offset.assign(n, 0.0);
  b.mask.assign(n, 0);
  return b;
}

ExtendedBox universal_box(std::size_t n) {
  ExtendedBox b;
  b.center.assign(n, 0.0);
  b.offset.assign(n, 0.0);
  b.mask.assign(n, 1);
  b.universal = true;
  return b;
}

bool is_plain(const ExtendedBox& b) {
  if (b.universal) return false;
  for (std::size_t j = 0; j < b.dim(); ++j)
    if (!b.mask[j]) return false;
  return true;
}

bool fully_masked(const ExtendedBox& b) {
  if (b.universal) return false;
  for (std::size_t j = 0; j < b.dim(); ++j)
    if (b.mask[j]) return false;
  return b.dim() > 0;
}

bool any_masked(const ExtendedBox& b) {
  if (b.universal) return false;
  for (std::size_t j = 0; j < b.dim(); ++j)
    if (!b.mask[j]) return true;
  return false;
}

double norm_value(const std::vector<double>& v, Norm norm) {
  double acc = 0.0;
  if (norm == Norm::L2) {
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
  }
  for (double x : v) acc += std::abs(x);
  return acc;
}

ExtendedBox intersect(const ExtendedBox& a, const ExtendedBox& b) {
  require_same_dim(a, b, "intersect");
  if (a.universal) return b;
  if (b.universal) return a;
  std::size_t n = a.dim();
  ExtendedBox out = empty_box(n);
  for (std::size_t j = 0; j < n; ++j) {
    double a_lo = a.center[j] - a.offset[j], a_hi = a.center[j] + a.offset[j];
    double b_lo = b.center[j] - b.offset[j], b_hi = b.center[j] + b.offset[j];
    double lo = std::max(a_lo, b_lo);
    double hi = std::min(a_hi, b_hi);
    if (a_lo >= b_lo && a_hi <= b_hi) {
      // One interval nested in the other: reuse its representation verbatim.
      // Reconstructing center and offset from the corners would perturb them
      // by rounding, breaking exact idempotence.
      out.center[j] = a.center[j];
      out.offset[j] = a.offset[j];
    } else if (b_lo >= a_lo && b_hi <= a_hi) {
      out.center[j] = b.center[j];
      out.offset[j] = b.offset[j];
    } else {
      // Midpoint formula covers both remaining cases: interval midpoint on a
      // partial overlap, gap midpoint (inert) when the coordinate is empty.
      out.center[j] = 0.5 * (lo + hi);
      out.offset[j] = std::max(0.0, 0.5 * (hi - lo));
    }
    out.mask[j] = (a.mask[j] && b.mask[j] && hi >= lo) ? 1 : 0;
  }
  return out;
}

ExtendedBox exists_box(const ExtendedBox& role, const ExtendedBox& filler) {
  require_same_dim(role, filler, "exists_box");
  require_plain(role, "exists_box", "role");
  require_plain(filler, "exists_box", "filler");
  std::size_t n = role.dim();
  ExtendedBox out = plain_box(std::vector<double>(n), std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.center[j] = role.center[j] + filler.center[j];
    out.offset[j] = role.offset[j] + filler.offset[j];
  }
  return out;
}

ExtendedBox exists_all_box(const ExtendedBox& role, const ExtendedBox& filler) {
  require_same_dim(role, filler, "exists_all_box");
  require_plain(role, "exists_all_box", "role");
  require_plain(filler, "exists_all_box", "filler");
  std::size_t n = role.dim();
  ExtendedBox out = plain_box(std::vector<double>(n), std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.center[j] = role.center[j] + filler.center[j];
    out.offset[j] = std::max(0.0, role.offset[j] - filler.offset[j]);
  }
  return out;
}

ExtendedBox compose_roles(const ExtendedBox& r, const ExtendedBox& t) {
  require_same_dim(r, t, "compose_roles");
  require_plain(r, "compose_roles", "first role");
  require_plain(t, "compose_roles", "second role");
  std::size_t n = r.dim();
  ExtendedBox out = plain_box(std::vector<double>(n), std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.center[j] = r.center[j] + t.center[j];
    out.offset[j] = r.offset[j] + t.offset[j];
  }
  return out;
}

std::vector<double> box_distance(const ExtendedBox& a, const ExtendedBox& b) {
  require_same_dim(a, b, "box_distance");
  if (a.universal || b.universal)
    throw BoxOperationError("box_distance: operands must be bounded");
  std::size_t n = a.dim();
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j)
    d[j] = std::abs(a.center[j] - b.center[j]) - a.offset[j] - b.offset[j];
  return d;
}

double inclusion_loss(const ExtendedBox& a, const ExtendedBox& b, double gamma, Norm norm) {
  require_same_dim(a, b, "inclusion_loss");
  if (b.universal) return 0.0;
  if (a.universal) return std::numeric_limits<double>::infinity();
  std::size_t n = a.dim();
  std::vector<double> shrink(n), violation(n);
  std::vector<double> d = box_distance(a, b);
  for (std::size_t j = 0; j < n; ++j) {
    double ma = a.mask[j] ? 1.0 : 0.0;
    double mb = b.mask[j] ? 1.0 : 0.0;
    shrink[j] = a.offset[j] * ma * (1.0 - mb);
    violation[j] = std::max(0.0, (d[j] + 2.0 * a.offset[j]) * ma * mb - gamma);
  }
  return norm_value(shrink, norm) + norm_value(violation, norm);
}

double non_inclusion_loss(const ExtendedBox& a, const ExtendedBox& b, double gamma,
                          Norm norm, bool per_coordinate) {
  require_same_dim(a, b, "non_inclusion_loss");
  require_plain(a, "non_inclusion_loss", "first box");
  require_plain(b, "non_inclusion_loss", "second box");
  std::vector<double> d = box_distance(a, b);
  std::size_t n = a.dim();
  if (per_coordinate) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double clip = std::max(0.0, -d[j] - gamma);
      acc += (1.0 - clip) * (1.0 - clip);
    }
    return acc / static_cast<double>(n);
  }
  std::vector<double> clip(n);
  for (std::size_t j = 0; j < n; ++j) clip[j] = std::max(0.0, -d[j] - gamma);
  double v = 1.0 - norm_value(clip, norm);
  return v * v;
}

bool contains_point(const ExtendedBox& b, const std::vector<double>& x) {
  if (x.size() != b.dim())
    throw BoxOperationError("contains_point: dimension mismatch");
  if (b.universal) return true;
  for (std::size_t j = 0; j < b.dim(); ++j) {
    if (!b.mask[j]) return false;
    if (std::abs(x[j] - b.center[j]) > b.offset[j]) return false;
  }
  return true;
}

namespace {

// One sampled pair: true iff every coordinate interval overlaps. The pair
// shares one offset draw per coordinate — that is the model under which the
// closed-form probability is exactly (2/3)^n: with a ~ U(0,1] and centers
// c1, c2 ~ U[-1,1], P(|c1-c2| <= 2a) = 2a - a^2, whose mean over a is 2/3.
// Draw order per coordinate is (c1, c2, a) from the sample's own stream.
bool sample_pair_intersects(std::size_t n, std::uint64_t seed, std::uint64_t index) {
  SplitMix64 rng = sample_stream(seed, index);
  bool hit = true;
  for (std::size_t j = 0; j < n; ++j) {
    double c1 = rng.uniform(-1.0, 1.0);
    double c2 = rng.uniform(-1.0, 1.0);
    double a = rng.positive(1.0);
    if (std::abs(c1 - c2) > 2.0 * a) hit = false;
  }
  return hit;
}

}  // namespace

double monte_carlo_intersection_probability_serial(std::size_t n, std::size_t samples,
                                                   std::uint64_t seed) {
  if (samples == 0)
    throw BoxOperationError("monte_carlo_intersection_probability: samples must be >= 1");
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i)
    if (sample_pair_intersects(n, seed, i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(samples);
}

double monte_carlo_intersection_probability(std::size_t n, std::size_t samples,
                                            std::uint64_t seed, int threads) {
  if (samples == 0)
    throw BoxOperationError("monte_carlo_intersection_probability: samples must be >= 1");
#ifdef BOXEL_HAVE_OPENMP
  if (threads == 1) return monte_carlo_intersection_probability_serial(n, samples, seed);
  std::uint64_t hits = 0;
  std::int64_t count = static_cast<std::int64_t>(samples);
#pragma omp parallel for reduction(+ : hits) schedule(static) \
    num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (std::int64_t i = 0; i < count; ++i)
    if (sample_pair_intersects(n, seed, static_cast<std::uint64_t>(i))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(samples);
#else
  (void)threads;
  return monte_carlo_intersection_probability_serial(n, samples, seed);
#endif
}

}  // namespace boxel
