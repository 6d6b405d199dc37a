#include "boxel/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <unordered_set>
#include <utility>

#ifdef BOXEL_HAVE_OPENMP
#include <omp.h>
#endif

#include "boxel/rng.hpp"
#include "boxel/tape.hpp"

namespace boxel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Global flat-parameter base offsets matching EmbeddingModel::param ordering:
// [concept centers | concept raw offsets | role centers | role raw offsets |
//  individual points].
struct ParamBases {
  std::int64_t concept_center, concept_offset, role_center, role_offset, individual;
};

ParamBases param_bases(const EmbeddingModel& m) {
  std::int64_t n = static_cast<std::int64_t>(m.dim);
  std::int64_t nc = static_cast<std::int64_t>(m.concept_names.size());
  std::int64_t nr = static_cast<std::int64_t>(m.role_names.size());
  ParamBases b;
  b.concept_center = 0;
  b.concept_offset = b.concept_center + nc * n;
  b.role_center = b.concept_offset + nc * n;
  b.role_offset = b.role_center + nr * n;
  b.individual = b.role_offset + nr * n;
  return b;
}

std::size_t lookup(const std::unordered_map<std::string, std::size_t>& index,
                   const std::string& name, const char* kind) {
  auto it = index.find(name);
  if (it == index.end())
    throw UnknownNameError(std::string(kind) + " '" + name + "' is not in the model");
  return it->second;
}

// ---------------------------------------------------------------------------
// Taped box evaluation. Mirrors eval_concept_box but builds tape nodes so the
// loss can be differentiated. Masks are plain values: coordinate selection is
// decided by comparing forward values and never differentiated through.

struct TapedBox {
  std::vector<Tape::Idx> center, offset;
  std::vector<std::uint8_t> mask;
  bool universal = false;
};

TapedBox taped_entity_box(Tape& t, const EmbeddingModel& m, std::size_t idx,
                          const std::vector<double>& centers,
                          const std::vector<double>& raw_offsets,
                          std::int64_t center_base, std::int64_t offset_base) {
  TapedBox b;
  std::size_t n = m.dim;
  b.center.reserve(n);
  b.offset.reserve(n);
  b.mask.assign(n, 1);
  for (std::size_t j = 0; j < n; ++j) {
    std::int64_t slot = static_cast<std::int64_t>(idx * n + j);
    b.center.push_back(t.input(centers[idx * n + j], center_base + slot));
    b.offset.push_back(t.abs_val(t.input(raw_offsets[idx * n + j], offset_base + slot)));
  }
  return b;
}

TapedBox taped_role_box(Tape& t, const EmbeddingModel& m, const ParamBases& pb,
                        const std::string& role) {
  std::size_t idx = lookup(m.role_index, role, "role");
  return taped_entity_box(t, m, idx, m.role_center, m.role_raw_offset, pb.role_center,
                          pb.role_offset);
}

TapedBox taped_point_box(Tape& t, const EmbeddingModel& m, const ParamBases& pb,
                         const std::string& individual) {
  std::size_t idx = lookup(m.individual_index, individual, "individual");
  TapedBox b;
  std::size_t n = m.dim;
  b.mask.assign(n, 1);
  Tape::Idx zero = t.constant(0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::int64_t slot = static_cast<std::int64_t>(idx * n + j);
    b.center.push_back(t.input(m.individual_point[idx * n + j], pb.individual + slot));
    b.offset.push_back(zero);
  }
  return b;
}

TapedBox taped_intersect(Tape& t, const TapedBox& a, const TapedBox& b) {
  if (a.universal) return b;
  if (b.universal) return a;
  std::size_t n = a.center.size();
  TapedBox r;
  r.mask.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    Tape::Idx lo = t.vmax(t.sub(a.center[j], a.offset[j]), t.sub(b.center[j], b.offset[j]));
    Tape::Idx hi = t.vmin(t.add(a.center[j], a.offset[j]), t.add(b.center[j], b.offset[j]));
    r.center.push_back(t.scale(t.add(lo, hi), 0.5));
    r.offset.push_back(t.relu(t.scale(t.sub(hi, lo), 0.5)));
    r.mask[j] = (a.mask[j] && b.mask[j] && t.value(hi) >= t.value(lo)) ? 1 : 0;
  }
  return r;
}

void require_inhabited_filler(const TapedBox& filler, const char* op) {
  if (filler.universal)
    throw BoxOperationError(std::string(op) + ": the filler must be bounded");
  for (std::uint8_t m : filler.mask)
    if (!m) throw BottomFillerError(std::string(op) + ": the filler box is uninhabited");
}

TapedBox taped_exists(Tape& t, const TapedBox& role, const TapedBox& filler, bool all_variant) {
  require_inhabited_filler(filler, all_variant ? "exists_all_box" : "exists_box");
  std::size_t n = role.center.size();
  TapedBox r;
  r.mask.assign(n, 1);
  for (std::size_t j = 0; j < n; ++j) {
    r.center.push_back(t.add(role.center[j], filler.center[j]));
    if (all_variant)
      r.offset.push_back(t.relu(t.sub(role.offset[j], filler.offset[j])));
    else
      r.offset.push_back(t.add(role.offset[j], filler.offset[j]));
  }
  return r;
}

TapedBox taped_concept(Tape& t, const ConceptExpr& c, const EmbeddingModel& m,
                       const ParamBases& pb) {
  switch (c.kind) {
    case ConceptExpr::Kind::Top: {
      TapedBox b;
      Tape::Idx zero = t.constant(0.0);
      b.center.assign(m.dim, zero);
      b.offset.assign(m.dim, zero);
      b.mask.assign(m.dim, 1);
      b.universal = true;
      return b;
    }
    case ConceptExpr::Kind::Bottom: {
      TapedBox b;
      Tape::Idx zero = t.constant(0.0);
      b.center.assign(m.dim, zero);
      b.offset.assign(m.dim, zero);
      b.mask.assign(m.dim, 0);
      return b;
    }
    case ConceptExpr::Kind::Atomic: {
      std::size_t idx = lookup(m.concept_index, c.name, "concept");
      return taped_entity_box(t, m, idx, m.concept_center, m.concept_raw_offset,
                              pb.concept_center, pb.concept_offset);
    }
    case ConceptExpr::Kind::Nominal:
      return taped_point_box(t, m, pb, c.name);
    case ConceptExpr::Kind::Conjunction: {
      TapedBox acc = taped_concept(t, c.children[0], m, pb);
      for (std::size_t i = 1; i < c.children.size(); ++i)
        acc = taped_intersect(t, acc, taped_concept(t, c.children[i], m, pb));
      return acc;
    }
    case ConceptExpr::Kind::Exists:
    case ConceptExpr::Kind::ExistsAll: {
      TapedBox role = taped_role_box(t, m, pb, c.name);
      TapedBox filler = taped_concept(t, c.children[0], m, pb);
      return taped_exists(t, role, filler, c.kind == ConceptExpr::Kind::ExistsAll);
    }
  }
  throw BoxOperationError("taped_concept: unreachable expression kind");
}

// Norm of a list of nonnegative tape values (offsets, relu outputs): L1 is a
// plain sum, L2 sums squares under a guarded sqrt.
Tape::Idx taped_norm_nonneg(Tape& t, const std::vector<Tape::Idx>& terms, Norm norm) {
  if (terms.empty()) return t.constant(0.0);
  if (norm == Norm::L1) {
    Tape::Idx acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc = t.add(acc, terms[i]);
    return acc;
  }
  Tape::Idx acc = t.square(terms[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) acc = t.add(acc, t.square(terms[i]));
  return t.sqrt_or_zero(acc);
}

// Same for signed values: L1 takes absolute values first.
Tape::Idx taped_norm_signed(Tape& t, const std::vector<Tape::Idx>& terms, Norm norm) {
  if (norm == Norm::L1) {
    std::vector<Tape::Idx> abs_terms;
    abs_terms.reserve(terms.size());
    for (Tape::Idx i : terms) abs_terms.push_back(t.abs_val(i));
    return taped_norm_nonneg(t, abs_terms, Norm::L1);
  }
  return taped_norm_nonneg(t, terms, Norm::L2);
}

Tape::Idx taped_inclusion(Tape& t, const TapedBox& a, const TapedBox& b, double gamma,
                          Norm norm) {
  if (b.universal) return t.constant(0.0);
  if (a.universal) return t.constant(kInf);
  std::vector<Tape::Idx> masked_terms;  // o(a)_j where a is present but b empty
  std::vector<Tape::Idx> shared_terms;  // margin violations on shared coordinates
  for (std::size_t j = 0; j < a.center.size(); ++j) {
    if (!a.mask[j]) continue;
    if (!b.mask[j]) {
      masked_terms.push_back(a.offset[j]);
      continue;
    }
    Tape::Idx d = t.sub(t.abs_val(t.sub(a.center[j], b.center[j])),
                        t.add(a.offset[j], b.offset[j]));
    Tape::Idx violation = t.shift(t.add(d, t.scale(a.offset[j], 2.0)), -gamma);
    shared_terms.push_back(t.relu(violation));
  }
  return t.add(taped_norm_nonneg(t, masked_terms, norm),
               taped_norm_nonneg(t, shared_terms, norm));
}

Tape::Idx taped_non_inclusion(Tape& t, const TapedBox& a, const TapedBox& b, double gamma,
                              Norm norm, bool per_coordinate) {
  if (a.universal || b.universal)
    throw BoxOperationError("non_inclusion_loss: operands must be bounded");
  for (std::size_t j = 0; j < a.mask.size(); ++j)
    if (!a.mask[j] || !b.mask[j])
      throw BoxOperationError("non_inclusion_loss: operands must be plain boxes");
  std::vector<Tape::Idx> clips;
  for (std::size_t j = 0; j < a.center.size(); ++j) {
    Tape::Idx d = t.sub(t.abs_val(t.sub(a.center[j], b.center[j])),
                        t.add(a.offset[j], b.offset[j]));
    clips.push_back(t.relu(t.shift(t.neg(d), -gamma)));
  }
  Tape::Idx one = t.constant(1.0);
  if (!per_coordinate) {
    Tape::Idx s = taped_norm_nonneg(t, clips, norm);
    return t.square(t.sub(one, s));
  }
  Tape::Idx acc = t.square(t.sub(one, clips[0]));
  for (std::size_t j = 1; j < clips.size(); ++j)
    acc = t.add(acc, t.square(t.sub(one, clips[j])));
  return t.scale(acc, 1.0 / static_cast<double>(clips.size()));
}

void collect_atomic_names(const ConceptExpr& c, std::vector<std::string>& out) {
  if (c.kind == ConceptExpr::Kind::Atomic) {
    out.push_back(c.name);
    return;
  }
  for (const ConceptExpr& child : c.children) collect_atomic_names(child, out);
}

// Atomic concept occurrences of an axiom, in tree order. Regularization and
// the optional minimum-offset penalty run over this list.
std::vector<std::string> atomic_occurrences(const Axiom& ax) {
  std::vector<std::string> names;
  switch (ax.kind) {
    case Axiom::Kind::GCI:
      collect_atomic_names(ax.lhs, names);
      collect_atomic_names(ax.rhs, names);
      break;
    case Axiom::Kind::ConceptAssertion:
      names.push_back(ax.concept_name);
      break;
    default:
      break;
  }
  return names;
}

Tape::Idx taped_regularization(Tape& t, const Axiom& ax, const EmbeddingModel& m,
                               const ParamBases& pb, Norm norm) {
  Tape::Idx acc = t.constant(0.0);
  for (const std::string& name : atomic_occurrences(ax)) {
    std::size_t idx = lookup(m.concept_index, name, "concept");
    std::vector<Tape::Idx> diffs;
    for (std::size_t j = 0; j < m.dim; ++j) {
      std::int64_t slot = static_cast<std::int64_t>(idx * m.dim + j);
      Tape::Idx c = t.input(m.concept_center[idx * m.dim + j], pb.concept_center + slot);
      diffs.push_back(t.shift(c, -1.0));
    }
    acc = t.add(acc, taped_norm_signed(t, diffs, norm));
  }
  return acc;
}

Tape::Idx taped_min_offset_penalty(Tape& t, const Axiom& ax, const EmbeddingModel& m,
                                   const ParamBases& pb, const LossOptions& opts) {
  Tape::Idx acc = t.constant(0.0);
  for (const std::string& name : atomic_occurrences(ax)) {
    std::size_t idx = lookup(m.concept_index, name, "concept");
    std::vector<Tape::Idx> shortfalls;
    for (std::size_t j = 0; j < m.dim; ++j) {
      std::int64_t slot = static_cast<std::int64_t>(idx * m.dim + j);
      Tape::Idx o = t.abs_val(
          t.input(m.concept_raw_offset[idx * m.dim + j], pb.concept_offset + slot));
      shortfalls.push_back(t.relu(t.shift(t.neg(o), opts.min_offset)));
    }
    acc = t.add(acc, taped_norm_nonneg(t, shortfalls, opts.norm));
  }
  return acc;
}

// Inclusion loss of one axiom on a fresh tape. Throws BottomFillerError when
// an existential filler is uninhabited under the current model.
Tape::Idx taped_axiom_inclusion(Tape& t, const Axiom& ax, const EmbeddingModel& m,
                                const ParamBases& pb, double gamma, Norm norm) {
  switch (ax.kind) {
    case Axiom::Kind::GCI: {
      TapedBox lhs = taped_concept(t, ax.lhs, m, pb);
      TapedBox rhs = taped_concept(t, ax.rhs, m, pb);
      return taped_inclusion(t, lhs, rhs, gamma, norm);
    }
    case Axiom::Kind::RoleInclusion: {
      TapedBox sub = taped_role_box(t, m, pb, ax.sub_role);
      TapedBox sup = taped_role_box(t, m, pb, ax.sup_role);
      return taped_inclusion(t, sub, sup, gamma, norm);
    }
    case Axiom::Kind::RoleChain: {
      TapedBox acc = taped_role_box(t, m, pb, ax.chain[0]);
      for (std::size_t i = 1; i < ax.chain.size(); ++i) {
        TapedBox next = taped_role_box(t, m, pb, ax.chain[i]);
        TapedBox composed;
        composed.mask.assign(m.dim, 1);
        for (std::size_t j = 0; j < m.dim; ++j) {
          composed.center.push_back(t.add(acc.center[j], next.center[j]));
          composed.offset.push_back(t.add(acc.offset[j], next.offset[j]));
        }
        acc = composed;
      }
      TapedBox sup = taped_role_box(t, m, pb, ax.sup_role);
      return taped_inclusion(t, acc, sup, gamma, norm);
    }
    case Axiom::Kind::ConceptAssertion: {
      TapedBox point = taped_point_box(t, m, pb, ax.subject);
      TapedBox box = taped_concept(t, atomic(ax.concept_name), m, pb);
      return taped_inclusion(t, point, box, gamma, norm);
    }
    case Axiom::Kind::RoleAssertion: {
      TapedBox subj = taped_point_box(t, m, pb, ax.subject);
      TapedBox obj = taped_point_box(t, m, pb, ax.object);
      TapedBox diff;
      diff.mask.assign(m.dim, 1);
      Tape::Idx zero = t.constant(0.0);
      for (std::size_t j = 0; j < m.dim; ++j) {
        diff.center.push_back(t.sub(subj.center[j], obj.center[j]));
        diff.offset.push_back(zero);
      }
      TapedBox role = taped_role_box(t, m, pb, ax.role_name);
      return taped_inclusion(t, diff, role, gamma, norm);
    }
  }
  throw BoxOperationError("taped_axiom_inclusion: unreachable axiom kind");
}

// One work item of a batch: the positive objective (L + lambda*R)^2 or a
// negative-sample loss, each on its own tape.
struct ItemResult {
  std::vector<std::pair<std::int64_t, double>> grads;
  double root = 0.0;       // contribution to the batch objective numerator
  double inclusion = 0.0;  // positive items: L value
  double regularization = 0.0;
  bool skipped = false;
};

ItemResult run_positive_item(const Axiom& ax, const EmbeddingModel& m, const ParamBases& pb,
                             double gamma, double lambda, const LossOptions& opts) {
  ItemResult r;
  Tape t;
  Tape::Idx loss;
  try {
    loss = taped_axiom_inclusion(t, ax, m, pb, gamma, opts.norm);
  } catch (const BottomFillerError&) {
    r.skipped = true;
    return r;
  }
  if (opts.min_offset > 0.0)
    loss = t.add(loss, taped_min_offset_penalty(t, ax, m, pb, opts));
  Tape::Idx reg = taped_regularization(t, ax, m, pb, opts.norm);
  Tape::Idx term = t.add(loss, t.scale(reg, lambda));
  Tape::Idx root = opts.square_positive_term ? t.square(term) : term;
  t.backward(root);
  r.root = t.value(root);
  r.inclusion = t.value(loss);
  r.regularization = t.value(reg);
  t.for_each_input([&](std::int64_t pid, double g) { r.grads.emplace_back(pid, g); });
  return r;
}

ItemResult run_negative_item(const Axiom& ax, const EmbeddingModel& m, const ParamBases& pb,
                             double gamma, const LossOptions& opts) {
  ItemResult r;
  Tape t;
  TapedBox lhs = taped_concept(t, ax.lhs, m, pb);
  TapedBox rhs = taped_concept(t, ax.rhs, m, pb);
  Tape::Idx root =
      taped_non_inclusion(t, lhs, rhs, gamma, opts.norm, opts.negative_loss_per_coordinate);
  t.backward(root);
  r.root = t.value(root);
  t.for_each_input([&](std::int64_t pid, double g) { r.grads.emplace_back(pid, g); });
  return r;
}

BatchStats fold_items(const std::vector<ItemResult>& items, std::size_t positives,
                      double inv_batch, std::vector<double>& grad) {
  BatchStats stats;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const ItemResult& item = items[i];
    if (item.skipped) {
      ++stats.skipped;
      continue;
    }
    if (i < positives) {
      stats.positive_sum += item.root;
      stats.inclusion_sum += item.inclusion;
      stats.regularization_sum += item.regularization;
    } else {
      stats.negative_sum += item.root;
    }
    for (const auto& [pid, g] : item.grads)
      grad[static_cast<std::size_t>(pid)] += inv_batch * g;
  }
  stats.total = (stats.positive_sum + stats.negative_sum) * inv_batch;
  return stats;
}

BatchStats batch_gradient_impl(const EmbeddingModel& model, const std::vector<Axiom>& batch,
                               const std::vector<Axiom>& negatives, double gamma,
                               double lambda, const LossOptions& opts, int threads,
                               std::vector<double>& grad) {
  grad.assign(model.parameter_count(), 0.0);
  if (batch.empty()) return BatchStats{};
  ParamBases pb = param_bases(model);
  double inv_batch = 1.0 / static_cast<double>(batch.size());
  std::size_t total_items = batch.size() + negatives.size();
  std::vector<ItemResult> items(total_items);

  auto run_item = [&](std::size_t i) {
    if (i < batch.size())
      items[i] = run_positive_item(batch[i], model, pb, gamma, lambda, opts);
    else
      items[i] = run_negative_item(negatives[i - batch.size()], model, pb, gamma, opts);
  };

#ifdef BOXEL_HAVE_OPENMP
  if (threads != 1) {
    int want = threads > 0 ? threads : omp_get_max_threads();
    // Exceptions may not cross the parallel region; stash the first one.
    std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(dynamic, 4) num_threads(want)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total_items); ++i) {
      try {
        run_item(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(boxel_batch_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::size_t i = 0; i < total_items; ++i) run_item(i);
  }
#else
  (void)threads;
  for (std::size_t i = 0; i < total_items; ++i) run_item(i);
#endif

  // Serial fold in item order: the accumulation order, and therefore the
  // result, is independent of how the items above were scheduled.
  return fold_items(items, batch.size(), inv_batch, grad);
}

// Value-level negative loss via the geometry layer.
double negative_loss_value(const Axiom& ax, const EmbeddingModel& m, double gamma,
                           const LossOptions& opts) {
  ExtendedBox lhs = eval_concept_box(ax.lhs, m);
  ExtendedBox rhs = eval_concept_box(ax.rhs, m);
  return non_inclusion_loss(lhs, rhs, gamma, opts.norm, opts.negative_loss_per_coordinate);
}

double min_offset_penalty_value(const Axiom& ax, const EmbeddingModel& m,
                                const LossOptions& opts) {
  double acc = 0.0;
  for (const std::string& name : atomic_occurrences(ax)) {
    std::size_t idx = lookup(m.concept_index, name, "concept");
    std::vector<double> shortfalls(m.dim);
    for (std::size_t j = 0; j < m.dim; ++j) {
      double o = std::abs(m.concept_raw_offset[idx * m.dim + j]);
      shortfalls[j] = std::max(0.0, opts.min_offset - o);
    }
    acc += norm_value(shortfalls, opts.norm);
  }
  return acc;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  return sample_stream(seed, index).next_u64();
}

std::vector<std::pair<std::size_t, Axiom>> sample_negatives_indexed(
    const Ontology& ontology, std::size_t per_axiom, std::uint64_t seed) {
  std::vector<std::pair<std::size_t, Axiom>> out;
  if (per_axiom == 0 || ontology.concepts.empty()) return out;
  std::vector<std::string> pool(ontology.concepts.begin(), ontology.concepts.end());
  std::unordered_set<std::string> existing;
  for (const Axiom& ax : ontology.axioms) existing.insert(serialize(ax));

  for (std::size_t i = 0; i < ontology.axioms.size(); ++i) {
    const Axiom& ax = ontology.axioms[i];
    bool eligible = ax.kind == Axiom::Kind::GCI &&
                    ax.lhs.kind == ConceptExpr::Kind::Atomic &&
                    ax.rhs.kind == ConceptExpr::Kind::Exists &&
                    ax.rhs.children[0].kind == ConceptExpr::Kind::Atomic;
    if (!eligible) continue;
    SplitMix64 rng = sample_stream(seed, i);
    for (std::size_t k = 0; k < per_axiom; ++k) {
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const std::string& sub = pool[rng.below(pool.size())];
        const std::string& filler = pool[rng.below(pool.size())];
        Axiom candidate = gci(atomic(sub), exists(ax.rhs.name, atomic(filler)));
        if (existing.count(serialize(candidate))) continue;
        out.emplace_back(i, std::move(candidate));
        break;
      }
    }
  }
  return out;
}

}  // namespace

double axiom_loss(const Axiom& axiom, const EmbeddingModel& model, double gamma, Norm norm) {
  try {
    switch (axiom.kind) {
      case Axiom::Kind::GCI:
        return inclusion_loss(eval_concept_box(axiom.lhs, model),
                              eval_concept_box(axiom.rhs, model), gamma, norm);
      case Axiom::Kind::RoleInclusion: {
        std::size_t sub = lookup(model.role_index, axiom.sub_role, "role");
        std::size_t sup = lookup(model.role_index, axiom.sup_role, "role");
        return inclusion_loss(role_box(model, sub), role_box(model, sup), gamma, norm);
      }
      case Axiom::Kind::RoleChain: {
        ExtendedBox acc = role_box(model, lookup(model.role_index, axiom.chain[0], "role"));
        for (std::size_t i = 1; i < axiom.chain.size(); ++i)
          acc = compose_roles(acc,
                              role_box(model, lookup(model.role_index, axiom.chain[i], "role")));
        std::size_t sup = lookup(model.role_index, axiom.sup_role, "role");
        return inclusion_loss(acc, role_box(model, sup), gamma, norm);
      }
      case Axiom::Kind::ConceptAssertion: {
        std::size_t ind = lookup(model.individual_index, axiom.subject, "individual");
        std::vector<double> point(model.individual_point.begin() + ind * model.dim,
                                  model.individual_point.begin() + (ind + 1) * model.dim);
        return inclusion_loss(point_box(point),
                              eval_concept_box(atomic(axiom.concept_name), model), gamma,
                              norm);
      }
      case Axiom::Kind::RoleAssertion: {
        std::size_t subj = lookup(model.individual_index, axiom.subject, "individual");
        std::size_t obj = lookup(model.individual_index, axiom.object, "individual");
        std::vector<double> diff(model.dim);
        for (std::size_t j = 0; j < model.dim; ++j)
          diff[j] = model.individual_point[subj * model.dim + j] -
                    model.individual_point[obj * model.dim + j];
        std::size_t role = lookup(model.role_index, axiom.role_name, "role");
        return inclusion_loss(point_box(diff), role_box(model, role), gamma, norm);
      }
    }
  } catch (const BottomFillerError&) {
    return kNaN;
  }
  throw BoxOperationError("axiom_loss: unreachable axiom kind");
}

double regularization_loss(const Axiom& axiom, const EmbeddingModel& model, Norm norm) {
  double acc = 0.0;
  std::vector<double> diff(model.dim);
  for (const std::string& name : atomic_occurrences(axiom)) {
    std::size_t idx = lookup(model.concept_index, name, "concept");
    for (std::size_t j = 0; j < model.dim; ++j)
      diff[j] = model.concept_center[idx * model.dim + j] - 1.0;
    acc += norm_value(diff, norm);
  }
  return acc;
}

std::vector<Axiom> sample_negatives(const Ontology& ontology, std::size_t per_axiom,
                                    std::uint64_t seed) {
  std::vector<Axiom> out;
  for (auto& [idx, ax] : sample_negatives_indexed(ontology, per_axiom, seed))
    out.push_back(std::move(ax));
  return out;
}

double total_loss(const std::vector<Axiom>& batch, const std::vector<Axiom>& negatives,
                  const EmbeddingModel& model, double gamma, double lambda,
                  const LossOptions& opts) {
  if (batch.empty()) return 0.0;
  double positive = 0.0;
  for (const Axiom& ax : batch) {
    double loss = axiom_loss(ax, model, gamma, opts.norm);
    if (std::isnan(loss)) continue;
    if (opts.min_offset > 0.0) loss += min_offset_penalty_value(ax, model, opts);
    double term = loss + lambda * regularization_loss(ax, model, opts.norm);
    positive += opts.square_positive_term ? term * term : term;
  }
  double negative = 0.0;
  for (const Axiom& ax : negatives) negative += negative_loss_value(ax, model, gamma, opts);
  return (positive + negative) / static_cast<double>(batch.size());
}

BatchStats accumulate_batch_gradient(const EmbeddingModel& model,
                                     const std::vector<Axiom>& batch,
                                     const std::vector<Axiom>& negatives, double gamma,
                                     double lambda, const LossOptions& opts, int threads,
                                     std::vector<double>& grad) {
  return batch_gradient_impl(model, batch, negatives, gamma, lambda, opts, threads, grad);
}

BatchStats accumulate_batch_gradient_serial(const EmbeddingModel& model,
                                            const std::vector<Axiom>& batch,
                                            const std::vector<Axiom>& negatives,
                                            double gamma, double lambda,
                                            const LossOptions& opts,
                                            std::vector<double>& grad) {
  return batch_gradient_impl(model, batch, negatives, gamma, lambda, opts, 1, grad);
}

TrainResult train(const Ontology& ontology, const TrainConfig& cfg,
                  const std::function<void(std::size_t, const EmbeddingModel&)>& on_checkpoint) {
  Ontology prepared = desugar_abox(semantic_enhance(ontology));
  // Negative eligibility is judged on the un-enhanced axioms, where right-hand
  // existentials are still plain.
  Ontology negative_source = desugar_abox(ontology);

  TrainResult result;
  result.model = init_model(ontology, cfg.dim, cfg.seed);
  EmbeddingModel& model = result.model;
  std::size_t P = model.parameter_count();

  std::vector<double> adam_m(P, 0.0), adam_v(P, 0.0), grad;
  std::uint64_t step = 0;

  std::size_t n_axioms = prepared.axioms.size();
  std::vector<std::size_t> order(n_axioms);
  std::vector<std::vector<Axiom>> negatives_for(n_axioms);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    SplitMix64 shuffle_rng = sample_stream(cfg.seed, 2 * epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    deterministic_shuffle(order, shuffle_rng);

    if (cfg.negatives_per_positive > 0) {
      for (auto& v : negatives_for) v.clear();
      for (auto& [idx, ax] : sample_negatives_indexed(
               negative_source, cfg.negatives_per_positive, mix_seed(cfg.seed, 2 * epoch + 1)))
        negatives_for[idx].push_back(std::move(ax));
    }

    EpochStats stats;
    stats.epoch = epoch;
    std::size_t scored = 0, negative_count = 0, batches = 0;
    std::size_t batch_size = cfg.batch_size > 0 ? cfg.batch_size : n_axioms;

    for (std::size_t start = 0; start < n_axioms; start += batch_size) {
      std::size_t stop = std::min(n_axioms, start + batch_size);
      std::vector<Axiom> batch, negatives;
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(prepared.axioms[order[i]]);
        for (const Axiom& neg : negatives_for[order[i]]) negatives.push_back(neg);
      }

      BatchStats bs = batch_gradient_impl(model, batch, negatives, cfg.gamma, cfg.lambda,
                                          cfg.loss, cfg.threads, grad);
      if (!std::isfinite(bs.total))
        throw TrainingDivergedError("objective is no longer finite at epoch " +
                                    std::to_string(epoch));

      ++step;
      double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < P; ++i) {
        double g = grad[i];
        adam_m[i] = cfg.adam_beta1 * adam_m[i] + (1.0 - cfg.adam_beta1) * g;
        adam_v[i] = cfg.adam_beta2 * adam_v[i] + (1.0 - cfg.adam_beta2) * g * g;
        double mhat = adam_m[i] / bc1;
        double vhat = adam_v[i] / bc2;
        model.param(i) -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
      }

      stats.mean_positive += bs.inclusion_sum;
      stats.mean_negative += bs.negative_sum;
      stats.mean_regularization += bs.regularization_sum;
      stats.total += bs.total;
      stats.skipped += bs.skipped;
      scored += batch.size() - bs.skipped;
      negative_count += negatives.size();
      ++batches;
    }

    if (scored > 0) {
      stats.mean_positive /= static_cast<double>(scored);
      stats.mean_regularization /= static_cast<double>(scored);
    }
    if (negative_count > 0) stats.mean_negative /= static_cast<double>(negative_count);
    if (batches > 0) stats.total /= static_cast<double>(batches);
    result.trace.push_back(stats);

    if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
      on_checkpoint(epoch, model);
  }

  bool already_fired = cfg.checkpoint_every > 0 && cfg.epochs > 0 &&
                       cfg.epochs % cfg.checkpoint_every == 0;
  if (on_checkpoint && cfg.epochs > 0 && !already_fired) on_checkpoint(cfg.epochs, model);
  return result;
}

namespace {

struct ForwardProbe {
  double value = 0.0;
  std::uint64_t signature = 0xcbf29ce484222325ULL;
  double min_margin = std::numeric_limits<double>::infinity();
};

// Forward-only objective evaluation through the tape, capturing the branch
// signature and the distance to the nearest kink so finite-difference probes
// can recognize non-smooth neighborhoods.
ForwardProbe forward_objective(const EmbeddingModel& model, const std::vector<Axiom>& batch,
                               const std::vector<Axiom>& negatives, double gamma,
                               double lambda, const LossOptions& opts) {
  ForwardProbe probe;
  if (batch.empty()) return probe;
  ParamBases pb = param_bases(model);
  double numerator = 0.0;
  auto fold_tape = [&](const Tape& t, bool skipped) {
    probe.signature = (probe.signature ^ t.branch_signature()) * 0x100000001b3ULL;
    probe.signature ^= skipped ? 0x9e3779b97f4a7c15ULL : 0x2545f4914f6cdd1dULL;
    probe.min_margin = std::min(probe.min_margin, t.min_kink_margin());
  };
  for (const Axiom& ax : batch) {
    Tape t;
    try {
      Tape::Idx loss = taped_axiom_inclusion(t, ax, model, pb, gamma, opts.norm);
      if (opts.min_offset > 0.0)
        loss = t.add(loss, taped_min_offset_penalty(t, ax, model, pb, opts));
      Tape::Idx term = t.add(loss, t.scale(taped_regularization(t, ax, model, pb, opts.norm),
                                           lambda));
      Tape::Idx root = opts.square_positive_term ? t.square(term) : term;
      numerator += t.value(root);
      fold_tape(t, false);
    } catch (const BottomFillerError&) {
      fold_tape(t, true);
    }
  }
  for (const Axiom& ax : negatives) {
    Tape t;
    TapedBox lhs = taped_concept(t, ax.lhs, model, pb);
    TapedBox rhs = taped_concept(t, ax.rhs, model, pb);
    Tape::Idx root =
        taped_non_inclusion(t, lhs, rhs, gamma, opts.norm, opts.negative_loss_per_coordinate);
    numerator += t.value(root);
    fold_tape(t, false);
  }
  probe.value = numerator / static_cast<double>(batch.size());
  return probe;
}

}  // namespace

GradientCheckResult gradient_check(const EmbeddingModel& model,
                                   const std::vector<Axiom>& batch,
                                   const std::vector<Axiom>& negatives,
                                   const TrainConfig& cfg, std::size_t probes,
                                   std::uint64_t seed) {
  const double h = 1e-5;
  const double kink_tolerance = 1e-4;
  GradientCheckResult result;
  std::vector<double> grad;
  batch_gradient_impl(model, batch, negatives, cfg.gamma, cfg.lambda, cfg.loss, 1, grad);
  ForwardProbe base = forward_objective(model, batch, negatives, cfg.gamma, cfg.lambda,
                                        cfg.loss);

  SplitMix64 rng(seed);
  EmbeddingModel perturbed = model;
  for (std::size_t p = 0; p < probes; ++p) {
    std::size_t idx = static_cast<std::size_t>(rng.below(model.parameter_count()));
    double original = model.param(idx);

    perturbed.param(idx) = original + h;
    ForwardProbe plus = forward_objective(perturbed, batch, negatives, cfg.gamma, cfg.lambda,
                                          cfg.loss);
    perturbed.param(idx) = original - h;
    ForwardProbe minus = forward_objective(perturbed, batch, negatives, cfg.gamma,
                                           cfg.lambda, cfg.loss);
    perturbed.param(idx) = original;

    bool same_branch = plus.signature == base.signature && minus.signature == base.signature;
    double margin = std::min({base.min_margin, plus.min_margin, minus.min_margin});
    if (!same_branch || margin < kink_tolerance) {
      ++result.skipped;
      continue;
    }
    double fd = (plus.value - minus.value) / (2.0 * h);
    double analytic = grad[idx];
    double rel = std::abs(analytic - fd) /
                 std::max({std::abs(analytic), std::abs(fd), 1e-4});
    result.max_rel_error = std::max(result.max_rel_error, rel);
    ++result.accepted;
  }
  return result;
}

}  // namespace boxel
