#include "boxel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>
#include <stdexcept>

#ifdef BOXEL_HAVE_OPENMP
#include <omp.h>
#endif

namespace boxel {

namespace {

bool is_complex(const ConceptExpr& c) { return c.kind != ConceptExpr::Kind::Atomic; }

bool all_atomic(const std::vector<ConceptExpr>& members) {
  for (const ConceptExpr& m : members)
    if (m.kind != ConceptExpr::Kind::Atomic) return false;
  return true;
}

bool is_exists_atomic(const ConceptExpr& c) {
  return c.kind == ConceptExpr::Kind::Exists &&
         c.children[0].kind == ConceptExpr::Kind::Atomic;
}

void collect_names(const ConceptExpr& c, std::set<std::string>& concepts,
                   std::set<std::string>& roles, std::set<std::string>& individuals) {
  switch (c.kind) {
    case ConceptExpr::Kind::Atomic:
      concepts.insert(c.name);
      break;
    case ConceptExpr::Kind::Nominal:
      individuals.insert(c.name);
      break;
    case ConceptExpr::Kind::Exists:
    case ConceptExpr::Kind::ExistsAll:
      roles.insert(c.name);
      break;
    default:
      break;
  }
  for (const ConceptExpr& child : c.children)
    collect_names(child, concepts, roles, individuals);
}

}  // namespace

double score(const ConceptExpr& lhs, const ConceptExpr& rhs, const EmbeddingModel& model,
             const ScoreOptions& opts) {
  ExtendedBox left, right;
  bool lhs_empty = false, rhs_empty = false;
  try {
    left = eval_concept_box(lhs, model);
  } catch (const BottomFillerError&) {
    lhs_empty = true;
  }
  try {
    right = eval_concept_box(rhs, model);
  } catch (const BottomFillerError&) {
    rhs_empty = true;
  }

  if (lhs_empty) return 0.0;
  if (opts.empty_lhs == EmptyLhsRule::AllMasked ? fully_masked(left) : any_masked(left))
    return 0.0;
  if (!rhs_empty && right.universal) return 0.0;

  std::size_t n = model.dim;
  std::vector<double> shared(n, 0.0), missing(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    bool mc = left.mask[j] != 0;
    bool md = !rhs_empty && right.mask[j] != 0;
    if (mc && md) shared[j] = left.center[j] - right.center[j];
    if (mc && !md) missing[j] = 1.0;
  }
  return -norm_value(shared, Norm::L2) -
         opts.big_constant * norm_value(missing, Norm::L2);
}

const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::RhsAtomic: return "rhs-atomic";
    case TaskKind::LhsAtomic: return "lhs-atomic";
    case TaskKind::RhsComplex: return "rhs-complex";
    case TaskKind::LhsComplex: return "lhs-complex";
    case TaskKind::Nf1: return "nf1";
    case TaskKind::Nf2: return "nf2";
    case TaskKind::Nf3: return "nf3";
    case TaskKind::Nf4: return "nf4";
  }
  return "unknown";
}

std::optional<TaskKind> parse_task_kind(std::string_view name) {
  for (TaskKind k : {TaskKind::RhsAtomic, TaskKind::LhsAtomic, TaskKind::RhsComplex,
                     TaskKind::LhsComplex, TaskKind::Nf1, TaskKind::Nf2, TaskKind::Nf3,
                     TaskKind::Nf4})
    if (name == task_kind_name(k)) return k;
  return std::nullopt;
}

bool task_slot_is_lhs(TaskKind kind) {
  return kind == TaskKind::LhsAtomic || kind == TaskKind::LhsComplex || kind == TaskKind::Nf3;
}

RankingTask build_ranking_task(TaskKind kind, const std::vector<Axiom>& test_axioms,
                               const std::vector<std::string>& atomic_pool) {
  RankingTask task;
  task.kind = kind;

  auto matches = [kind](const Axiom& ax) {
    if (ax.kind != Axiom::Kind::GCI) return false;
    switch (kind) {
      case TaskKind::RhsAtomic: return !is_complex(ax.rhs);
      case TaskKind::LhsAtomic: return !is_complex(ax.lhs);
      case TaskKind::RhsComplex: return is_complex(ax.rhs);
      case TaskKind::LhsComplex: return is_complex(ax.lhs);
      case TaskKind::Nf1: return !is_complex(ax.lhs) && !is_complex(ax.rhs);
      case TaskKind::Nf2:
        return ax.lhs.kind == ConceptExpr::Kind::Conjunction && all_atomic(ax.lhs.children) &&
               !is_complex(ax.rhs);
      case TaskKind::Nf3: return !is_complex(ax.lhs) && is_exists_atomic(ax.rhs);
      case TaskKind::Nf4: return is_exists_atomic(ax.lhs) && !is_complex(ax.rhs);
    }
    return false;
  };
  for (const Axiom& ax : test_axioms)
    if (matches(ax)) task.queries.push_back(ax);

  bool complex_pool = kind == TaskKind::RhsComplex || kind == TaskKind::LhsComplex;
  if (complex_pool) {
    // Every distinct non-atomic side of the test set, in first-appearance order.
    for (const Axiom& ax : test_axioms) {
      if (ax.kind != Axiom::Kind::GCI) continue;
      for (const ConceptExpr* side : {&ax.lhs, &ax.rhs}) {
        if (!is_complex(*side)) continue;
        if (std::find(task.candidates.begin(), task.candidates.end(), *side) ==
            task.candidates.end())
          task.candidates.push_back(*side);
      }
    }
  } else {
    for (const std::string& name : atomic_pool) task.candidates.push_back(atomic(name));
  }
  return task;
}

namespace {

double rank_one_query(const RankingTask& task, const EmbeddingModel& model,
                      const ScoreOptions& opts, const Axiom& query) {
  bool slot_lhs = task_slot_is_lhs(task.kind);
  const ConceptExpr& truth = slot_lhs ? query.lhs : query.rhs;
  const ConceptExpr& fixed = slot_lhs ? query.rhs : query.lhs;
  if (std::find(task.candidates.begin(), task.candidates.end(), truth) ==
      task.candidates.end())
    throw std::invalid_argument(
        "rank_queries: the query's true answer is not in the candidate pool");

  double truth_score = slot_lhs ? score(truth, fixed, model, opts)
                                : score(fixed, truth, model, opts);
  std::size_t better = 0, tied = 0;
  for (const ConceptExpr& candidate : task.candidates) {
    double s = slot_lhs ? score(candidate, fixed, model, opts)
                        : score(fixed, candidate, model, opts);
    if (s > truth_score)
      ++better;
    else if (s == truth_score)
      ++tied;
  }
  // Mean rank of the tie group: positions better+1 .. better+tied.
  return static_cast<double>(better) + 0.5 * static_cast<double>(tied + 1);
}

}  // namespace

std::vector<double> rank_queries_serial(const RankingTask& task, const EmbeddingModel& model,
                                        const ScoreOptions& opts) {
  std::vector<double> ranks(task.queries.size(), 0.0);
  for (std::size_t i = 0; i < task.queries.size(); ++i)
    ranks[i] = rank_one_query(task, model, opts, task.queries[i]);
  return ranks;
}

std::vector<double> rank_queries(const RankingTask& task, const EmbeddingModel& model,
                                 const ScoreOptions& opts, int threads) {
#ifdef BOXEL_HAVE_OPENMP
  if (threads != 1) {
    std::vector<double> ranks(task.queries.size(), 0.0);
    int want = threads > 0 ? threads : omp_get_max_threads();
    std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(dynamic, 8) num_threads(want)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(task.queries.size()); ++i) {
      try {
        ranks[static_cast<std::size_t>(i)] =
            rank_one_query(task, model, opts, task.queries[static_cast<std::size_t>(i)]);
      } catch (...) {
#pragma omp critical(boxel_rank_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return ranks;
  }
#else
  (void)threads;
#endif
  return rank_queries_serial(task, model, opts);
}

RankingReport aggregate_metrics(const std::vector<double>& ranks, std::size_t pool_size) {
  if (ranks.empty()) throw std::invalid_argument("aggregate_metrics: no ranks");
  if (pool_size < 2)
    throw std::invalid_argument("aggregate_metrics: pool must hold at least 2 candidates");
  for (double r : ranks)
    if (!(r >= 1.0) || r > static_cast<double>(pool_size))
      throw std::invalid_argument("aggregate_metrics: rank outside [1, pool]");

  RankingReport report;
  report.ranks = ranks;
  report.pool_size = pool_size;
  double n = static_cast<double>(ranks.size());
  double pool = static_cast<double>(pool_size);
  std::size_t le1 = 0, le10 = 0, le100 = 0;
  double sum = 0.0, inv = 0.0, auc = 0.0;
  for (double r : ranks) {
    if (r <= 1.0) ++le1;
    if (r <= 10.0) ++le10;
    if (r <= 100.0) ++le100;
    sum += r;
    inv += 1.0 / r;
    auc += (pool - r) / (pool - 1.0);
  }
  report.hits1 = static_cast<double>(le1) / n;
  report.hits10 = static_cast<double>(le10) / n;
  report.hits100 = static_cast<double>(le100) / n;
  report.mean_rank = sum / n;
  report.mrr = inv / n;
  report.auc = auc / n;

  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  std::size_t half = sorted.size() / 2;
  report.median = sorted.size() % 2 == 1 ? sorted[half]
                                         : 0.5 * (sorted[half - 1] + sorted[half]);
  return report;
}

TestSplit load_test_split(const std::vector<std::string>& paths) {
  TestSplit split;
  for (const std::string& path : paths) {
    Ontology o = parse_ontology_file(path);
    std::vector<std::string> problems = validate_el(o);
    if (!problems.empty())
      throw std::runtime_error(path + ": " + problems.front());
    for (const Axiom& ax : o.axioms) {
      if (ax.kind != Axiom::Kind::GCI)
        throw std::runtime_error(path + ": test splits may only contain SubClassOf axioms");
      split.axioms.push_back(ax);
    }
  }
  for (const Axiom& ax : split.axioms) {
    bool lc = is_complex(ax.lhs), rc = is_complex(ax.rhs);
    if (!lc && !rc) split.atomic_atomic.push_back(ax);
    if (!lc && rc) split.atomic_complex.push_back(ax);
    if (lc && !rc) split.complex_atomic.push_back(ax);
    if (lc && rc) split.complex_complex.push_back(ax);
    if (!lc && !rc) split.nf1.push_back(ax);
    if (ax.lhs.kind == ConceptExpr::Kind::Conjunction && all_atomic(ax.lhs.children) && !rc)
      split.nf2.push_back(ax);
    if (!lc && is_exists_atomic(ax.rhs)) split.nf3.push_back(ax);
    if (is_exists_atomic(ax.lhs) && !rc) split.nf4.push_back(ax);
  }
  return split;
}

std::vector<std::string> unknown_names(const TestSplit& split, const EmbeddingModel& model) {
  std::set<std::string> concepts, roles, individuals;
  for (const Axiom& ax : split.axioms) {
    collect_names(ax.lhs, concepts, roles, individuals);
    collect_names(ax.rhs, concepts, roles, individuals);
  }
  std::set<std::string> missing;
  for (const std::string& name : concepts)
    if (!model.concept_index.count(name)) missing.insert(name);
  for (const std::string& name : roles)
    if (!model.role_index.count(name)) missing.insert(name);
  for (const std::string& name : individuals)
    if (!model.individual_index.count(name)) missing.insert(name);
  return {missing.begin(), missing.end()};
}

namespace {

void append_formatted(std::string& out, const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out += buf;
}

}  // namespace

std::string report_table(const std::vector<std::pair<std::string, RankingReport>>& rows) {
  std::size_t label_width = 4;  // "task"
  for (const auto& [label, report] : rows) label_width = std::max(label_width, label.size());

  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s %8s %6s %8s %8s %8s %8s %8s %10s %8s\n",
                static_cast<int>(label_width), "task", "queries", "pool", "H@1", "H@10",
                "H@100", "Med", "MRR", "MR", "AUC");
  out += buf;
  for (const auto& [label, r] : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%-*s %8zu %6zu %8.4f %8.4f %8.4f %8.2f %8.4f %10.2f %8.4f\n",
                  static_cast<int>(label_width), label.c_str(), r.ranks.size(), r.pool_size,
                  r.hits1, r.hits10, r.hits100, r.median, r.mrr, r.mean_rank, r.auc);
    out += buf;
  }
  return out;
}

std::string report_key_values(const std::string& label, const RankingReport& report) {
  std::string out;
  out += "task " + label + "\n";
  out += "queries " + std::to_string(report.ranks.size()) + "\n";
  out += "pool " + std::to_string(report.pool_size) + "\n";
  out += "hits1 ";
  append_formatted(out, "%.17g\n", report.hits1);
  out += "hits10 ";
  append_formatted(out, "%.17g\n", report.hits10);
  out += "hits100 ";
  append_formatted(out, "%.17g\n", report.hits100);
  out += "median ";
  append_formatted(out, "%.17g\n", report.median);
  out += "mrr ";
  append_formatted(out, "%.17g\n", report.mrr);
  out += "mean_rank ";
  append_formatted(out, "%.17g\n", report.mean_rank);
  out += "auc ";
  append_formatted(out, "%.17g\n", report.auc);
  return out;
}

}  // namespace boxel
