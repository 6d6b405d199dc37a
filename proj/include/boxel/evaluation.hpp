#pragma once

// Subsumption ranking: candidate scoring, task construction, tie-aware ranks,
// and the seven aggregate metrics.
//
// Design notes.
//  - score(C <= D) = -||(c(C) - c(D)) * m_C * m_D|| - M ||m_C * (1 - m_D)||
//    with M = 1e4 by default: the first term measures center distance on the
//    coordinates both boxes inhabit, the second charges a flat penalty per
//    coordinate C needs but D lacks. A left side that denotes the empty set
//    scores 0 against everything (the empty set is included everywhere); by
//    default that means ALL components empty, with a strict variant treating
//    ANY empty component as empty. Evaluation always uses plain existential
//    boxes; the all-variant is a training-time device.
//  - Ranks are raw (no filtering of known positives) and tie-aware: the true
//    answer gets the mean rank of its score-tie group, so a pool of 11 total
//    ties yields rank 6 and ranks may be fractional.
//  - Queries are independent; the parallel ranker fans them out and must
//    (and does) return exactly the serial reference's output.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "boxel/model.hpp"
#include "boxel/ontology.hpp"

namespace boxel {

enum class EmptyLhsRule {
  AllMasked,  // LHS counts as empty only when every component is masked out
  AnyMasked,  // strict: one masked component already empties the set
};

struct ScoreOptions {
  double big_constant = 1e4;  // penalty per coordinate missing from the RHS
  EmptyLhsRule empty_lhs = EmptyLhsRule::AllMasked;
};

// Ranking score of the candidate axiom lhs <= rhs; higher means more likely.
// A side whose evaluation hits an uninhabited existential filler is treated
// as the empty box (all components masked).
double score(const ConceptExpr& lhs, const ConceptExpr& rhs, const EmbeddingModel& model,
             const ScoreOptions& opts = {});

enum class TaskKind {
  RhsAtomic,   // * <= ?A : rank atomic right-hand sides
  LhsAtomic,   // ?A <= * : rank atomic left-hand sides
  RhsComplex,  // * <= ?C : rank complex right-hand sides
  LhsComplex,  // ?C <= * : rank complex left-hand sides
  Nf1,         // A <= ?B
  Nf2,         // A and B <= ?B'
  Nf3,         // ?A <= r some B
  Nf4,         // r some B <= ?A
};

const char* task_kind_name(TaskKind kind);
std::optional<TaskKind> parse_task_kind(std::string_view name);
// True when candidates substitute into the left-hand side of the query.
bool task_slot_is_lhs(TaskKind kind);

struct RankingTask {
  TaskKind kind = TaskKind::RhsAtomic;
  std::vector<ConceptExpr> candidates;
  std::vector<Axiom> queries;  // GCIs whose open side is a pool member
};

// Select the queries matching `kind` from the test axioms and attach the
// candidate pool: the named atomic concepts for atomic and normal-form kinds,
// or every distinct non-atomic side appearing in the test set for the
// complex kinds.
RankingTask build_ranking_task(TaskKind kind, const std::vector<Axiom>& test_axioms,
                               const std::vector<std::string>& atomic_pool);

// Tie-mean rank of each query's true answer among the candidates. Throws
// std::invalid_argument when a query's true answer is missing from the pool.
// threads as elsewhere: 0 = runtime default, 1 = serial.
std::vector<double> rank_queries(const RankingTask& task, const EmbeddingModel& model,
                                 const ScoreOptions& opts = {}, int threads = 0);
std::vector<double> rank_queries_serial(const RankingTask& task, const EmbeddingModel& model,
                                        const ScoreOptions& opts = {});

struct RankingReport {
  std::vector<double> ranks;
  std::size_t pool_size = 0;
  double hits1 = 0.0, hits10 = 0.0, hits100 = 0.0;
  double median = 0.0;
  double mrr = 0.0;        // mean reciprocal rank
  double mean_rank = 0.0;
  double auc = 0.0;        // mean (pool - rank) / (pool - 1)
};

// Throws std::invalid_argument on an empty rank list, pool_size < 2, or a
// rank outside [1, pool_size].
RankingReport aggregate_metrics(const std::vector<double>& ranks, std::size_t pool_size);

// A parsed test split, partitioned by which sides are atomic and into the
// four normal forms. `axioms` preserves file order across all input files.
struct TestSplit {
  std::vector<Axiom> axioms;
  std::vector<Axiom> atomic_atomic;    // A <= B
  std::vector<Axiom> atomic_complex;   // A <= D with D complex
  std::vector<Axiom> complex_atomic;   // C <= A
  std::vector<Axiom> complex_complex;  // C <= D
  std::vector<Axiom> nf1;              // A <= B
  std::vector<Axiom> nf2;              // A and B <= B'
  std::vector<Axiom> nf3;              // A <= r some B
  std::vector<Axiom> nf4;              // r some B <= A
};

// Parses each file with the ontology grammar; every axiom must be a GCI that
// passes EL validation. Parse and classification errors carry the location.
TestSplit load_test_split(const std::vector<std::string>& paths);

// Names used by the split that the model does not know, sorted and deduped.
std::vector<std::string> unknown_names(const TestSplit& split, const EmbeddingModel& model);

// Aligned plain-text table, one row per (label, report).
std::string report_table(const std::vector<std::pair<std::string, RankingReport>>& rows);
// Machine-readable lines: "task <label>", "queries N", "pool N", then one
// metric per line.
std::string report_key_values(const std::string& label, const RankingReport& report);

}  // namespace boxel
