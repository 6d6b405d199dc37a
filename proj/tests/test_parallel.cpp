// The parallel kernels must produce bitwise-identical results to their serial
// reference implementations for every thread count: work is split into
// per-item units with independent state and folded in item order.

#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "boxel/evaluation.hpp"
#include "boxel/geometry.hpp"
#include "boxel/model.hpp"
#include "boxel/ontology.hpp"
#include "boxel/training.hpp"

using namespace boxel;

namespace {

const char* kFamilyText =
    "Father SubClassOf Male and Parent\n"
    "Mother SubClassOf Female and Parent\n"
    "Male and Parent SubClassOf Father\n"
    "Female and Parent SubClassOf Mother\n"
    "Male and Female SubClassOf Nothing\n"
    "Parent and Child SubClassOf Nothing\n"
    "Child SubClassOf hasParent some Mother\n"
    "Child SubClassOf hasParent some Father\n"
    "Parent SubClassOf hasChild some Child\n";

}  // namespace

TEST_CASE("monte carlo sampling is independent of thread count") {
  for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{8}}) {
    for (std::uint64_t seed : {std::uint64_t{1}, std::uint64_t{42}}) {
      double reference = monte_carlo_intersection_probability_serial(n, 20000, seed);
      for (int threads : {0, 1, 2, 3, 7}) {
        double parallel = monte_carlo_intersection_probability(n, 20000, seed, threads);
        CHECK(parallel == reference);
      }
    }
  }
}

TEST_CASE("batch gradient is independent of thread count") {
  Ontology fam = parse_ontology(kFamilyText);
  EmbeddingModel model = init_model(fam, 4, 5);
  std::vector<Axiom> negatives = sample_negatives(fam, 2, 99);
  LossOptions opts;

  std::vector<double> reference(model.parameter_count());
  BatchStats ref_stats = accumulate_batch_gradient_serial(model, fam.axioms, negatives,
                                                          0.05, 0.7, opts, reference);

  for (int threads : {0, 2, 3, 5}) {
    std::vector<double> grad(model.parameter_count());
    BatchStats stats = accumulate_batch_gradient(model, fam.axioms, negatives, 0.05, 0.7,
                                                 opts, threads, grad);
    CHECK(stats.positive_sum == ref_stats.positive_sum);
    CHECK(stats.negative_sum == ref_stats.negative_sum);
    CHECK(stats.inclusion_sum == ref_stats.inclusion_sum);
    CHECK(stats.regularization_sum == ref_stats.regularization_sum);
    CHECK(stats.total == ref_stats.total);
    CHECK(stats.skipped == ref_stats.skipped);
    REQUIRE(grad.size() == reference.size());
    bool all_equal = true;
    for (std::size_t i = 0; i < grad.size(); ++i)
      if (grad[i] != reference[i]) all_equal = false;
    CHECK(all_equal);
  }
}

TEST_CASE("query ranking is independent of thread count") {
  std::string text;
  for (int i = 0; i + 1 < 30; ++i) {
    char line[64];
    std::snprintf(line, sizeof(line), "C%02d SubClassOf C%02d\n", i, i + 1);
    text += line;
  }
  Ontology chain = parse_ontology(text);
  EmbeddingModel model = init_model(chain, 3, 11);

  RankingTask task = build_ranking_task(TaskKind::Nf1, chain.axioms, model.concept_names);
  REQUIRE(task.queries.size() == 29);
  std::vector<double> reference = rank_queries_serial(task, model);

  for (int threads : {0, 2, 4}) {
    std::vector<double> ranks = rank_queries(task, model, {}, threads);
    REQUIRE(ranks.size() == reference.size());
    bool all_equal = true;
    for (std::size_t i = 0; i < ranks.size(); ++i)
      if (ranks[i] != reference[i]) all_equal = false;
    CHECK(all_equal);
  }
}
