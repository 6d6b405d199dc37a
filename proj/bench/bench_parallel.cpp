// Timing harness for the parallel kernels against their serial reference
// implementations.  Prints wall-clock times and the speedup; also verifies the
// results agree bitwise, since that is the whole point of the design.
//
// Usage: boxel_bench [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "boxel/evaluation.hpp"
#include "boxel/geometry.hpp"
#include "boxel/model.hpp"
#include "boxel/ontology.hpp"
#include "boxel/training.hpp"

using namespace boxel;
using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best(int repeats, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = Clock::now();
    fn();
    auto t1 = Clock::now();
    double s = seconds(t0, t1);
    if (s < best) best = s;
  }
  return best;
}

void report(const char* label, double serial, double parallel, bool equal) {
  std::printf("%-18s serial %8.4fs   parallel %8.4fs   speedup %5.2fx   %s\n", label,
              serial, parallel, parallel > 0 ? serial / parallel : 0.0,
              equal ? "results match" : "RESULTS DIFFER");
}

Ontology synthetic_ontology(int concepts) {
  std::string text;
  for (int i = 0; i < concepts; ++i) {
    char line[96];
    std::snprintf(line, sizeof(line), "C%03d SubClassOf C%03d\n", i,
                  (i + 1) % concepts);
    text += line;
    std::snprintf(line, sizeof(line), "C%03d SubClassOf r some C%03d\n", i,
                  (i + 7) % concepts);
    text += line;
  }
  return parse_ontology(text);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;

  // Monte Carlo intersection sampling.
  {
    const std::size_t n = 10, samples = 2000000;
    double serial_value = 0.0, parallel_value = 0.0;
    double ts = time_best(repeats, [&] {
      serial_value = monte_carlo_intersection_probability_serial(n, samples, 9);
    });
    double tp = time_best(repeats, [&] {
      parallel_value = monte_carlo_intersection_probability(n, samples, 9, 0);
    });
    report("monte-carlo", ts, tp, serial_value == parallel_value);
  }

  // Batch gradient accumulation.
  {
    Ontology o = synthetic_ontology(120);
    EmbeddingModel model = init_model(o, 50, 3);
    std::vector<Axiom> negatives = sample_negatives(o, 1, 17);
    LossOptions opts;
    std::vector<double> gs(model.parameter_count()), gp(model.parameter_count());
    double ts = time_best(repeats, [&] {
      accumulate_batch_gradient_serial(model, o.axioms, negatives, 0.05, 1.0, opts, gs);
    });
    double tp = time_best(repeats, [&] {
      accumulate_batch_gradient(model, o.axioms, negatives, 0.05, 1.0, opts, 0, gp);
    });
    report("batch-gradient", ts, tp, gs == gp);
  }

  // Subsumption ranking.
  {
    Ontology o = synthetic_ontology(220);
    EmbeddingModel model = init_model(o, 50, 5);
    RankingTask task = build_ranking_task(TaskKind::Nf1, o.axioms, model.concept_names);
    std::vector<double> rs, rp;
    double ts = time_best(repeats, [&] { rs = rank_queries_serial(task, model); });
    double tp = time_best(repeats, [&] { rp = rank_queries(task, model, {}, 0); });
    report("ranking", ts, tp, rs == rp);
  }

  return 0;
}
