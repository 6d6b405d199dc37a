// Acceptance suite: one criterion per guarantee the project makes, each
// verified against independent oracles written directly in this file.  Prints
// exactly one PASS/FAIL line per criterion and exits nonzero if any fail.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "boxel/evaluation.hpp"
#include "boxel/geometry.hpp"
#include "boxel/model.hpp"
#include "boxel/ontology.hpp"
#include "boxel/plot.hpp"
#include "boxel/rng.hpp"
#include "boxel/training.hpp"

using namespace boxel;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ExtendedBox random_plain_box(SplitMix64& rng, std::size_t n, double spread) {
  std::vector<double> center(n), offset(n);
  for (std::size_t j = 0; j < n; ++j) {
    center[j] = rng.uniform(-spread, spread);
    offset[j] = rng.positive(1.5);
  }
  return plain_box(std::move(center), std::move(offset));
}

bool box_shape_valid(const ExtendedBox& b, std::size_t n) {
  if (b.universal) return false;
  if (b.center.size() != n || b.offset.size() != n || b.mask.size() != n) return false;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(b.offset[j] >= 0.0) || !std::isfinite(b.offset[j])) return false;
    if (!std::isfinite(b.center[j])) return false;
    if (b.mask[j] != 0 && b.mask[j] != 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 1: the box operations stay inside the candidate set, and point
// membership in every derived box matches an independently computed oracle.

bool criterion_closure(std::string& note) {
  auto start = Clock::now();
  SplitMix64 rng(101);
  long long intersect_probes = 0, exists_probes = 0, compose_probes = 0;

  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{8}}) {
    for (int config = 0; config < 1000; ++config) {
      ExtendedBox b1 = random_plain_box(rng, n, 2.0);
      ExtendedBox b2 = random_plain_box(rng, n, 2.0);
      if (rng.below(3) == 0) b2.center[rng.below(n)] += 3.5;  // force disjointness often
      ExtendedBox a = b1;
      if (rng.below(4) == 0) {
        // Use an already-degenerate (partially empty) operand as well.
        ExtendedBox spoiler = random_plain_box(rng, n, 2.0);
        spoiler.center[rng.below(n)] += 4.0;
        a = intersect(b1, spoiler);
      }

      ExtendedBox inter = intersect(a, b2);
      if (!box_shape_valid(inter, n)) return false;
      for (int p = 0; p < 2; ++p) {
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = rng.uniform(-4.0, 4.0);
        bool got = contains_point(inter, x);
        bool expected = contains_point(a, x) && contains_point(b2, x);
        if (got != expected) return false;
        ++intersect_probes;
      }

      ExtendedBox role = random_plain_box(rng, n, 2.0);
      ExtendedBox filler = random_plain_box(rng, n, 2.0);
      ExtendedBox reach = exists_box(role, filler);
      if (!box_shape_valid(reach, n) || any_masked(reach)) return false;
      for (int p = 0; p < 2; ++p) {
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = rng.uniform(-6.0, 6.0);
        // x is reachable iff per coordinate the interval of feasible filler
        // points, [x - role_hi, x - role_lo], meets the filler interval.
        bool expected = true;
        for (std::size_t j = 0; j < n; ++j) {
          double role_lo = role.center[j] - role.offset[j];
          double role_hi = role.center[j] + role.offset[j];
          double fil_lo = filler.center[j] - filler.offset[j];
          double fil_hi = filler.center[j] + filler.offset[j];
          if (x[j] - role_hi > fil_hi || x[j] - role_lo < fil_lo) expected = false;
        }
        if (contains_point(reach, x) != expected) return false;
        ++exists_probes;
      }

      ExtendedBox r1 = random_plain_box(rng, n, 2.0);
      ExtendedBox r2 = random_plain_box(rng, n, 2.0);
      ExtendedBox comp = compose_roles(r1, r2);
      if (!box_shape_valid(comp, n) || any_masked(comp)) return false;
      for (int p = 0; p < 2; ++p) {
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = rng.uniform(-6.0, 6.0);
        bool expected = true;
        for (std::size_t j = 0; j < n; ++j) {
          double a_lo = r1.center[j] - r1.offset[j];
          double a_hi = r1.center[j] + r1.offset[j];
          double b_lo = r2.center[j] - r2.offset[j];
          double b_hi = r2.center[j] + r2.offset[j];
          if (x[j] - b_hi > a_hi || x[j] - b_lo < a_lo) expected = false;
        }
        if (contains_point(comp, x) != expected) return false;
        ++compose_probes;
      }
    }
  }

  double elapsed = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%lld/%lld/%lld membership probes, %.1f s",
                intersect_probes, exists_probes, compose_probes, elapsed);
  note = buf;
  return elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// Criterion 2: the all-variant translation box is contained in the plain one,
// checked with exact corner arithmetic.

bool criterion_containment(std::string& note) {
  SplitMix64 rng(202);
  for (int pair = 0; pair < 1000; ++pair) {
    std::size_t n = std::vector<std::size_t>{1, 2, 3, 8}[pair % 4];
    ExtendedBox role = random_plain_box(rng, n, 2.0);
    ExtendedBox filler = random_plain_box(rng, n, 2.0);
    ExtendedBox all = exists_all_box(role, filler);
    ExtendedBox plain = exists_box(role, filler);
    for (std::size_t j = 0; j < n; ++j) {
      double all_lo = all.center[j] - all.offset[j];
      double all_hi = all.center[j] + all.offset[j];
      double plain_lo = plain.center[j] - plain.offset[j];
      double plain_hi = plain.center[j] + plain.offset[j];
      if (all_lo < plain_lo || all_hi > plain_hi) return false;
    }
  }
  note = "1000 pairs, zero corner violations";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 3: the sampled intersection probability of random boxes matches
// the closed form (2/3)^n within 3 standard errors, and vanishes at n = 50.

bool criterion_probability(std::string& note) {
  auto start = Clock::now();
  const std::size_t samples = 100000;
  std::string detail;
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{10}}) {
    double analytic = std::pow(2.0 / 3.0, static_cast<double>(n));
    double empirical = monte_carlo_intersection_probability(n, samples, 777, 0);
    double sigma = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(samples));
    if (std::fabs(empirical - analytic) > 3.0 * sigma) {
      char buf[120];
      std::snprintf(buf, sizeof(buf), "n=%zu: |%.5f - %.5f| > 3*%.5f", n, empirical,
                    analytic, sigma);
      note = buf;
      return false;
    }
  }
  double tail = monte_carlo_intersection_probability(50, samples, 777, 0);
  if (tail != 0.0) {
    note = "n=50 produced intersections";
    return false;
  }
  double elapsed = seconds_since(start);
  char buf[120];
  std::snprintf(buf, sizeof(buf), "n in {1,2,5,10} within 3 sigma, n=50 hit rate 0, %.1f s",
                elapsed);
  note = buf;
  return elapsed < 30.0;
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic gradients agree with central differences away from
// the piecewise-linear kinks.

bool criterion_gradients(std::string& note) {
  Ontology o = parse_ontology(
      "A SubClassOf B and C\n"
      "B SubClassOf r some C\n"
      "r some A SubClassOf C\n"
      "{x} SubClassOf A\n"
      "r o t SubPropertyOf t\n"
      "t SubPropertyOf r\n"
      "C SubClassOf t some {y}\n");
  TrainConfig cfg;
  cfg.dim = 3;
  cfg.gamma = 0.05;
  cfg.lambda = 0.7;
  Ontology prepared = desugar_abox(semantic_enhance(o));
  std::vector<Axiom> negatives = sample_negatives(o, 1, 6);

  std::size_t accepted = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    EmbeddingModel m = init_model(o, cfg.dim, 1000 + seed);
    GradientCheckResult r = gradient_check(m, prepared.axioms, negatives, cfg, 40, seed);
    worst = std::max(worst, r.max_rel_error);
    accepted += r.accepted;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max relative error %.3g over %zu accepted probes",
                worst, accepted);
  note = buf;
  return worst < 1e-4 && accepted >= 200;
}

// ---------------------------------------------------------------------------
// Criterion 5: hand-built zero-loss models verify as sound at tolerance 0,
// and pushing a single parameter past its slack flips the verdict.

void set_concept(EmbeddingModel& m, const std::string& name, std::vector<double> center,
                 std::vector<double> offset) {
  std::size_t idx = m.concept_index.at(name);
  for (std::size_t j = 0; j < m.dim; ++j) {
    m.concept_center[idx * m.dim + j] = center[j];
    m.concept_raw_offset[idx * m.dim + j] = offset[j];
  }
}

void set_role(EmbeddingModel& m, const std::string& name, std::vector<double> center,
              std::vector<double> offset) {
  std::size_t idx = m.role_index.at(name);
  for (std::size_t j = 0; j < m.dim; ++j) {
    m.role_center[idx * m.dim + j] = center[j];
    m.role_raw_offset[idx * m.dim + j] = offset[j];
  }
}

void set_individual(EmbeddingModel& m, const std::string& name, std::vector<double> point) {
  std::size_t idx = m.individual_index.at(name);
  for (std::size_t j = 0; j < m.dim; ++j) m.individual_point[idx * m.dim + j] = point[j];
}

bool criterion_soundness(std::string& note) {
  struct Fixture {
    const char* label;
    Ontology ontology;
    std::function<void(EmbeddingModel&)> setup;
    std::vector<std::function<void(EmbeddingModel&)>> perturbations;
  };
  std::vector<Fixture> fixtures;

  {
    Fixture f;
    f.label = "atomic inclusion";
    f.ontology = parse_ontology("A SubClassOf B\n");
    f.setup = [](EmbeddingModel& m) {
      set_concept(m, "A", {0, 0}, {0.5, 0.5});
      set_concept(m, "B", {0, 0}, {2, 2});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.concept_center[m.concept_index.at("A") * 2] += 2.0; },
        [](EmbeddingModel& m) { m.concept_raw_offset[m.concept_index.at("B") * 2] = 0.25; }};
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.label = "conjunction inclusion";
    f.ontology = parse_ontology("A and B SubClassOf C\n");
    f.setup = [](EmbeddingModel& m) {
      set_concept(m, "A", {0, 0}, {1, 1});
      set_concept(m, "B", {1, 1}, {1, 1});
      set_concept(m, "C", {0.5, 0.5}, {2, 2});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.concept_center[m.concept_index.at("C") * 2] += 5.0; },
        [](EmbeddingModel& m) { m.concept_raw_offset[m.concept_index.at("C") * 2] = 0.1; }};
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.label = "existential restriction";
    f.ontology = parse_ontology("A SubClassOf r some B\n");
    f.setup = [](EmbeddingModel& m) {
      set_concept(m, "A", {3, 3}, {0.5, 0.5});
      set_concept(m, "B", {1, 1}, {1, 1});
      set_role(m, "r", {2, 2}, {0.5, 0.5});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.role_center[m.role_index.at("r") * 2] += 4.0; },
        [](EmbeddingModel& m) { m.concept_center[m.concept_index.at("A") * 2] += 3.0; }};
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.label = "role chain";
    f.ontology = parse_ontology("r o t SubPropertyOf u\n");
    f.setup = [](EmbeddingModel& m) {
      set_role(m, "r", {1, 0}, {0.5, 0.5});
      set_role(m, "t", {0, 1}, {0.5, 0.5});
      set_role(m, "u", {1, 1}, {3, 3});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.role_raw_offset[m.role_index.at("u") * 2] = 0.5; },
        [](EmbeddingModel& m) { m.role_center[m.role_index.at("r") * 2] += 4.0; }};
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.label = "role inclusion";
    f.ontology = parse_ontology("r SubPropertyOf s\n");
    f.setup = [](EmbeddingModel& m) {
      set_role(m, "r", {0, 0}, {0.5, 0.5});
      set_role(m, "s", {0, 0}, {2, 2});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.role_center[m.role_index.at("r") * 2] += 3.0; }};
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.label = "concept assertion";
    f.ontology = parse_ontology("A(x)\n");
    f.setup = [](EmbeddingModel& m) {
      set_concept(m, "A", {0, 0}, {1, 1});
      set_individual(m, "x", {0.5, -0.5});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.individual_point[m.individual_index.at("x") * 2] = 3.0; }};
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.label = "role assertion";
    f.ontology = parse_ontology("r(x,y)\n");
    f.setup = [](EmbeddingModel& m) {
      set_individual(m, "x", {2, 0});
      set_individual(m, "y", {1, 0});
      set_role(m, "r", {1, 0}, {0.5, 0.5});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.individual_point[m.individual_index.at("y") * 2] += 2.0; }};
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.label = "nominal target";
    f.ontology = parse_ontology("A SubClassOf {x}\n");
    f.setup = [](EmbeddingModel& m) {
      set_concept(m, "A", {1, 1}, {0, 0});
      set_individual(m, "x", {1, 1});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.concept_center[m.concept_index.at("A") * 2] += 1.0; }};
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.label = "all-variant restriction";
    Ontology o;
    add_axiom(o, gci(atomic("A"), exists_all("r", atomic("B"))));
    f.ontology = std::move(o);
    f.setup = [](EmbeddingModel& m) {
      set_concept(m, "A", {2, 2}, {0.5, 0.5});
      set_concept(m, "B", {0, 0}, {1, 1});
      set_role(m, "r", {2, 2}, {3, 3});
    };
    f.perturbations = {
        [](EmbeddingModel& m) { m.concept_raw_offset[m.concept_index.at("B") * 2] = 3.5; },
        [](EmbeddingModel& m) { m.concept_center[m.concept_index.at("A") * 2] += 4.0; }};
    fixtures.push_back(std::move(f));
  }

  std::size_t flips = 0;
  for (Fixture& f : fixtures) {
    EmbeddingModel m = init_model(f.ontology, 2, 1);
    f.setup(m);
    SoundnessReport clean = soundness_report(f.ontology, m, 0.0);
    if (!clean.sound || clean.violated != 0) {
      note = std::string(f.label) + ": fixture is not sound at tolerance 0";
      return false;
    }
    for (const auto& perturb : f.perturbations) {
      EmbeddingModel poked = m;
      perturb(poked);
      SoundnessReport broken = soundness_report(f.ontology, poked, 0.0);
      if (broken.sound || broken.violated == 0) {
        note = std::string(f.label) + ": perturbation did not flip the verdict";
        return false;
      }
      ++flips;
    }
    SoundnessReport restored = soundness_report(f.ontology, m, 0.0);
    if (!restored.sound) {
      note = std::string(f.label) + ": baseline model changed";
      return false;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%zu fixtures sound at tol 0, %zu verdict flips",
                fixtures.size(), flips);
  note = buf;
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 6: training the family ontology in 2-D produces the expected
// geometry: near-zero loss, empty forbidden intersections, disjoint siblings.

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

double coordinate_overlap(const ExtendedBox& a, const ExtendedBox& b, std::size_t j) {
  double lo = std::max(a.center[j] - a.offset[j], b.center[j] - b.offset[j]);
  double hi = std::min(a.center[j] + a.offset[j], b.center[j] + b.offset[j]);
  return hi - lo;  // negative means the coordinate intervals are disjoint
}

bool criterion_family(std::string& note) {
  auto start = Clock::now();
  Ontology fam = parse_ontology(kFamilyText);
  TrainConfig cfg;
  cfg.dim = 2;
  cfg.gamma = 0.0;
  cfg.lambda = 0.0;
  cfg.negatives_per_positive = 0;
  cfg.epochs = 5000;
  cfg.learning_rate = 0.01;
  cfg.seed = 7;
  TrainResult r = train(fam, cfg);

  Ontology training_form = desugar_abox(semantic_enhance(fam));
  double mean = 0.0;
  for (const Axiom& ax : training_form.axioms) mean += axiom_loss(ax, r.model, 0.0);
  mean /= static_cast<double>(training_form.axioms.size());

  auto box = [&](const char* name) {
    return concept_box(r.model, r.model.concept_index.at(name));
  };
  ExtendedBox male = box("Male"), female = box("Female");
  ExtendedBox parent = box("Parent"), child = box("Child");
  ExtendedBox father = box("Father"), mother = box("Mother");

  bool disjoint_pairs_empty = true;
  for (std::size_t j = 0; j < 2; ++j) {
    if (coordinate_overlap(male, female, j) > 1e-2) disjoint_pairs_empty = false;
    if (coordinate_overlap(parent, child, j) > 1e-2) disjoint_pairs_empty = false;
  }
  bool father_mother_disjoint = false;
  for (std::size_t j = 0; j < 2; ++j)
    if (coordinate_overlap(father, mother, j) < 0.0) father_mother_disjoint = true;

  double elapsed = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mean axiom loss %.2e, forbidden overlaps %s, Father/Mother %s, %.1f s",
                mean, disjoint_pairs_empty ? "empty" : "PRESENT",
                father_mother_disjoint ? "disjoint" : "OVERLAP", elapsed);
  note = buf;
  return mean <= 1e-3 && disjoint_pairs_empty && father_mother_disjoint && elapsed < 120.0;
}

// ---------------------------------------------------------------------------
// Criterion 7: ranking metrics agree with a brute-force oracle, and a query
// whose candidates all tie lands exactly on the midpoint rank.

RankingReport oracle_metrics(const std::vector<double>& ranks, std::size_t pool) {
  RankingReport r;
  r.ranks = ranks;
  r.pool_size = pool;
  const double n = static_cast<double>(ranks.size());
  double h1 = 0, h10 = 0, h100 = 0, mrr = 0, mr = 0, auc = 0;
  for (double rank : ranks) {
    if (rank <= 1.0) h1 += 1.0;
    if (rank <= 10.0) h10 += 1.0;
    if (rank <= 100.0) h100 += 1.0;
    mrr += 1.0 / rank;
    mr += rank;
    auc += (static_cast<double>(pool) - rank) / (static_cast<double>(pool) - 1.0);
  }
  r.hits1 = h1 / n;
  r.hits10 = h10 / n;
  r.hits100 = h100 / n;
  r.mrr = mrr / n;
  r.mean_rank = mr / n;
  r.auc = auc / n;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  std::size_t mid = sorted.size() / 2;
  r.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return r;
}

bool criterion_metrics(std::string& note) {
  SplitMix64 rng(707);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t pool = 2 + rng.below(300);
    std::size_t count = 1 + rng.below(40);
    std::vector<double> ranks(count);
    for (double& rank : ranks) {
      double base = 1.0 + static_cast<double>(rng.below(pool));
      if (rng.below(3) == 0 && base + 0.5 <= static_cast<double>(pool) - 0.5)
        base += 0.5;  // tie-averaged ranks are half-integers
      rank = base;
    }
    RankingReport got = aggregate_metrics(ranks, pool);
    RankingReport want = oracle_metrics(ranks, pool);
    if (got.hits1 != want.hits1 || got.hits10 != want.hits10 ||
        got.hits100 != want.hits100 || got.median != want.median ||
        got.mean_rank != want.mean_rank) {
      note = "exact metric mismatch";
      return false;
    }
    if (std::fabs(got.mrr - want.mrr) > 1e-12 || std::fabs(got.auc - want.auc) > 1e-12) {
      note = "mrr/auc outside 1e-12";
      return false;
    }
  }

  // All-tie query: an unsatisfiable left-hand side scores every candidate
  // identically, so the tie-averaged rank must be (pool + 1) / 2.
  Ontology o = parse_ontology("A and B SubClassOf C\nD SubClassOf E\n");
  EmbeddingModel m = init_model(o, 2, 3);
  set_concept(m, "A", {0, 0}, {0.5, 0.5});
  set_concept(m, "B", {5, 5}, {0.5, 0.5});
  RankingTask task = build_ranking_task(TaskKind::RhsAtomic, o.axioms, m.concept_names);
  if (task.candidates.size() != 5 || task.queries.size() != 2) {
    note = "unexpected task shape";
    return false;
  }
  std::vector<double> ranks = rank_queries(task, m);
  double expected = (static_cast<double>(task.candidates.size()) + 1.0) / 2.0;
  if (ranks[0] != expected) {
    note = "all-tie query did not land on the midpoint rank";
    return false;
  }
  note = "100 random vectors match the oracle; all-tie rank = (pool+1)/2";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 8: on a synthetic hierarchy with held-out entailed subsumptions
// (computed by an independent transitive-closure oracle), the trained model
// ranks the true superclass far better than random.

bool criterion_heldout(std::string& note) {
  auto start = Clock::now();
  const std::size_t concepts = 100, roles = 5, total_axioms = 300, heldout_count = 50;
  SplitMix64 gen(4242);

  auto concept_name = [](std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "C%03zu", i);
    return std::string(buf);
  };

  // Random attachment tree: the explicit atomic subsumptions.
  std::vector<std::size_t> parent(concepts, 0);
  std::string text;
  std::set<std::string> lines;
  for (std::size_t i = 1; i < concepts; ++i) {
    parent[i] = gen.below(i);
    std::string line = concept_name(i) + " SubClassOf " + concept_name(parent[i]) + "\n";
    lines.insert(line);
    text += line;
  }

  // Transitive-closure oracle: every strict ancestor at distance >= 2 is an
  // entailed but unstated subsumption.
  std::vector<std::pair<std::size_t, std::size_t>> entailed;
  for (std::size_t i = 1; i < concepts; ++i) {
    std::size_t hops = 0;
    for (std::size_t a = parent[i]; ; a = parent[a]) {
      ++hops;
      if (hops >= 2) entailed.emplace_back(i, a);
      if (a == 0) break;
    }
  }
  if (entailed.size() < heldout_count) {
    note = "generator produced too few entailed pairs";
    return false;
  }
  deterministic_shuffle(entailed, gen);
  entailed.resize(heldout_count);

  // Fill with random existential axioms until 300 distinct axioms.
  while (lines.size() < total_axioms) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "C%03llu SubClassOf R%llu some C%03llu\n",
                  static_cast<unsigned long long>(gen.below(concepts)),
                  static_cast<unsigned long long>(gen.below(roles)),
                  static_cast<unsigned long long>(gen.below(concepts)));
    if (lines.insert(buf).second) text += buf;
  }
  Ontology o = parse_ontology(text);
  if (o.axioms.size() != total_axioms) {
    note = "generator produced the wrong axiom count";
    return false;
  }

  std::vector<Axiom> heldout;
  for (auto [sub, sup] : entailed)
    heldout.push_back(gci(atomic(concept_name(sub)), atomic(concept_name(sup))));

  double baseline = 0.0;
  for (std::size_t i = 1; i <= concepts; ++i) baseline += 1.0 / static_cast<double>(i);
  baseline /= static_cast<double>(concepts);

  double mrr_sum = 0.0;
  for (std::uint64_t seed : {std::uint64_t{11}, std::uint64_t{12}, std::uint64_t{13}}) {
    TrainConfig cfg;
    cfg.dim = 25;
    cfg.gamma = 0.0;
    cfg.lambda = 0.0;
    cfg.epochs = 2000;
    cfg.learning_rate = 0.01;
    cfg.negatives_per_positive = 1;
    cfg.seed = seed;
    TrainResult r = train(o, cfg);
    RankingTask task = build_ranking_task(TaskKind::Nf1, heldout, r.model.concept_names);
    std::vector<double> ranks = rank_queries(task, r.model);
    RankingReport report = aggregate_metrics(ranks, task.candidates.size());
    mrr_sum += report.mrr;
  }
  double mean_mrr = mrr_sum / 3.0;

  double elapsed = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "held-out MRR %.4f vs random baseline %.4f (need >= %.4f), %.1f s",
                mean_mrr, baseline, 3.0 * baseline, elapsed);
  note = buf;
  return mean_mrr >= 3.0 * baseline && elapsed < 300.0;
}

// ---------------------------------------------------------------------------
// Criterion 9: text and checkpoint formats round-trip exactly, and the test
// split classifier reproduces known category counts.

ConceptExpr random_expr(SplitMix64& rng, int depth) {
  std::uint64_t pick = rng.below(depth > 0 ? 6 : 4);
  switch (pick) {
    case 0: return atomic("C" + std::to_string(rng.below(8)));
    case 1: return nominal("i" + std::to_string(rng.below(4)));
    case 2: return top();
    case 3: return bottom();
    case 4: return exists("R" + std::to_string(rng.below(3)), random_expr(rng, depth - 1));
    default: {
      std::vector<ConceptExpr> members;
      std::size_t arity = 2 + rng.below(2);
      for (std::size_t i = 0; i < arity; ++i) members.push_back(random_expr(rng, depth - 1));
      return conjunction(std::move(members));
    }
  }
}

Axiom random_axiom(SplitMix64& rng) {
  switch (rng.below(5)) {
    case 0: return gci(random_expr(rng, 2), random_expr(rng, 2));
    case 1:
      return role_inclusion("R" + std::to_string(rng.below(3)),
                            "R" + std::to_string(rng.below(3)));
    case 2:
      return role_chain({"R" + std::to_string(rng.below(3)),
                         "R" + std::to_string(rng.below(3))},
                        "R" + std::to_string(rng.below(3)));
    case 3:
      return concept_assertion("C" + std::to_string(rng.below(8)),
                               "i" + std::to_string(rng.below(4)));
    default:
      return role_assertion("R" + std::to_string(rng.below(3)),
                            "i" + std::to_string(rng.below(4)),
                            "i" + std::to_string(rng.below(4)));
  }
}

bool criterion_formats(std::string& note) {
  SplitMix64 rng(909);

  // Grammar round-trips: serialize -> parse -> serialize is a fixed point.
  for (int i = 0; i < 1000; ++i) {
    Ontology o;
    add_axiom(o, random_axiom(rng));
    std::string once = serialize(o);
    std::string twice = serialize(parse_ontology(once));
    if (once != twice) {
      note = "grammar round-trip changed: " + once;
      return false;
    }
  }

  // Checkpoint round-trips, including negative zero and non-finite values.
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "boxel-acceptance-roundtrip.ckpt";
  const double specials[] = {-0.0, std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::quiet_NaN(), 1e308, 5e-324};
  for (int i = 0; i < 1000; ++i) {
    Ontology o;
    add_axiom(o, gci(atomic("K" + std::to_string(rng.below(5))),
                     exists("R" + std::to_string(rng.below(3)),
                            atomic("K" + std::to_string(rng.below(5))))));
    add_axiom(o, concept_assertion("K" + std::to_string(rng.below(5)),
                                   "j" + std::to_string(rng.below(3))));
    Checkpoint ck;
    ck.model = init_model(o, 1 + rng.below(4), i);
    for (std::size_t p = 0; p < ck.model.parameter_count(); ++p)
      if (rng.below(7) == 0) ck.model.param(p) = specials[rng.below(6)];
    ck.epoch = rng.next_u64() % 100000;
    ck.seed = rng.next_u64();
    ck.final_loss = rng.below(9) == 0 ? specials[rng.below(6)] : rng.uniform(-5, 5);
    ck.config_digest = "digest-" + std::to_string(rng.next_u64());

    save_checkpoint(ck, path.string());
    Checkpoint back = load_checkpoint(path.string());
    bool same = back.model.dim == ck.model.dim &&
                back.model.concept_names == ck.model.concept_names &&
                back.model.role_names == ck.model.role_names &&
                back.model.individual_names == ck.model.individual_names &&
                back.epoch == ck.epoch && back.seed == ck.seed &&
                back.config_digest == ck.config_digest &&
                std::bit_cast<std::uint64_t>(back.final_loss) ==
                    std::bit_cast<std::uint64_t>(ck.final_loss);
    if (same)
      for (std::size_t p = 0; p < ck.model.parameter_count(); ++p)
        if (std::bit_cast<std::uint64_t>(back.model.param(p)) !=
            std::bit_cast<std::uint64_t>(ck.model.param(p)))
          same = false;
    if (!same) {
      note = "checkpoint round-trip diverged";
      fs::remove(path);
      return false;
    }
  }
  fs::remove(path);

  // Category classifier: a file with a known composition must be counted
  // exactly (atomic-lhs/complex-rhs, complex-lhs/atomic-rhs, both complex).
  std::string split_text;
  for (int k = 0; k < 200; ++k)
    split_text += "A" + std::to_string(k) + " SubClassOf R0 some B" + std::to_string(k) + "\n";
  for (int k = 0; k < 630; ++k)
    split_text += "A" + std::to_string(k) + " and B" + std::to_string(k) +
                  " SubClassOf D" + std::to_string(k) + "\n";
  for (int k = 0; k < 166; ++k)
    split_text += "R1 some A" + std::to_string(k) + " SubClassOf B" + std::to_string(k) +
                  " and D" + std::to_string(k) + "\n";
  fs::path split_path = fs::temp_directory_path() / "boxel-acceptance-split.el";
  {
    std::ofstream out(split_path);
    out << split_text;
  }
  TestSplit split = load_test_split({split_path.string()});
  fs::remove(split_path);
  if (split.atomic_complex.size() != 200 || split.complex_atomic.size() != 630 ||
      split.complex_complex.size() != 166 || !split.atomic_atomic.empty() ||
      split.axioms.size() != 996) {
    char buf[120];
    std::snprintf(buf, sizeof(buf), "classifier counts %zu/%zu/%zu (want 200/630/166)",
                  split.atomic_complex.size(), split.complex_atomic.size(),
                  split.complex_complex.size());
    note = buf;
    return false;
  }

  note = "1000 grammar + 1000 checkpoint round-trips exact; counts 200/630/166";
  return true;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    bool (*fn)(std::string&);
  };
  const Entry entries[] = {
      {1, "box operations stay closed and match membership oracles", criterion_closure},
      {2, "all-variant translation box is contained in the plain one", criterion_containment},
      {3, "sampled intersection probability matches the closed form", criterion_probability},
      {4, "analytic gradients match central differences", criterion_gradients},
      {5, "zero-loss models verify sound; perturbations flip verdicts", criterion_soundness},
      {6, "family ontology training reproduces the expected geometry", criterion_family},
      {7, "ranking metrics match a brute-force oracle", criterion_metrics},
      {8, "held-out entailments rank far above the random baseline", criterion_heldout},
      {9, "text and checkpoint formats round-trip exactly", criterion_formats},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    std::string detail;
    bool ok = false;
    try {
      ok = e.fn(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    if (!ok) ++failures;
    std::printf("%s %d: %s%s%s\n", ok ? "PASS" : "FAIL", e.id, e.label,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("acceptance: all %zu criteria passed\n", std::size(entries));
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return 1;
}
