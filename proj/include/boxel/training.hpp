#pragma once

// Embedding training: positive inclusion losses over evaluated boxes, sampled
// corrupted-existential negatives, a center regularizer, and Adam updates.
//
// Design notes.
//  - Losses are differentiated with the scalar tape (tape.hpp).  Each axiom in
//    a batch gets its own tape, so axiom gradients can be computed in parallel;
//    the sparse per-axiom gradients are then folded into the dense batch
//    gradient serially in axiom order.  That fold order makes the result
//    bitwise identical for any thread count, including the serial reference.
//  - Masks are value-level decisions: which coordinates of an intersection are
//    inhabited is decided by comparing forward values, and only the selected
//    coordinates' nodes enter the loss sums.  No gradient flows through the
//    selection itself, matching the subgradient convention of treating the
//    active branch as locally fixed.
//  - The per-axiom objective is (L(a) + lambda*R(a))^2 by default (the square
//    can be turned off), averaged over the batch together with the negative
//    terms; see total_loss.
//  - Axioms whose evaluation hits an uninhabited existential filler cannot be
//    scored; they are skipped and counted (BatchStats::skipped, and NaN from
//    axiom_loss) rather than aborting the run.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "boxel/geometry.hpp"
#include "boxel/model.hpp"
#include "boxel/ontology.hpp"

namespace boxel {

// Knobs shared by the value-level and taped loss evaluations.
struct LossOptions {
  Norm norm = Norm::L2;
  // Square the positive term (L + lambda*R)?  On by default; off makes the
  // objective affine in lambda, which is handy for testing.
  bool square_positive_term = true;
  // Read the negative loss per coordinate (mean over coordinates of
  // (1 - clip_j)^2) instead of through the norm of the clip vector.
  bool negative_loss_per_coordinate = false;
  // Optional penalty ||max{0, min_offset - o(A)}|| summed over atomic concept
  // occurrences, discouraging degenerate boxes.  0 disables it.
  double min_offset = 0.0;
};

struct TrainConfig {
  std::size_t dim = 50;
  double gamma = 0.0;                      // inclusion margin
  double learning_rate = 0.005;
  double lambda = 1.0;                     // regularization weight
  std::size_t epochs = 5000;
  std::size_t batch_size = 512;
  std::size_t negatives_per_positive = 1;  // 0 disables negative sampling
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = library default, 1 = serial
  LossOptions loss;
  // Invoke the checkpoint callback every this many epochs (0 = never).
  std::size_t checkpoint_every = 0;
};

struct TrainingDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Loss of a single axiom against the current model, with margin gamma.
// Returns quiet NaN when the axiom cannot be scored because an existential
// filler evaluates to the empty set (the caller records and skips it).
double axiom_loss(const Axiom& axiom, const EmbeddingModel& model, double gamma,
                  Norm norm = Norm::L2);

// Sum of ||c(A) - 1|| over atomic concept occurrences in the axiom.
double regularization_loss(const Axiom& axiom, const EmbeddingModel& model,
                           Norm norm = Norm::L2);

// For every training axiom of the shape  A SubClassOf r some B  with atomic A
// and B, draw `per_axiom` corrupted copies A' SubClassOf r some B' with A', B'
// uniform over the ontology's concept names, resampling any draw that collides
// with an existing training axiom.  Deterministic in (ontology, seed); the
// result lists all negatives for the first eligible axiom, then the second,
// and so on.
std::vector<Axiom> sample_negatives(const Ontology& ontology, std::size_t per_axiom,
                                    std::uint64_t seed);

// Mean over the batch of (L + lambda*R)^2 (positives) plus the summed negative
// losses, all divided by batch.size().  Unscorable axioms contribute zero.
double total_loss(const std::vector<Axiom>& batch, const std::vector<Axiom>& negatives,
                  const EmbeddingModel& model, double gamma, double lambda,
                  const LossOptions& opts = {});

struct BatchStats {
  double positive_sum = 0.0;        // sum of per-axiom (L + lambda*R)^2 terms
  double negative_sum = 0.0;        // sum of negative-axiom losses
  double inclusion_sum = 0.0;       // sum of raw L(a) values over scored axioms
  double regularization_sum = 0.0;  // sum of R(a) values before weighting
  double total = 0.0;               // the objective: (positive+negative)/batch
  std::size_t skipped = 0;          // axioms dropped for uninhabited fillers
};

// Accumulate d(total)/d(theta) for one batch into `grad` (sized
// model.parameter_count(), overwritten).  `threads` as in TrainConfig.  The
// serial variant is the reference implementation the parallel one must match
// bitwise.
BatchStats accumulate_batch_gradient(const EmbeddingModel& model,
                                     const std::vector<Axiom>& batch,
                                     const std::vector<Axiom>& negatives, double gamma,
                                     double lambda, const LossOptions& opts, int threads,
                                     std::vector<double>& grad);
BatchStats accumulate_batch_gradient_serial(const EmbeddingModel& model,
                                            const std::vector<Axiom>& batch,
                                            const std::vector<Axiom>& negatives,
                                            double gamma, double lambda,
                                            const LossOptions& opts,
                                            std::vector<double>& grad);

struct EpochStats {
  std::size_t epoch = 0;            // 1-based
  double mean_positive = 0.0;       // mean inclusion loss over scored axioms
  double mean_negative = 0.0;       // mean negative loss (0 when disabled)
  double mean_regularization = 0.0; // mean R over scored axioms
  double total = 0.0;               // mean of batch objectives this epoch
  std::size_t skipped = 0;
};

struct TrainResult {
  EmbeddingModel model;
  std::vector<EpochStats> trace;    // one entry per epoch
};

// Full training loop: semantically enhance and desugar the ontology, init the
// model from (ontology, dim, seed), then run Adam over shuffled batches with
// freshly sampled negatives each epoch.  Throws TrainingDivergedError when the
// epoch objective stops being finite.  `on_checkpoint` (if set) fires every
// cfg.checkpoint_every epochs and once after the final epoch.
TrainResult train(const Ontology& ontology, const TrainConfig& cfg,
                  const std::function<void(std::size_t, const EmbeddingModel&)>&
                      on_checkpoint = nullptr);

struct GradientCheckResult {
  double max_rel_error = 0.0;
  std::size_t accepted = 0;
  std::size_t skipped = 0;
};

// Compare analytic batch gradients against central finite differences
// (h = 1e-5) at `probes` random parameters.  A probe is skipped when the
// perturbed evaluations land on a different side of some non-smooth point
// (branch signature change) or within 1e-4 of one (kink margin), where the
// comparison would be meaningless.
GradientCheckResult gradient_check(const EmbeddingModel& model,
                                   const std::vector<Axiom>& batch,
                                   const std::vector<Axiom>& negatives,
                                   const TrainConfig& cfg, std::size_t probes,
                                   std::uint64_t seed);

}  // namespace boxel
