#pragma once

// Embedding parameter store, recursive box evaluation, and geometric
// soundness checking.
//
// Parameters live in five flat arrays addressed by a single global index:
//   [concept centers | concept raw offsets | role centers | role raw offsets |
//    individual points]
// with each entity occupying `dim` consecutive slots in name-sorted order.
// Effective offsets are |raw_offset|, so optimization is unconstrained.
//
// Initialization draws, per entity in name-sorted order: center coordinates
// uniform in [-1, 1], then raw offsets uniform in (0, 0.5]; individuals draw
// a point in [-1, 1]^n. The draw sequence is part of the determinism
// contract: the same (signature, dim, seed) always yields the same model.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "boxel/geometry.hpp"
#include "boxel/ontology.hpp"

namespace boxel {

class UnknownNameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmbeddingModel {
  std::size_t dim = 0;
  std::vector<std::string> concept_names;      // sorted
  std::vector<std::string> role_names;         // sorted
  std::vector<std::string> individual_names;   // sorted
  std::unordered_map<std::string, std::size_t> concept_index;
  std::unordered_map<std::string, std::size_t> role_index;
  std::unordered_map<std::string, std::size_t> individual_index;
  std::vector<double> concept_center;
  std::vector<double> concept_raw_offset;
  std::vector<double> role_center;
  std::vector<double> role_raw_offset;
  std::vector<double> individual_point;

  std::size_t parameter_count() const {
    return dim * (2 * concept_names.size() + 2 * role_names.size() + individual_names.size());
  }
  double& param(std::size_t i);
  double param(std::size_t i) const;
};

// Builds the model for the ontology's signature. Throws std::invalid_argument
// on an empty signature or dim = 0.
EmbeddingModel init_model(const Ontology& o, std::size_t dim, std::uint64_t seed);

ExtendedBox concept_box(const EmbeddingModel& m, std::size_t concept_idx);
ExtendedBox role_box(const EmbeddingModel& m, std::size_t role_idx);

// Structural recursion: Atomic -> stored box; Nominal -> point; Top ->
// universal; Bottom -> fully masked; Conjunction -> left fold of intersect;
// Exists/ExistsAll -> translation boxes. Throws UnknownNameError for names
// outside the model and propagates BottomFillerError/BoxOperationError from
// the geometry layer for degenerate fillers.
ExtendedBox eval_concept_box(const ConceptExpr& c, const EmbeddingModel& m);

// Residual inclusion penalty of the axiom at margin 0. An axiom whose side
// fails to evaluate (bottom filler) reports +inf rather than throwing.
double axiom_residual(const Axiom& ax, const EmbeddingModel& m, Norm norm = Norm::L2);

// True iff axiom_residual(ax) <= tol.
bool check_axiom(const Axiom& ax, const EmbeddingModel& m, double tol, Norm norm = Norm::L2);

struct SoundnessReport {
  struct Entry {
    Axiom axiom;
    bool satisfied = false;
    double residual = 0.0;
  };
  std::vector<Entry> entries;
  std::size_t violated = 0;
  bool sound = true;  // vacuously true for an empty ontology
};

SoundnessReport soundness_report(const Ontology& o, const EmbeddingModel& m, double tol,
                                 Norm norm = Norm::L2);

struct Checkpoint {
  EmbeddingModel model;
  std::uint64_t epoch = 0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
  std::string config_digest;
};

// Little-endian binary format: magic, version, dimensions and counts, name
// tables, parameter arrays as raw 64-bit patterns (round-trip is bit-exact,
// including -0.0 and non-finite values), then the metadata block.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// One line per entity: name, kind, center coordinates, effective offsets
// (zeros for individuals). Shortest round-trip decimal formatting.
std::string export_text(const EmbeddingModel& m);

}  // namespace boxel
