#pragma once

// Deterministic SVG rendering of a 2-D embedding: concept boxes as filled
// labeled rectangles, role boxes dashed, individuals as labeled points.
// Output is byte-stable for a given model: entities render in name-sorted
// order and all numbers use fixed-precision formatting.

#include <string>

#include "boxel/model.hpp"

namespace boxel {

// Throws std::invalid_argument unless model.dim == 2.
std::string render_svg(const EmbeddingModel& model);

}  // namespace boxel
