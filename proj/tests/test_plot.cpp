#include <doctest.h>

#include <string>

#include "boxel/model.hpp"
#include "boxel/plot.hpp"

using namespace boxel;

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("render_svg draws one labeled rectangle per entity") {
  Ontology o = parse_ontology(
      "Father SubClassOf Male and Parent\n"
      "Mother SubClassOf Female and Parent\n"
      "Child SubClassOf hasParent some Mother\n"
      "Parent SubClassOf hasChild some Child\n");
  EmbeddingModel m = init_model(o, 2, 5);
  std::string svg = render_svg(m);

  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  // 6 concepts and 2 roles in this signature, each with a label.
  CHECK(count_occurrences(svg, "class=\"concept\"") == 6);
  CHECK(count_occurrences(svg, "class=\"role\"") == 2);
  for (const char* name : {"Father", "Mother", "Male", "Female", "Parent", "Child",
                           "hasParent", "hasChild"})
    CHECK(svg.find(">" + std::string(name) + "<") != std::string::npos);
}

TEST_CASE("render_svg is byte-deterministic") {
  Ontology o = parse_ontology("A SubClassOf r some B\nr(x,y)\n");
  EmbeddingModel m = init_model(o, 2, 9);
  CHECK(render_svg(m) == render_svg(m));
  // Individuals appear as labeled points.
  std::string svg = render_svg(m);
  CHECK(count_occurrences(svg, "class=\"individual\"") == 2);
}

TEST_CASE("render_svg requires dimension 2") {
  Ontology o = parse_ontology("A SubClassOf B\n");
  CHECK_THROWS_AS(render_svg(init_model(o, 3, 1)), std::invalid_argument);
  CHECK_THROWS_AS(render_svg(init_model(o, 1, 1)), std::invalid_argument);
}
