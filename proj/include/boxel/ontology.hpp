#pragma once

// EL++ data model and the line-based text format.
//
// Grammar (one axiom per line, '#' starts a comment):
//   concept := "Thing" | "Nothing" | NAME | "{" NAME "}"
//            | concept " and " concept | NAME " some " concept | "(" concept ")"
//   axiom   := concept " SubClassOf " concept
//            | NAME " SubPropertyOf " NAME
//            | NAME " o " NAME " SubPropertyOf " NAME
//            | NAME "(" NAME ")" | NAME "(" NAME "," NAME ")"
//   NAME    := [A-Za-z_][A-Za-z0-9_.-]*
// "and" is left-associative and binds looser than "some". Keywords are
// reserved and cannot be used as names.
//
// The all-variant existential (ExistsAll) has no surface syntax: it only
// arises from semantic_enhance. The serializer prints it as "r someAll C"
// for diagnostics; the parser does not accept that form.

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace boxel {

struct ConceptExpr {
  enum class Kind { Top, Bottom, Atomic, Nominal, Conjunction, Exists, ExistsAll };
  Kind kind = Kind::Top;
  std::string name;                   // Atomic: concept; Nominal: individual; Exists*: role
  std::vector<ConceptExpr> children;  // Conjunction: members (>= 2); Exists*: the filler

  bool operator==(const ConceptExpr&) const = default;
};

ConceptExpr top();
ConceptExpr bottom();
ConceptExpr atomic(std::string name);
ConceptExpr nominal(std::string individual);
// Flattens nested conjunctions and drops structural duplicates; a single
// surviving member is returned unwrapped.
ConceptExpr conjunction(std::vector<ConceptExpr> members);
ConceptExpr exists(std::string role, ConceptExpr filler);
ConceptExpr exists_all(std::string role, ConceptExpr filler);

struct Axiom {
  enum class Kind { GCI, RoleInclusion, RoleChain, ConceptAssertion, RoleAssertion };
  Kind kind = Kind::GCI;
  ConceptExpr lhs, rhs;            // GCI sides
  std::vector<std::string> chain;  // RoleChain: composed roles in order (2 in surface syntax)
  std::string sub_role, sup_role;  // RoleInclusion both; RoleChain superrole only
  std::string concept_name;        // ConceptAssertion
  std::string role_name;           // RoleAssertion
  std::string subject, object;     // assertion individuals

  bool operator==(const Axiom&) const = default;
};

Axiom gci(ConceptExpr lhs, ConceptExpr rhs);
Axiom role_inclusion(std::string sub, std::string sup);
Axiom role_chain(std::vector<std::string> roles, std::string sup);
Axiom concept_assertion(std::string concept_name, std::string individual);
Axiom role_assertion(std::string role, std::string subject, std::string object);

// Signature sets are kept sorted so that every iteration order downstream
// (parameter layout, sampling pools) is deterministic.
struct Ontology {
  std::vector<Axiom> axioms;
  std::set<std::string> concepts;
  std::set<std::string> roles;
  std::set<std::string> individuals;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line;
  int column;
};

// Appends an axiom unless a structural duplicate is already present, and
// folds its names into the signature. Throws ParseError if a name would land
// in two signature categories.
void add_axiom(Ontology& o, Axiom ax);

Ontology parse_ontology(const std::string& text);
Ontology parse_ontology_file(const std::string& path);

std::string serialize(const ConceptExpr& c);
std::string serialize(const Axiom& ax);
std::string serialize(const Ontology& o);

// Surface-syntax and structural rule violations, one message per axiom:
// ExistsAll in user input, role chains not of length 2, malformed
// conjunctions, names missing from the signature. Empty means valid.
std::vector<std::string> validate_el(const Ontology& o);

// Rewrites every Exists on a GCI right-hand side (at any depth) to
// ExistsAll. Left-hand sides and non-GCI axioms pass through; axiom count is
// preserved.
Ontology semantic_enhance(const Ontology& o);

// Syntactic inverse of semantic_enhance: every ExistsAll becomes Exists.
Ontology erase_enhancement(const Ontology& o);

// A(a) becomes {a} SubClassOf A; r(a,b) becomes {a} SubClassOf r some {b}.
// TBox axioms pass through unchanged.
Ontology desugar_abox(const Ontology& o);

// Number of atomic-concept, nominal, and role-name occurrences in the tree.
std::size_t concept_length(const ConceptExpr& c);

}  // namespace boxel
