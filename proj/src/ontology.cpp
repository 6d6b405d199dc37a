#include "boxel/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

namespace boxel {

ConceptExpr top() { return ConceptExpr{ConceptExpr::Kind::Top, {}, {}}; }
ConceptExpr bottom() { return ConceptExpr{ConceptExpr::Kind::Bottom, {}, {}}; }

ConceptExpr atomic(std::string name) {
  return ConceptExpr{ConceptExpr::Kind::Atomic, std::move(name), {}};
}

ConceptExpr nominal(std::string individual) {
  return ConceptExpr{ConceptExpr::Kind::Nominal, std::move(individual), {}};
}

ConceptExpr conjunction(std::vector<ConceptExpr> members) {
  std::vector<ConceptExpr> flat;
  for (ConceptExpr& m : members) {
    if (m.kind == ConceptExpr::Kind::Conjunction) {
      for (ConceptExpr& inner : m.children) {
        if (std::find(flat.begin(), flat.end(), inner) == flat.end())
          flat.push_back(std::move(inner));
      }
    } else if (std::find(flat.begin(), flat.end(), m) == flat.end()) {
      flat.push_back(std::move(m));
    }
  }
  if (flat.empty()) return top();
  if (flat.size() == 1) return std::move(flat[0]);
  return ConceptExpr{ConceptExpr::Kind::Conjunction, {}, std::move(flat)};
}

ConceptExpr exists(std::string role, ConceptExpr filler) {
  ConceptExpr c{ConceptExpr::Kind::Exists, std::move(role), {}};
  c.children.push_back(std::move(filler));
  return c;
}

ConceptExpr exists_all(std::string role, ConceptExpr filler) {
  ConceptExpr c{ConceptExpr::Kind::ExistsAll, std::move(role), {}};
  c.children.push_back(std::move(filler));
  return c;
}

Axiom gci(ConceptExpr lhs, ConceptExpr rhs) {
  Axiom ax;
  ax.kind = Axiom::Kind::GCI;
  ax.lhs = std::move(lhs);
  ax.rhs = std::move(rhs);
  return ax;
}

Axiom role_inclusion(std::string sub, std::string sup) {
  Axiom ax;
  ax.kind = Axiom::Kind::RoleInclusion;
  ax.sub_role = std::move(sub);
  ax.sup_role = std::move(sup);
  return ax;
}

Axiom role_chain(std::vector<std::string> roles, std::string sup) {
  Axiom ax;
  ax.kind = Axiom::Kind::RoleChain;
  ax.chain = std::move(roles);
  ax.sup_role = std::move(sup);
  return ax;
}

Axiom concept_assertion(std::string concept_name, std::string individual) {
  Axiom ax;
  ax.kind = Axiom::Kind::ConceptAssertion;
  ax.concept_name = std::move(concept_name);
  ax.subject = std::move(individual);
  return ax;
}

Axiom role_assertion(std::string role, std::string subject, std::string object) {
  Axiom ax;
  ax.kind = Axiom::Kind::RoleAssertion;
  ax.role_name = std::move(role);
  ax.subject = std::move(subject);
  ax.object = std::move(object);
  return ax;
}

ParseError::ParseError(int line_, int column_, const std::string& message)
    : std::runtime_error("line " + std::to_string(line_) + ", column " +
                         std::to_string(column_) + ": " + message),
      line(line_),
      column(column_) {}

namespace {

enum class Category { Concept, Role, Individual };

const char* category_name(Category c) {
  switch (c) {
    case Category::Concept: return "concept";
    case Category::Role: return "role";
    default: return "individual";
  }
}

// Records a name use, enforcing pairwise-disjoint signature categories.
void record_name(Ontology& o, const std::string& name, Category cat, int line, int column) {
  bool in_c = o.concepts.count(name) > 0;
  bool in_r = o.roles.count(name) > 0;
  bool in_i = o.individuals.count(name) > 0;
  Category prior = in_c ? Category::Concept : in_r ? Category::Role : Category::Individual;
  if ((in_c || in_r || in_i) && prior != cat)
    throw ParseError(line, column,
                     "name '" + name + "' already used as a " + std::string(category_name(prior)) +
                         ", cannot also be a " + category_name(cat));
  switch (cat) {
    case Category::Concept: o.concepts.insert(name); break;
    case Category::Role: o.roles.insert(name); break;
    case Category::Individual: o.individuals.insert(name); break;
  }
}

void record_concept_names(Ontology& o, const ConceptExpr& c, int line, int column) {
  switch (c.kind) {
    case ConceptExpr::Kind::Top:
    case ConceptExpr::Kind::Bottom:
      return;
    case ConceptExpr::Kind::Atomic:
      record_name(o, c.name, Category::Concept, line, column);
      return;
    case ConceptExpr::Kind::Nominal:
      record_name(o, c.name, Category::Individual, line, column);
      return;
    case ConceptExpr::Kind::Conjunction:
      for (const ConceptExpr& m : c.children) record_concept_names(o, m, line, column);
      return;
    case ConceptExpr::Kind::Exists:
    case ConceptExpr::Kind::ExistsAll:
      record_name(o, c.name, Category::Role, line, column);
      record_concept_names(o, c.children[0], line, column);
      return;
  }
}

void record_axiom_names(Ontology& o, const Axiom& ax, int line, int column) {
  switch (ax.kind) {
    case Axiom::Kind::GCI:
      record_concept_names(o, ax.lhs, line, column);
      record_concept_names(o, ax.rhs, line, column);
      return;
    case Axiom::Kind::RoleInclusion:
      record_name(o, ax.sub_role, Category::Role, line, column);
      record_name(o, ax.sup_role, Category::Role, line, column);
      return;
    case Axiom::Kind::RoleChain:
      for (const std::string& r : ax.chain) record_name(o, r, Category::Role, line, column);
      record_name(o, ax.sup_role, Category::Role, line, column);
      return;
    case Axiom::Kind::ConceptAssertion:
      record_name(o, ax.concept_name, Category::Concept, line, column);
      record_name(o, ax.subject, Category::Individual, line, column);
      return;
    case Axiom::Kind::RoleAssertion:
      record_name(o, ax.role_name, Category::Role, line, column);
      record_name(o, ax.subject, Category::Individual, line, column);
      record_name(o, ax.object, Category::Individual, line, column);
      return;
  }
}

struct Token {
  enum class Type {
    Name, Thing, Nothing, And, Some, O, SubClassOf, SubPropertyOf,
    LParen, RParen, LBrace, RBrace, Comma, End
  };
  Type type;
  std::string text;
  int column;
};

bool name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool name_char(char c) {
  return name_start(c) || (c >= '0' && c <= '9') || c == '.' || c == '-';
}

std::vector<Token> lex_line(const std::string& line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    int column = static_cast<int>(i) + 1;
    if (c == '(') { out.push_back({Token::Type::LParen, "(", column}); ++i; continue; }
    if (c == ')') { out.push_back({Token::Type::RParen, ")", column}); ++i; continue; }
    if (c == '{') { out.push_back({Token::Type::LBrace, "{", column}); ++i; continue; }
    if (c == '}') { out.push_back({Token::Type::RBrace, "}", column}); ++i; continue; }
    if (c == ',') { out.push_back({Token::Type::Comma, ",", column}); ++i; continue; }
    if (!name_start(c))
      throw ParseError(line_no, column, std::string("unexpected character '") + c + "'");
    std::size_t start = i;
    while (i < line.size() && name_char(line[i])) ++i;
    std::string word = line.substr(start, i - start);
    Token::Type type = Token::Type::Name;
    if (word == "Thing") type = Token::Type::Thing;
    else if (word == "Nothing") type = Token::Type::Nothing;
    else if (word == "and") type = Token::Type::And;
    else if (word == "some") type = Token::Type::Some;
    else if (word == "o") type = Token::Type::O;
    else if (word == "SubClassOf") type = Token::Type::SubClassOf;
    else if (word == "SubPropertyOf") type = Token::Type::SubPropertyOf;
    out.push_back({type, std::move(word), column});
  }
  out.push_back({Token::Type::End, "", static_cast<int>(line.size()) + 1});
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, int line_no)
      : tokens_(std::move(tokens)), line_(line_no) {}

  Axiom parse_axiom() {
    bool has_subclass = false, has_subprop = false;
    for (const Token& t : tokens_) {
      if (t.type == Token::Type::SubClassOf) has_subclass = true;
      if (t.type == Token::Type::SubPropertyOf) has_subprop = true;
    }
    Axiom ax;
    if (has_subprop) ax = parse_role_axiom();
    else if (has_subclass) ax = parse_gci();
    else ax = parse_assertion();
    expect(Token::Type::End, "end of line");
    return ax;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(line_, peek().column, message);
  }

  const Token& expect(Token::Type type, const char* what) {
    if (peek().type != type) fail(std::string("expected ") + what + ", got '" + peek().text + "'");
    return advance();
  }

  std::string expect_name(const char* what) {
    if (peek().type != Token::Type::Name)
      fail(std::string("expected ") + what + ", got '" +
           (peek().type == Token::Type::End ? "end of line" : peek().text) + "'");
    return advance().text;
  }

  Axiom parse_gci() {
    ConceptExpr lhs = parse_conjunction();
    expect(Token::Type::SubClassOf, "'SubClassOf'");
    ConceptExpr rhs = parse_conjunction();
    return gci(std::move(lhs), std::move(rhs));
  }

  Axiom parse_role_axiom() {
    std::string first = expect_name("role name");
    if (peek().type == Token::Type::O) {
      advance();
      std::string second = expect_name("role name");
      expect(Token::Type::SubPropertyOf, "'SubPropertyOf'");
      std::string sup = expect_name("role name");
      return role_chain({std::move(first), std::move(second)}, std::move(sup));
    }
    expect(Token::Type::SubPropertyOf, "'SubPropertyOf'");
    std::string sup = expect_name("role name");
    return role_inclusion(std::move(first), std::move(sup));
  }

  Axiom parse_assertion() {
    std::string head = expect_name("concept or role name");
    expect(Token::Type::LParen, "'('");
    std::string first = expect_name("individual name");
    if (peek().type == Token::Type::Comma) {
      advance();
      std::string second = expect_name("individual name");
      expect(Token::Type::RParen, "')'");
      return role_assertion(std::move(head), std::move(first), std::move(second));
    }
    expect(Token::Type::RParen, "')'");
    return concept_assertion(std::move(head), std::move(first));
  }

  ConceptExpr parse_conjunction() {
    std::vector<ConceptExpr> members;
    members.push_back(parse_unit());
    while (peek().type == Token::Type::And) {
      advance();
      members.push_back(parse_unit());
    }
    return conjunction(std::move(members));
  }

  ConceptExpr parse_unit() {
    switch (peek().type) {
      case Token::Type::Thing:
        advance();
        return top();
      case Token::Type::Nothing:
        advance();
        return bottom();
      case Token::Type::LBrace: {
        advance();
        std::string ind = expect_name("individual name");
        expect(Token::Type::RBrace, "'}'");
        return nominal(std::move(ind));
      }
      case Token::Type::LParen: {
        advance();
        ConceptExpr inner = parse_conjunction();
        expect(Token::Type::RParen, "')'");
        return inner;
      }
      case Token::Type::Name: {
        std::string name = advance().text;
        if (peek().type == Token::Type::Some) {
          advance();
          return exists(std::move(name), parse_unit());
        }
        return atomic(std::move(name));
      }
      default:
        fail("expected a concept, got '" +
             (peek().type == Token::Type::End ? "end of line" : peek().text) + "'");
    }
  }

  std::vector<Token> tokens_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

void add_axiom(Ontology& o, Axiom ax) {
  record_axiom_names(o, ax, 0, 0);
  if (std::find(o.axioms.begin(), o.axioms.end(), ax) == o.axioms.end())
    o.axioms.push_back(std::move(ax));
}

Ontology parse_ontology(const std::string& text) {
  Ontology o;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::vector<Token> tokens = lex_line(line, line_no);
    if (tokens.size() == 1) continue;  // blank or comment-only
    Axiom ax = LineParser(std::move(tokens), line_no).parse_axiom();
    record_axiom_names(o, ax, line_no, 1);
    if (std::find(o.axioms.begin(), o.axioms.end(), ax) == o.axioms.end())
      o.axioms.push_back(std::move(ax));
  }
  return o;
}

Ontology parse_ontology_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open ontology file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ontology(buf.str());
}

namespace {

// Units bind tighter than 'and'; a conjunction filler therefore needs parens.
void serialize_unit(const ConceptExpr& c, std::string& out) {
  switch (c.kind) {
    case ConceptExpr::Kind::Top: out += "Thing"; return;
    case ConceptExpr::Kind::Bottom: out += "Nothing"; return;
    case ConceptExpr::Kind::Atomic: out += c.name; return;
    case ConceptExpr::Kind::Nominal:
      out += '{';
      out += c.name;
      out += '}';
      return;
    case ConceptExpr::Kind::Conjunction:
      out += '(';
      out += serialize(c);
      out += ')';
      return;
    case ConceptExpr::Kind::Exists:
    case ConceptExpr::Kind::ExistsAll:
      out += c.name;
      out += c.kind == ConceptExpr::Kind::Exists ? " some " : " someAll ";
      serialize_unit(c.children[0], out);
      return;
  }
}

}  // namespace

std::string serialize(const ConceptExpr& c) {
  if (c.kind == ConceptExpr::Kind::Conjunction) {
    std::string out;
    for (std::size_t i = 0; i < c.children.size(); ++i) {
      if (i) out += " and ";
      serialize_unit(c.children[i], out);
    }
    return out;
  }
  std::string out;
  serialize_unit(c, out);
  return out;
}

std::string serialize(const Axiom& ax) {
  switch (ax.kind) {
    case Axiom::Kind::GCI:
      return serialize(ax.lhs) + " SubClassOf " + serialize(ax.rhs);
    case Axiom::Kind::RoleInclusion:
      return ax.sub_role + " SubPropertyOf " + ax.sup_role;
    case Axiom::Kind::RoleChain: {
      std::string out;
      for (std::size_t i = 0; i < ax.chain.size(); ++i) {
        if (i) out += " o ";
        out += ax.chain[i];
      }
      return out + " SubPropertyOf " + ax.sup_role;
    }
    case Axiom::Kind::ConceptAssertion:
      return ax.concept_name + "(" + ax.subject + ")";
    case Axiom::Kind::RoleAssertion:
      return ax.role_name + "(" + ax.subject + "," + ax.object + ")";
  }
  return {};
}

std::string serialize(const Ontology& o) {
  std::string out;
  for (const Axiom& ax : o.axioms) {
    out += serialize(ax);
    out += '\n';
  }
  return out;
}

namespace {

bool contains_exists_all(const ConceptExpr& c) {
  if (c.kind == ConceptExpr::Kind::ExistsAll) return true;
  for (const ConceptExpr& m : c.children)
    if (contains_exists_all(m)) return true;
  return false;
}

bool malformed_conjunction(const ConceptExpr& c) {
  if (c.kind == ConceptExpr::Kind::Conjunction) {
    if (c.children.size() < 2) return true;
    for (std::size_t i = 0; i < c.children.size(); ++i)
      for (std::size_t j = i + 1; j < c.children.size(); ++j)
        if (c.children[i] == c.children[j]) return true;
  }
  for (const ConceptExpr& m : c.children)
    if (malformed_conjunction(m)) return true;
  return false;
}

bool names_known(const Ontology& o, const ConceptExpr& c) {
  switch (c.kind) {
    case ConceptExpr::Kind::Atomic:
      return o.concepts.count(c.name) > 0;
    case ConceptExpr::Kind::Nominal:
      return o.individuals.count(c.name) > 0;
    case ConceptExpr::Kind::Exists:
    case ConceptExpr::Kind::ExistsAll:
      return o.roles.count(c.name) > 0 && names_known(o, c.children[0]);
    case ConceptExpr::Kind::Conjunction:
      for (const ConceptExpr& m : c.children)
        if (!names_known(o, m)) return false;
      return true;
    default:
      return true;
  }
}

}  // namespace

std::vector<std::string> validate_el(const Ontology& o) {
  std::vector<std::string> violations;
  for (const Axiom& ax : o.axioms) {
    std::string label = serialize(ax);
    if (ax.kind == Axiom::Kind::GCI) {
      if (contains_exists_all(ax.lhs) || contains_exists_all(ax.rhs)) {
        violations.push_back("axiom '" + label + "' uses the non-surface all-variant existential");
        continue;
      }
      if (malformed_conjunction(ax.lhs) || malformed_conjunction(ax.rhs)) {
        violations.push_back("axiom '" + label + "' has a malformed conjunction");
        continue;
      }
      if (!names_known(o, ax.lhs) || !names_known(o, ax.rhs))
        violations.push_back("axiom '" + label + "' names entities missing from the signature");
    } else if (ax.kind == Axiom::Kind::RoleChain && ax.chain.size() != 2) {
      violations.push_back("axiom '" + label + "' has a role chain of length " +
                           std::to_string(ax.chain.size()) + " (only 2 is supported)");
    }
  }
  return violations;
}

namespace {

ConceptExpr enhance_expr(const ConceptExpr& c) {
  switch (c.kind) {
    case ConceptExpr::Kind::Exists: {
      return exists_all(c.name, enhance_expr(c.children[0]));
    }
    case ConceptExpr::Kind::ExistsAll:
      return exists_all(c.name, enhance_expr(c.children[0]));
    case ConceptExpr::Kind::Conjunction: {
      std::vector<ConceptExpr> members;
      members.reserve(c.children.size());
      for (const ConceptExpr& m : c.children) members.push_back(enhance_expr(m));
      return conjunction(std::move(members));
    }
    default:
      return c;
  }
}

ConceptExpr erase_expr(const ConceptExpr& c) {
  switch (c.kind) {
    case ConceptExpr::Kind::ExistsAll:
    case ConceptExpr::Kind::Exists:
      return exists(c.name, erase_expr(c.children[0]));
    case ConceptExpr::Kind::Conjunction: {
      std::vector<ConceptExpr> members;
      members.reserve(c.children.size());
      for (const ConceptExpr& m : c.children) members.push_back(erase_expr(m));
      return conjunction(std::move(members));
    }
    default:
      return c;
  }
}

}  // namespace

Ontology semantic_enhance(const Ontology& o) {
  Ontology out = o;
  for (Axiom& ax : out.axioms)
    if (ax.kind == Axiom::Kind::GCI) ax.rhs = enhance_expr(ax.rhs);
  return out;
}

Ontology erase_enhancement(const Ontology& o) {
  Ontology out = o;
  for (Axiom& ax : out.axioms) {
    if (ax.kind == Axiom::Kind::GCI) {
      ax.lhs = erase_expr(ax.lhs);
      ax.rhs = erase_expr(ax.rhs);
    }
  }
  return out;
}

Ontology desugar_abox(const Ontology& o) {
  Ontology out;
  out.concepts = o.concepts;
  out.roles = o.roles;
  out.individuals = o.individuals;
  out.axioms.reserve(o.axioms.size());
  for (const Axiom& ax : o.axioms) {
    switch (ax.kind) {
      case Axiom::Kind::ConceptAssertion:
        out.axioms.push_back(gci(nominal(ax.subject), atomic(ax.concept_name)));
        break;
      case Axiom::Kind::RoleAssertion:
        out.axioms.push_back(gci(nominal(ax.subject), exists(ax.role_name, nominal(ax.object))));
        break;
      default:
        out.axioms.push_back(ax);
        break;
    }
  }
  return out;
}

std::size_t concept_length(const ConceptExpr& c) {
  switch (c.kind) {
    case ConceptExpr::Kind::Top:
    case ConceptExpr::Kind::Bottom:
      return 0;
    case ConceptExpr::Kind::Atomic:
    case ConceptExpr::Kind::Nominal:
      return 1;
    case ConceptExpr::Kind::Conjunction: {
      std::size_t total = 0;
      for (const ConceptExpr& m : c.children) total += concept_length(m);
      return total;
    }
    case ConceptExpr::Kind::Exists:
    case ConceptExpr::Kind::ExistsAll:
      return 1 + concept_length(c.children[0]);
  }
  return 0;
}

}  // namespace boxel
