#include "boxel/model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "boxel/rng.hpp"

namespace boxel {

namespace {

constexpr char kMagic[8] = {'B', 'O', 'X', 'E', 'L', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

double& EmbeddingModel::param(std::size_t i) {
  std::size_t nc = concept_names.size() * dim;
  std::size_t nr = role_names.size() * dim;
  if (i < nc) return concept_center[i];
  i -= nc;
  if (i < nc) return concept_raw_offset[i];
  i -= nc;
  if (i < nr) return role_center[i];
  i -= nr;
  if (i < nr) return role_raw_offset[i];
  i -= nr;
  return individual_point[i];
}

double EmbeddingModel::param(std::size_t i) const {
  return const_cast<EmbeddingModel&>(*this).param(i);
}

EmbeddingModel init_model(const Ontology& o, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("init_model: dimension must be >= 1");
  if (o.concepts.empty() && o.roles.empty() && o.individuals.empty())
    throw std::invalid_argument("init_model: empty signature");
  EmbeddingModel m;
  m.dim = dim;
  m.concept_names.assign(o.concepts.begin(), o.concepts.end());
  m.role_names.assign(o.roles.begin(), o.roles.end());
  m.individual_names.assign(o.individuals.begin(), o.individuals.end());
  for (std::size_t i = 0; i < m.concept_names.size(); ++i) m.concept_index[m.concept_names[i]] = i;
  for (std::size_t i = 0; i < m.role_names.size(); ++i) m.role_index[m.role_names[i]] = i;
  for (std::size_t i = 0; i < m.individual_names.size(); ++i)
    m.individual_index[m.individual_names[i]] = i;

  m.concept_center.resize(m.concept_names.size() * dim);
  m.concept_raw_offset.resize(m.concept_names.size() * dim);
  m.role_center.resize(m.role_names.size() * dim);
  m.role_raw_offset.resize(m.role_names.size() * dim);
  m.individual_point.resize(m.individual_names.size() * dim);

  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < m.concept_names.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) m.concept_center[i * dim + j] = rng.uniform(-1.0, 1.0);
    for (std::size_t j = 0; j < dim; ++j) m.concept_raw_offset[i * dim + j] = rng.positive(0.5);
  }
  for (std::size_t i = 0; i < m.role_names.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) m.role_center[i * dim + j] = rng.uniform(-1.0, 1.0);
    for (std::size_t j = 0; j < dim; ++j) m.role_raw_offset[i * dim + j] = rng.positive(0.5);
  }
  for (std::size_t i = 0; i < m.individual_names.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j) m.individual_point[i * dim + j] = rng.uniform(-1.0, 1.0);
  return m;
}

ExtendedBox concept_box(const EmbeddingModel& m, std::size_t concept_idx) {
  std::vector<double> c(m.dim), o(m.dim);
  for (std::size_t j = 0; j < m.dim; ++j) {
    c[j] = m.concept_center[concept_idx * m.dim + j];
    o[j] = std::abs(m.concept_raw_offset[concept_idx * m.dim + j]);
  }
  return plain_box(std::move(c), std::move(o));
}

ExtendedBox role_box(const EmbeddingModel& m, std::size_t role_idx) {
  std::vector<double> c(m.dim), o(m.dim);
  for (std::size_t j = 0; j < m.dim; ++j) {
    c[j] = m.role_center[role_idx * m.dim + j];
    o[j] = std::abs(m.role_raw_offset[role_idx * m.dim + j]);
  }
  return plain_box(std::move(c), std::move(o));
}

namespace {

ExtendedBox individual_point_box(const EmbeddingModel& m, std::size_t idx) {
  std::vector<double> c(m.dim);
  for (std::size_t j = 0; j < m.dim; ++j) c[j] = m.individual_point[idx * m.dim + j];
  return point_box(std::move(c));
}

std::size_t lookup(const std::unordered_map<std::string, std::size_t>& index,
                   const std::string& name, const char* kind) {
  auto it = index.find(name);
  if (it == index.end())
    throw UnknownNameError(std::string("unknown ") + kind + " name: " + name);
  return it->second;
}

}  // namespace

ExtendedBox eval_concept_box(const ConceptExpr& c, const EmbeddingModel& m) {
  switch (c.kind) {
    case ConceptExpr::Kind::Top:
      return universal_box(m.dim);
    case ConceptExpr::Kind::Bottom:
      return empty_box(m.dim);
    case ConceptExpr::Kind::Atomic:
      return concept_box(m, lookup(m.concept_index, c.name, "concept"));
    case ConceptExpr::Kind::Nominal:
      return individual_point_box(m, lookup(m.individual_index, c.name, "individual"));
    case ConceptExpr::Kind::Conjunction: {
      ExtendedBox acc = eval_concept_box(c.children[0], m);
      for (std::size_t i = 1; i < c.children.size(); ++i)
        acc = intersect(acc, eval_concept_box(c.children[i], m));
      return acc;
    }
    case ConceptExpr::Kind::Exists:
      return exists_box(role_box(m, lookup(m.role_index, c.name, "role")),
                        eval_concept_box(c.children[0], m));
    case ConceptExpr::Kind::ExistsAll:
      return exists_all_box(role_box(m, lookup(m.role_index, c.name, "role")),
                            eval_concept_box(c.children[0], m));
  }
  throw std::logic_error("eval_concept_box: unreachable");
}

double axiom_residual(const Axiom& ax, const EmbeddingModel& m, Norm norm) {
  try {
    switch (ax.kind) {
      case Axiom::Kind::GCI:
        return inclusion_loss(eval_concept_box(ax.lhs, m), eval_concept_box(ax.rhs, m), 0.0, norm);
      case Axiom::Kind::RoleInclusion:
        return inclusion_loss(role_box(m, lookup(m.role_index, ax.sub_role, "role")),
                              role_box(m, lookup(m.role_index, ax.sup_role, "role")), 0.0, norm);
      case Axiom::Kind::RoleChain: {
        if (ax.chain.empty()) throw std::invalid_argument("axiom_residual: empty role chain");
        ExtendedBox acc = role_box(m, lookup(m.role_index, ax.chain[0], "role"));
        for (std::size_t i = 1; i < ax.chain.size(); ++i)
          acc = compose_roles(acc, role_box(m, lookup(m.role_index, ax.chain[i], "role")));
        return inclusion_loss(acc, role_box(m, lookup(m.role_index, ax.sup_role, "role")), 0.0,
                              norm);
      }
      case Axiom::Kind::ConceptAssertion:
        return inclusion_loss(
            individual_point_box(m, lookup(m.individual_index, ax.subject, "individual")),
            concept_box(m, lookup(m.concept_index, ax.concept_name, "concept")), 0.0, norm);
      case Axiom::Kind::RoleAssertion: {
        ExtendedBox subject =
            individual_point_box(m, lookup(m.individual_index, ax.subject, "individual"));
        ExtendedBox target =
            exists_box(role_box(m, lookup(m.role_index, ax.role_name, "role")),
                       individual_point_box(m, lookup(m.individual_index, ax.object, "individual")));
        return inclusion_loss(subject, target, 0.0, norm);
      }
    }
  } catch (const BoxOperationError&) {
    // A side that fails to evaluate marks the axiom unsatisfied.
    return std::numeric_limits<double>::infinity();
  }
  throw std::logic_error("axiom_residual: unreachable");
}

bool check_axiom(const Axiom& ax, const EmbeddingModel& m, double tol, Norm norm) {
  return axiom_residual(ax, m, norm) <= tol;
}

SoundnessReport soundness_report(const Ontology& o, const EmbeddingModel& m, double tol,
                                 Norm norm) {
  SoundnessReport report;
  report.entries.reserve(o.axioms.size());
  for (const Axiom& ax : o.axioms) {
    SoundnessReport::Entry entry;
    entry.axiom = ax;
    entry.residual = axiom_residual(ax, m, norm);
    entry.satisfied = entry.residual <= tol;
    if (!entry.satisfied) {
      ++report.violated;
      report.sound = false;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  }

  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }

  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }

  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("checkpoint write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open checkpoint: " + path);
  }

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw std::runtime_error("checkpoint truncated");
  }

  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string str() {
    std::uint32_t n = u32();
    if (n > (1u << 20)) throw std::runtime_error("checkpoint name table entry too large");
    std::string s(n, '\0');
    if (n) bytes(s.data(), n);
    return s;
  }

 private:
  std::ifstream in_;
};

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  const EmbeddingModel& m = ck.model;
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  w.u64(m.dim);
  w.u64(m.concept_names.size());
  w.u64(m.role_names.size());
  w.u64(m.individual_names.size());
  for (const std::string& s : m.concept_names) w.str(s);
  for (const std::string& s : m.role_names) w.str(s);
  for (const std::string& s : m.individual_names) w.str(s);
  for (double v : m.concept_center) w.f64(v);
  for (double v : m.concept_raw_offset) w.f64(v);
  // Third array: role centers and raw offsets, contiguous.
  for (double v : m.role_center) w.f64(v);
  for (double v : m.role_raw_offset) w.f64(v);
  for (double v : m.individual_point) w.f64(v);
  w.u64(ck.epoch);
  w.f64(ck.final_loss);
  w.u64(ck.seed);
  w.str(ck.config_digest);
  w.finish();
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  EmbeddingModel& m = ck.model;
  m.dim = r.u64();
  std::uint64_t nc = r.u64(), nr = r.u64(), ni = r.u64();
  m.concept_names.resize(nc);
  m.role_names.resize(nr);
  m.individual_names.resize(ni);
  for (std::string& s : m.concept_names) s = r.str();
  for (std::string& s : m.role_names) s = r.str();
  for (std::string& s : m.individual_names) s = r.str();
  for (std::size_t i = 0; i < nc; ++i) m.concept_index[m.concept_names[i]] = i;
  for (std::size_t i = 0; i < nr; ++i) m.role_index[m.role_names[i]] = i;
  for (std::size_t i = 0; i < ni; ++i) m.individual_index[m.individual_names[i]] = i;
  m.concept_center.resize(nc * m.dim);
  m.concept_raw_offset.resize(nc * m.dim);
  m.role_center.resize(nr * m.dim);
  m.role_raw_offset.resize(nr * m.dim);
  m.individual_point.resize(ni * m.dim);
  for (double& v : m.concept_center) v = r.f64();
  for (double& v : m.concept_raw_offset) v = r.f64();
  for (double& v : m.role_center) v = r.f64();
  for (double& v : m.role_raw_offset) v = r.f64();
  for (double& v : m.individual_point) v = r.f64();
  ck.epoch = r.u64();
  ck.final_loss = r.f64();
  ck.seed = r.u64();
  ck.config_digest = r.str();
  return ck;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void append_entity_line(std::string& out, const std::string& name, const char* kind,
                        const double* center, const double* raw_offset, std::size_t dim) {
  out += name;
  out += ' ';
  out += kind;
  for (std::size_t j = 0; j < dim; ++j) {
    out += ' ';
    append_double(out, center[j]);
  }
  for (std::size_t j = 0; j < dim; ++j) {
    out += ' ';
    append_double(out, raw_offset ? std::abs(raw_offset[j]) : 0.0);
  }
  out += '\n';
}

}  // namespace

std::string export_text(const EmbeddingModel& m) {
  std::string out;
  for (std::size_t i = 0; i < m.concept_names.size(); ++i)
    append_entity_line(out, m.concept_names[i], "concept", &m.concept_center[i * m.dim],
                       &m.concept_raw_offset[i * m.dim], m.dim);
  for (std::size_t i = 0; i < m.role_names.size(); ++i)
    append_entity_line(out, m.role_names[i], "role", &m.role_center[i * m.dim],
                       &m.role_raw_offset[i * m.dim], m.dim);
  for (std::size_t i = 0; i < m.individual_names.size(); ++i)
    append_entity_line(out, m.individual_names[i], "individual",
                       &m.individual_point[i * m.dim], nullptr, m.dim);
  return out;
}

}  // namespace boxel
