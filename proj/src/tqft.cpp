#include "lk/tqft.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <sstream>

#include "lk/error.hpp"

namespace lk {

std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::Cup: return "cup";
    case Generator::Cap: return "cap";
    case Generator::PantsMerge: return "merge";
    case Generator::PantsSplit: return "split";
    case Generator::Cylinder: return "id";
    case Generator::Swap: return "swap";
  }
  return "?";
}

int source_arity(Generator g) {
  switch (g) {
    case Generator::Cap: return 0;
    case Generator::PantsMerge:
    case Generator::Swap: return 2;
    default: return 1;
  }
}

int target_arity(Generator g) {
  switch (g) {
    case Generator::Cup: return 0;
    case Generator::PantsSplit:
    case Generator::Swap: return 2;
    default: return 1;
  }
}

namespace {

std::string trim_lower(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  std::string out(s.substr(a, b - a));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Generator parse_generator(const std::string& name) {
  static const std::map<std::string, Generator> names{
      {"cup", Generator::Cup},          {"cap", Generator::Cap},
      {"merge", Generator::PantsMerge}, {"pantsmerge", Generator::PantsMerge},
      {"pants-merge", Generator::PantsMerge}, {"split", Generator::PantsSplit},
      {"pantssplit", Generator::PantsSplit},  {"pants-split", Generator::PantsSplit},
      {"id", Generator::Cylinder},      {"cylinder", Generator::Cylinder},
      {"swap", Generator::Swap}};
  auto it = names.find(name);
  if (it == names.end()) throw Error(ErrorCode::ParseError, "unknown generator '" + name + "'");
  return it->second;
}

int layer_source(const CobLayer& l) {
  int s = 0;
  for (auto g : l) s += source_arity(g);
  return s;
}

int layer_target(const CobLayer& l) {
  int s = 0;
  for (auto g : l) s += target_arity(g);
  return s;
}

std::string positions(const std::vector<int>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out + "]";
}

}  // namespace

CobWord parse_word(std::string_view text) {
  if (trim_lower(text).empty()) throw Error(ErrorCode::ParseError, "empty word");
  CobWord w;
  for (auto layer_text : split(text, ';')) {
    CobLayer layer;
    if (!trim_lower(layer_text).empty()) {
      for (auto g : split(layer_text, ',')) layer.push_back(parse_generator(trim_lower(g)));
    }
    w.push_back(std::move(layer));
  }
  return w;
}

std::string format_word(const CobWord& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ';';
    for (std::size_t j = 0; j < w[i].size(); ++j) {
      if (j) out += ',';
      out += to_string(w[i][j]);
    }
  }
  return out;
}

bool CobClass::operator==(const CobClass& o) const {
  const auto a = canonical(*this), b = canonical(o);
  if (a.source != b.source || a.target != b.target || a.components.size() != b.components.size()) return false;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    const auto &x = a.components[i], &y = b.components[i];
    if (x.g != y.g || x.inputs != y.inputs || x.outputs != y.outputs) return false;
  }
  return true;
}

CobClass canonical(CobClass c) {
  std::vector<int> seen_in(c.source, 0), seen_out(c.target, 0);
  for (auto& comp : c.components) {
    std::sort(comp.inputs.begin(), comp.inputs.end());
    std::sort(comp.outputs.begin(), comp.outputs.end());
    for (int i : comp.inputs) {
      if (i < 0 || i >= c.source) throw Error(ErrorCode::ArityMismatch, "input position " + std::to_string(i) + " out of range");
      ++seen_in[i];
    }
    for (int i : comp.outputs) {
      if (i < 0 || i >= c.target) throw Error(ErrorCode::ArityMismatch, "output position " + std::to_string(i) + " out of range");
      ++seen_out[i];
    }
  }
  auto once = [](const std::vector<int>& v) { return std::all_of(v.begin(), v.end(), [](int k) { return k == 1; }); };
  if (!once(seen_in) || !once(seen_out)) throw Error(ErrorCode::ArityMismatch, "every circle must bound exactly one component");
  std::sort(c.components.begin(), c.components.end(), [](const CobComponent& a, const CobComponent& b) {
    return std::tie(a.inputs, a.outputs, a.g) < std::tie(b.inputs, b.outputs, b.g);
  });
  // closed components have empty wiring and sort first; move them last
  std::stable_partition(c.components.begin(), c.components.end(), [](const CobComponent& x) { return !x.closed(); });
  return c;
}

std::string describe(const CobClass& c) {
  std::ostringstream os;
  os << c.source << " -> " << c.target << ":";
  for (const auto& comp : canonical(c).components) {
    os << " (" << comp.g << "," << comp.m() << "," << comp.n() << ")";
    if (comp.closed())
      os << "closed";
    else
      os << positions(comp.inputs) << "->" << positions(comp.outputs);
  }
  return os.str();
}

CobClass generator_class(Generator g) {
  switch (g) {
    case Generator::Cup: return {1, 0, {{0, {0}, {}}}};
    case Generator::Cap: return {0, 1, {{0, {}, {0}}}};
    case Generator::PantsMerge: return {2, 1, {{0, {0, 1}, {0}}}};
    case Generator::PantsSplit: return {1, 2, {{0, {0}, {0, 1}}}};
    case Generator::Cylinder: return identity_class(1);
    case Generator::Swap: return {2, 2, {{0, {0}, {1}}, {0, {1}, {0}}}};
  }
  return {};
}

CobClass identity_class(int circles) {
  CobClass c{circles, circles, {}};
  for (int i = 0; i < circles; ++i) c.components.push_back({0, {i}, {i}});
  return c;
}

CobClass compose(const CobClass& c1, const CobClass& c2) {
  if (c1.target != c2.source) {
    throw Error(ErrorCode::ArityMismatch, "cannot glue " + std::to_string(c1.target) + " outgoing circles to " +
                                              std::to_string(c2.source) + " incoming circles");
  }
  const std::size_t n1 = c1.components.size();
  const std::size_t n = n1 + c2.components.size();
  std::vector<int> out_owner(c1.target), in_owner(c2.source);
  for (std::size_t k = 0; k < n1; ++k)
    for (int i : c1.components[k].outputs) out_owner[i] = static_cast<int>(k);
  for (std::size_t k = 0; k < c2.components.size(); ++k)
    for (int i : c2.components[k].inputs) in_owner[i] = static_cast<int>(n1 + k);

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < c1.target; ++i) {
    const auto a = find(out_owner[i]), b = find(in_owner[i]);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, CobComponent> merged;
  std::map<std::size_t, long> members, gluings;
  for (std::size_t k = 0; k < n; ++k) {
    const auto r = find(k);
    auto& comp = merged[r];
    ++members[r];
    if (k < n1) {
      comp.g += c1.components[k].g;
      comp.inputs.insert(comp.inputs.end(), c1.components[k].inputs.begin(), c1.components[k].inputs.end());
    } else {
      comp.g += c2.components[k - n1].g;
      comp.outputs.insert(comp.outputs.end(), c2.components[k - n1].outputs.begin(), c2.components[k - n1].outputs.end());
    }
  }
  for (int i = 0; i < c1.target; ++i) ++gluings[find(out_owner[i])];
  CobClass out{c1.source, c2.target, {}};
  for (auto& [r, comp] : merged) {
    comp.g += gluings[r] - (members[r] - 1);
    out.components.push_back(std::move(comp));
  }
  return canonical(std::move(out));
}

CobClass tensor(const CobClass& c1, const CobClass& c2) {
  CobClass out = c1;
  out.source += c2.source;
  out.target += c2.target;
  for (auto comp : c2.components) {
    for (auto& i : comp.inputs) i += c1.source;
    for (auto& i : comp.outputs) i += c1.target;
    out.components.push_back(std::move(comp));
  }
  return canonical(std::move(out));
}

CobClass evaluate(const CobWord& w) {
  CobClass acc = identity_class(w.empty() ? 0 : layer_source(w.front()));
  for (std::size_t i = 0; i < w.size(); ++i) {
    CobClass layer{0, 0, {}};
    for (auto g : w[i]) layer = tensor(layer, generator_class(g));
    if (layer.source != acc.target) {
      throw Error(ErrorCode::ArityMismatch, "layer " + std::to_string(i + 1) + " takes " +
                                                std::to_string(layer.source) + " circles, previous layer gives " +
                                                std::to_string(acc.target));
    }
    acc = compose(acc, layer);
  }
  return acc;
}

CobClass thicken(const Quiver& q) {
  const auto [label, count] = component_labels(q);
  const auto inv = invariants(q);
  CobClass c{0, 0, std::vector<CobComponent>(count)};
  for (std::size_t k = 0; k < count; ++k) c.components[k].g = inv[k].g;
  for (auto v : q.boundary_in()) c.components[label[v]].inputs.push_back(c.source++);
  for (auto v : q.boundary_out()) c.components[label[v]].outputs.push_back(c.target++);
  return canonical(std::move(c));
}

Quiver quiver_for(const CobClass& c) {
  std::vector<std::string> vs;
  std::vector<EdgeDef> es;
  const auto cc = canonical(c);
  for (std::size_t k = 0; k < cc.components.size(); ++k) {
    const auto& comp = cc.components[k];
    if (comp.closed() && comp.g == 0) throw Error(ErrorCode::ClosedComponent, "a sphere has no quiver realization");
    if (comp.g == 0 && comp.m() + comp.n() == 1) {
      throw Error(ErrorCode::NotInteriorVertex, "a disk has no quiver realization");
    }
    const std::string center = "c" + std::to_string(k);
    vs.push_back(center);
    for (int i : comp.inputs) {
      vs.push_back("in" + std::to_string(i));
      es.push_back({"a" + std::to_string(i), "in" + std::to_string(i), center});
    }
    for (int i : comp.outputs) {
      vs.push_back("out" + std::to_string(i));
      es.push_back({"b" + std::to_string(i), center, "out" + std::to_string(i)});
    }
    for (long j = 0; j < comp.g; ++j) es.push_back({"l" + std::to_string(k) + "_" + std::to_string(j), center, center});
  }
  return Quiver::create(vs, es);
}

long HamDescription::total_dimension() const {
  long s = 0;
  for (const auto& c : components)
    if (c.kind != HamComponent::Kind::FormalSequence) s += c.dimension;
  return s;
}

bool HamDescription::has_formal_sequence() const {
  return std::any_of(components.begin(), components.end(),
                     [](const HamComponent& c) { return c.kind == HamComponent::Kind::FormalSequence; });
}

std::string_view to_string(HamComponent::Kind k) {
  switch (k) {
    case HamComponent::Kind::ModuliSpace: return "moduli-space";
    case HamComponent::Kind::Point: return "point";
    case HamComponent::Kind::FormalSequence: return "formal-sequence";
  }
  return "?";
}

long ham_dimension(long g, long m, long n, const LieGroup& G) { return 2 * (g + m + n - 1) * G.dim(); }

HamDescription ham_description(const CobClass& c, const LieGroup& G) {
  HamDescription out;
  for (const auto& comp : canonical(c).components) {
    HamComponent h;
    if (comp.closed()) {
      h.kind = HamComponent::Kind::FormalSequence;
      h.sequence = {CobClass{0, 1, {{comp.g, {}, {0}}}}, generator_class(Generator::Cup)};
    } else if (comp.g == 0 && comp.m() + comp.n() == 1) {
      h.kind = HamComponent::Kind::Point;
    } else {
      h.kind = HamComponent::Kind::ModuliSpace;
      h.dimension = ham_dimension(comp.g, comp.m(), comp.n(), G);
      h.octopus = OctopusForm{comp.g, comp.m(), comp.n(), octopus(comp.g, comp.m(), comp.n())};
    }
    out.components.push_back(std::move(h));
  }
  return out;
}

long reduced_dimension(const CobWord& w, const LieGroup& G) {
  long total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (auto g : w[i]) total += ham_description(generator_class(g), G).total_dimension();
    if (i + 1 < w.size()) total -= 2L * layer_target(w[i]) * G.dim();
  }
  return total;
}

std::vector<Relation> cob_relations() {
  auto r = [](std::string name, std::string_view lhs, std::string_view rhs) {
    return Relation{std::move(name), parse_word(lhs), parse_word(rhs)};
  };
  return {
      r("left unit", "cap,id;merge", "id"),
      r("right unit", "id,cap;merge", "id"),
      r("left counit", "split;cup,id", "id"),
      r("right counit", "split;id,cup", "id"),
      r("associativity", "merge,id;merge", "id,merge;merge"),
      r("coassociativity", "split;split,id", "split;id,split"),
      r("Frobenius (left)", "split,id;id,merge", "merge;split"),
      r("Frobenius (right)", "id,split;merge,id", "merge;split"),
      r("commutativity", "swap;merge", "merge"),
      r("cocommutativity", "split;swap", "split"),
      r("swap involution", "swap;swap", "id,id"),
      r("braid", "swap,id;id,swap;swap,id", "id,swap;swap,id;id,swap"),
      r("swap naturality: merge", "merge,id;swap", "id,swap;swap,id;id,merge"),
      r("swap naturality: split", "split,id;id,swap;swap,id", "swap;id,split"),
      r("swap naturality: cap", "cap,id;swap", "id,cap"),
      r("swap naturality: cup", "cup,id", "swap;id,cup"),
      r("swap naturality: id", "id,id;swap", "swap;id,id"),
  };
}

std::vector<RelationCheck> check_relations(const LieGroup& G) {
  std::vector<RelationCheck> out;
  for (auto& rel : cob_relations()) {
    RelationCheck c;
    c.lhs = evaluate(rel.lhs);
    c.rhs = evaluate(rel.rhs);
    c.classes_equal = c.lhs == c.rhs;
    const auto hl = ham_description(c.lhs, G), hr = ham_description(c.rhs, G);
    c.lhs_dimension = hl.total_dimension();
    c.rhs_dimension = hr.total_dimension();
    c.dimensions_consistent = !hl.has_formal_sequence() && !hr.has_formal_sequence() &&
                              c.lhs_dimension == c.rhs_dimension &&
                              c.lhs_dimension == reduced_dimension(rel.lhs, G) &&
                              c.rhs_dimension == reduced_dimension(rel.rhs, G);
    c.relation = std::move(rel);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace lk
