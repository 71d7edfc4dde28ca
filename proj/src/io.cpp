#include "lk/io.hpp"

#include <fstream>
#include <sstream>

namespace lk {

namespace {

constexpr double kMembershipTol = 1e-8;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing key '") + key + "'");
  return j.at(key);
}

std::string string_field(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) bad(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

LieGroup group_field(const Json& j) { return LieGroup::from_name(string_field(j, "group")); }

const Json& edge_entry(const Json& edges, const std::string& id) {
  if (!edges.is_object() || !edges.contains(id)) bad("no data for edge '" + id + "'");
  return edges.at(id);
}

void check_edge_keys(const Quiver& q, const Json& edges) {
  if (!edges.is_object()) bad("'edges' must be an object keyed by edge id");
  for (auto it = edges.begin(); it != edges.end(); ++it)
    if (!q.find_edge(it.key())) throw Error(ErrorCode::UnknownId, "data for unknown edge '" + it.key() + "'");
}

}  // namespace

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || j.size() > 3) bad("matrix must be an array of 1 to 3 rows");
  const auto n = j.size();
  Mat m(static_cast<int>(n), static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) bad("matrix must be square");
    for (std::size_t k = 0; k < n; ++k) {
      const auto& z = j[i][k];
      if (z.is_number()) {
        m(static_cast<int>(i), static_cast<int>(k)) = Complex(z.get<double>(), 0.0);
      } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
        m(static_cast<int>(i), static_cast<int>(k)) = Complex(z[0].get<double>(), z[1].get<double>());
      } else {
        bad("matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

AlgebraElement algebra_from_json(const LieGroup& G, const Json& j) {
  const Mat m = matrix_from_json(j);
  G.check(m);
  if (G.algebra_defect(m) > kMembershipTol) {
    throw Error(ErrorCode::SpecMismatch, "matrix is not in the Lie algebra of " + std::string(G.name()));
  }
  return G.project_to_algebra(m);
}

GroupElement group_from_json(const LieGroup& G, const Json& j) {
  const Mat m = matrix_from_json(j);
  G.check(m);
  if (G.group_defect(m) > kMembershipTol) {
    throw Error(ErrorCode::SpecMismatch, "matrix is not in " + std::string(G.name()));
  }
  return {m};
}

Json quiver_to_json(const Quiver& q) {
  Json j;
  j["vertices"] = q.vertex_ids();
  Json edges = Json::array();
  for (const auto& e : q.edge_defs()) edges.push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}});
  j["edges"] = std::move(edges);
  return j;
}

Quiver quiver_from_json(const Json& j) {
  const auto& vs = field(j, "vertices");
  const auto& es = field(j, "edges");
  if (!vs.is_array() || !es.is_array()) bad("'vertices' and 'edges' must be arrays");
  std::vector<std::string> vertices;
  for (const auto& v : vs) {
    if (!v.is_string()) bad("vertex ids must be strings");
    vertices.push_back(v.get<std::string>());
  }
  std::vector<EdgeDef> edges;
  for (const auto& e : es) edges.push_back({string_field(e, "id"), string_field(e, "src"), string_field(e, "dst")});
  return Quiver::create(std::move(vertices), std::move(edges));
}

Json point_to_json(const Quiver& q, const CotangentPoint& p) {
  Json j;
  j["group"] = std::string(p.group.name());
  Json edges = Json::object();
  for (std::size_t e = 0; e < q.edge_count(); ++e)
    edges[q.edge_id(e)] = {{"a", matrix_to_json(p.a[e].m)}, {"x", matrix_to_json(p.x[e].m)}};
  j["edges"] = std::move(edges);
  return j;
}

CotangentPoint point_from_json(const Quiver& q, const Json& j) {
  const auto G = group_field(j);
  const auto& edges = field(j, "edges");
  check_edge_keys(q, edges);
  CotangentPoint p = CotangentPoint::trivial(G, q.edge_count());
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto& entry = edge_entry(edges, q.edge_id(e));
    p.a[e] = group_from_json(G, field(entry, "a"));
    p.x[e] = algebra_from_json(G, field(entry, "x"));
  }
  return p;
}

Json field_to_json(const Quiver& q, const EdgeField& A) {
  Json j;
  j["group"] = std::string(A.group.name());
  j["grid"] = A.N;
  Json edges = Json::object();
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    Json a0 = Json::array(), a1 = Json::array();
    for (const auto& x : A.A0[e]) a0.push_back(matrix_to_json(x.m));
    for (const auto& x : A.A1[e]) a1.push_back(matrix_to_json(x.m));
    edges[q.edge_id(e)] = {{"A0", std::move(a0)}, {"A1", std::move(a1)}};
  }
  j["edges"] = std::move(edges);
  return j;
}

EdgeField field_from_json(const Quiver& q, const Json& j) {
  const auto G = group_field(j);
  const auto& grid = field(j, "grid");
  if (!grid.is_number_integer()) bad("'grid' must be an integer");
  const int N = grid.get<int>();
  EdgeField A = EdgeField::zero(G, N, q.edge_count());
  const auto& edges = field(j, "edges");
  check_edge_keys(q, edges);
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto& entry = edge_entry(edges, q.edge_id(e));
    for (const char* key : {"A0", "A1"}) {
      const auto& samples = field(entry, key);
      if (!samples.is_array() || static_cast<int>(samples.size()) != N + 1) {
        throw Error(ErrorCode::ShapeMismatch, "edge '" + q.edge_id(e) + "' " + key + " needs " + std::to_string(N + 1) +
                                                  " samples");
      }
      auto& path = std::string(key) == "A0" ? A.A0[e] : A.A1[e];
      for (int k = 0; k <= N; ++k) path[k] = algebra_from_json(G, samples[k]);
    }
  }
  return A;
}

Json word_to_json(const CobWord& w) {
  Json layers = Json::array();
  for (const auto& l : w) {
    Json layer = Json::array();
    for (auto g : l) layer.push_back(std::string(to_string(g)));
    layers.push_back(std::move(layer));
  }
  return {{"layers", std::move(layers)}};
}

CobWord word_from_json(const Json& j) {
  const auto& layers = field(j, "layers");
  if (!layers.is_array() || layers.empty()) bad("'layers' must be a non-empty array");
  std::string text;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!layers[i].is_array()) bad("each layer must be an array of generator names");
    if (i) text += ';';
    for (std::size_t k = 0; k < layers[i].size(); ++k) {
      if (!layers[i][k].is_string()) bad("generator names must be strings");
      const auto name = layers[i][k].get<std::string>();
      if (name.find_first_of(",;") != std::string::npos) bad("invalid generator name '" + name + "'");
      if (k) text += ',';
      text += name;
    }
  }
  return parse_word(text);
}

Json cob_class_to_json(const CobClass& c) {
  Json comps = Json::array();
  for (const auto& k : canonical(c).components) {
    comps.push_back({{"g", k.g}, {"m", k.m()}, {"n", k.n()}, {"inputs", k.inputs}, {"outputs", k.outputs},
                     {"closed", k.closed()}});
  }
  return {{"source", c.source}, {"target", c.target}, {"components", std::move(comps)}};
}

Json ham_to_json(const HamDescription& h) {
  Json comps = Json::array();
  for (const auto& c : h.components) {
    Json j{{"kind", std::string(to_string(c.kind))}};
    if (c.kind != HamComponent::Kind::FormalSequence) j["dimension"] = c.dimension;
    if (c.octopus) {
      j["octopus"] = {{"g", c.octopus->g}, {"m", c.octopus->m}, {"n", c.octopus->n},
                      {"realization", quiver_to_json(c.octopus->realization)}};
    }
    if (!c.sequence.empty()) {
      Json seq = Json::array();
      for (const auto& s : c.sequence) seq.push_back(cob_class_to_json(s));
      j["sequence"] = std::move(seq);
    }
    comps.push_back(std::move(j));
  }
  return {{"components", std::move(comps)}, {"total_dimension", h.total_dimension()}};
}

Json algebra_map_to_json(const LieGroup& G, const VertexAlgebraData& d) {
  Json j = Json::object();
  for (const auto& [id, x] : d) j[id] = matrix_to_json(x.m);
  (void)G;
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    bad("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) bad("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace lk
