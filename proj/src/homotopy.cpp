#include "lk/homotopy.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lk {

Move Move::contract(std::string edge, std::string keep) {
  Move mv;
  mv.kind = Kind::Contract;
  mv.edge = std::move(edge);
  mv.vertex = std::move(keep);
  return mv;
}

Move Move::split(std::string vertex, std::vector<HalfEdge> moved, std::string new_vertex, std::string new_edge,
                 bool outward) {
  Move mv;
  mv.kind = Kind::Split;
  mv.vertex = std::move(vertex);
  mv.moved = std::move(moved);
  mv.new_vertex = std::move(new_vertex);
  mv.edge = std::move(new_edge);
  mv.outward = outward;
  return mv;
}

std::string describe(const Move& mv) {
  if (mv.kind == Move::Kind::Contract) {
    return "contract " + mv.edge + (mv.vertex.empty() ? "" : " into " + mv.vertex);
  }
  std::string s = "split " + mv.vertex + " {";
  for (std::size_t i = 0; i < mv.moved.size(); ++i) {
    if (i) s += ",";
    s += mv.moved[i].edge + (mv.moved[i].at_dst ? ".dst" : ".src");
  }
  s += "} -> " + mv.new_vertex + " via " + mv.edge + (mv.outward ? " (out)" : " (in)");
  return s;
}

std::vector<HalfEdge> half_edges(const Quiver& q, std::size_t v) {
  std::vector<HalfEdge> out;
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    if (q.edge(e).src == v) out.push_back({q.edge_id(e), false});
    if (q.edge(e).dst == v) out.push_back({q.edge_id(e), true});
  }
  return out;
}

namespace {

MoveResult apply_contract(const Quiver& q, const Move& mv) {
  const auto e = q.edge_index(mv.edge);
  const auto& ed = q.edge(e);
  if (ed.is_loop()) throw Error(ErrorCode::LoopEdge, "cannot contract loop '" + mv.edge + "'");
  if (!q.is_interior(ed.src) || !q.is_interior(ed.dst)) {
    throw Error(ErrorCode::NotInteriorEdge, "edge '" + mv.edge + "' touches the boundary");
  }
  std::size_t keep = ed.src;
  if (!mv.vertex.empty()) {
    keep = q.vertex_index(mv.vertex);
    if (keep != ed.src && keep != ed.dst) {
      throw Error(ErrorCode::UnknownId, "'" + mv.vertex + "' is not an endpoint of '" + mv.edge + "'");
    }
  }
  const std::size_t gone = keep == ed.src ? ed.dst : ed.src;
  const std::string& keep_id = q.vertex_id(keep);
  const std::string& gone_id = q.vertex_id(gone);

  std::vector<HalfEdge> moved;
  for (const auto& h : half_edges(q, gone))
    if (h.edge != mv.edge) moved.push_back(h);

  std::vector<std::string> vertices;
  for (const auto& id : q.vertex_ids())
    if (id != gone_id) vertices.push_back(id);
  std::vector<EdgeDef> edges;
  for (auto d : q.edge_defs()) {
    if (d.id == mv.edge) continue;
    if (d.src == gone_id) d.src = keep_id;
    if (d.dst == gone_id) d.dst = keep_id;
    edges.push_back(std::move(d));
  }
  return {Quiver::create(std::move(vertices), std::move(edges)),
          Move::split(keep_id, std::move(moved), gone_id, mv.edge, keep == ed.src)};
}

MoveResult apply_split(const Quiver& q, const Move& mv) {
  const auto v = q.vertex_index(mv.vertex);
  if (!q.is_interior(v)) throw Error(ErrorCode::NotInteriorVertex, "vertex '" + mv.vertex + "' is not interior");
  const auto all = half_edges(q, v);
  if (mv.moved.empty() || mv.moved.size() >= all.size()) {
    throw Error(ErrorCode::EmptyPartitionCell, "split of '" + mv.vertex + "' leaves an empty cell");
  }
  std::set<std::pair<std::string, bool>> seen;
  for (const auto& h : mv.moved) {
    if (std::find(all.begin(), all.end(), h) == all.end()) {
      throw Error(ErrorCode::UnknownId, "half-edge " + h.edge + (h.at_dst ? ".dst" : ".src") + " is not at '" +
                                            mv.vertex + "'");
    }
    if (!seen.insert({h.edge, h.at_dst}).second) {
      throw Error(ErrorCode::EmptyPartitionCell, "half-edge listed twice in split of '" + mv.vertex + "'");
    }
  }
  if (q.find_vertex(mv.new_vertex)) throw Error(ErrorCode::DuplicateId, "vertex '" + mv.new_vertex + "' exists");
  if (q.find_edge(mv.edge)) throw Error(ErrorCode::DuplicateId, "edge '" + mv.edge + "' exists");

  std::vector<std::string> vertices = q.vertex_ids();
  vertices.push_back(mv.new_vertex);
  std::vector<EdgeDef> edges;
  for (auto d : q.edge_defs()) {
    if (seen.count({d.id, false})) d.src = mv.new_vertex;
    if (seen.count({d.id, true})) d.dst = mv.new_vertex;
    edges.push_back(std::move(d));
  }
  if (mv.outward) {
    edges.push_back({mv.edge, mv.vertex, mv.new_vertex});
  } else {
    edges.push_back({mv.edge, mv.new_vertex, mv.vertex});
  }
  return {Quiver::create(std::move(vertices), std::move(edges)), Move::contract(mv.edge, mv.vertex)};
}

}  // namespace

MoveResult apply_move(const Quiver& q, const Move& mv) {
  return mv.kind == Move::Kind::Contract ? apply_contract(q, mv) : apply_split(q, mv);
}

std::vector<Move> flip_moves(const Quiver& q, const std::string& e) {
  const auto idx = q.edge_index(e);
  const auto& ed = q.edge(idx);
  if (!q.is_interior(ed.src) || !q.is_interior(ed.dst)) {
    throw Error(ErrorCode::BoundaryAdjacentEdge, "edge '" + e + "' is adjacent to the boundary");
  }
  const std::string u = q.vertex_id(ed.src);
  const std::string w = q.vertex_id(ed.dst);
  if (!ed.is_loop()) {
    std::vector<HalfEdge> at_w;
    for (const auto& h : half_edges(q, ed.dst))
      if (h.edge != e) at_w.push_back(h);
    return {Move::contract(e, u), Move::split(u, std::move(at_w), w, e, false)};
  }
  const std::string clone = fresh_id(u + "'", q.vertex_ids());
  const std::string aux = fresh_id(e + "'", q.edge_ids());
  return {
      Move::split(u, {{e, true}}, clone, aux, true),  // e: u -> clone, aux: u -> clone
      Move::contract(e, u),                           // aux becomes a loop at u
      Move::split(u, {{aux, true}}, clone, e, false),  // e: clone -> u, aux: u -> clone
      Move::contract(aux, u),
  };
}

Quiver flip_interior_edge(const Quiver& q, const std::string& e) {
  Quiver cur = q;
  for (const auto& mv : flip_moves(q, e)) cur = apply_move(cur, mv).quiver;
  return cur;
}

Quiver octopus(long g, long m, long n) {
  if (g < 0 || m < 0 || n < 0) throw Error(ErrorCode::UnknownId, "negative octopus parameter");
  if (m + n == 0) throw Error(ErrorCode::ClosedComponent, "octopus without legs is closed");
  if (g == 0 && m + n == 1) {
    throw Error(ErrorCode::NotInteriorVertex, "(0," + std::to_string(m) + "," + std::to_string(n) +
                                                  ") is a disk and has no quiver realization");
  }
  std::vector<std::string> vertices{"c"};
  std::vector<EdgeDef> edges;
  for (long i = 1; i <= m; ++i) {
    vertices.push_back("in" + std::to_string(i));
    edges.push_back({"a" + std::to_string(i), "in" + std::to_string(i), "c"});
  }
  for (long j = 1; j <= n; ++j) {
    vertices.push_back("out" + std::to_string(j));
    edges.push_back({"b" + std::to_string(j), "c", "out" + std::to_string(j)});
  }
  for (long k = 1; k <= g; ++k) edges.push_back({"l" + std::to_string(k), "c", "c"});
  return Quiver::create(std::move(vertices), std::move(edges));
}

namespace {

void require_open(const std::vector<ComponentInvariants>& inv) {
  for (const auto& c : inv) {
    if (c.m + c.n == 0) {
      throw Error(ErrorCode::ClosedComponent, "component containing '" + c.vertices.front() + "' has no boundary");
    }
  }
}

std::optional<std::size_t> contractible_edge(const Quiver& q) {
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto& ed = q.edge(e);
    if (!ed.is_loop() && q.is_interior(ed.src) && q.is_interior(ed.dst)) return e;
  }
  return std::nullopt;
}

}  // namespace

Normalization normalize(const Quiver& q) {
  const auto inv = invariants(q);
  require_open(inv);
  Normalization out;
  for (const auto& c : inv) {
    OctopusForm f{c.g, c.m, c.n, {}};
    f.realization = octopus(c.g, c.m, c.n);
    out.forms.push_back(std::move(f));
  }
  Quiver cur = q;
  while (auto e = contractible_edge(cur)) {
    Move mv = Move::contract(cur.edge_id(*e));
    cur = apply_move(cur, mv).quiver;
    out.trace.push_back(std::move(mv));
  }
  out.reached = std::move(cur);
  return out;
}

namespace {

std::map<std::string, VertexClass> boundary_labels(const Quiver& q) {
  std::map<std::string, VertexClass> out;
  for (std::size_t v = 0; v < q.vertex_count(); ++v)
    if (q.is_boundary(v)) out[q.vertex_id(v)] = q.vertex_class(v);
  return out;
}

}  // namespace

bool homotopic(const Quiver& a, const Quiver& b) {
  const auto ia = invariants(a);
  const auto ib = invariants(b);
  require_open(ia);
  require_open(ib);
  if (boundary_labels(a) != boundary_labels(b)) {
    throw Error(ErrorCode::BoundaryMismatch, "labeled boundaries differ");
  }
  if (ia.size() != ib.size()) return false;
  const auto [lb, cb] = component_labels(b);
  for (const auto& ca : ia) {
    std::set<std::string> bnd;
    for (const auto& id : ca.vertices)
      if (a.is_boundary(a.vertex_index(id))) bnd.insert(id);
    const auto target = lb[b.vertex_index(*bnd.begin())];
    const auto& cbv = ib[target];
    std::set<std::string> bnd_b;
    for (const auto& id : cbv.vertices)
      if (b.is_boundary(b.vertex_index(id))) bnd_b.insert(id);
    if (bnd != bnd_b || ca.g != cbv.g) return false;
  }
  return true;
}

bool homotopic_unlabeled(const Quiver& a, const Quiver& b) {
  const auto ia = invariants(a);
  const auto ib = invariants(b);
  require_open(ia);
  require_open(ib);
  std::multiset<std::tuple<long, long, long>> sa, sb;
  for (const auto& c : ia) sa.insert({c.g, c.m, c.n});
  for (const auto& c : ib) sb.insert({c.g, c.m, c.n});
  return sa == sb;
}

std::optional<Move> random_move(const Quiver& q, std::mt19937_64& rng) {
  std::vector<std::size_t> contractible;
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto& ed = q.edge(e);
    if (!ed.is_loop() && q.is_interior(ed.src) && q.is_interior(ed.dst)) contractible.push_back(e);
  }
  const auto interior = q.interior_vertices();
  if (contractible.empty() && interior.empty()) return std::nullopt;
  std::uniform_int_distribution<int> coin(0, 1);
  if (!contractible.empty() && (interior.empty() || coin(rng) == 0)) {
    std::uniform_int_distribution<std::size_t> pick(0, contractible.size() - 1);
    const auto e = contractible[pick(rng)];
    return Move::contract(q.edge_id(e), coin(rng) ? q.vertex_id(q.edge(e).src) : q.vertex_id(q.edge(e).dst));
  }
  std::uniform_int_distribution<std::size_t> pickv(0, interior.size() - 1);
  const auto v = interior[pickv(rng)];
  auto hs = half_edges(q, v);
  std::shuffle(hs.begin(), hs.end(), rng);
  std::uniform_int_distribution<std::size_t> size(1, hs.size() - 1);
  hs.resize(size(rng));
  const auto& vid = q.vertex_id(v);
  return Move::split(vid, std::move(hs), fresh_id(vid + "s", q.vertex_ids()), fresh_id("e" + vid + "s", q.edge_ids()),
                     coin(rng) == 1);
}

}  // namespace lk
