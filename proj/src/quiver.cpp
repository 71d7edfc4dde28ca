#include "lk/quiver.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <numeric>
#include <set>

namespace lk {

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      // compare digit runs numerically, ignoring leading zeros
      std::size_t is = i, js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      if (ie - is != je - js) return ie - is < je - js;
      const int c = a.compare(is, ie - is, b, js, je - js);
      if (c != 0) return c < 0;
      if (ie - i != je - j) return ie - i < je - j;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

std::optional<QuiverIssue> validate(const std::vector<std::string>& vertices, const std::vector<EdgeDef>& edges) {
  std::set<std::string> vs;
  for (const auto& v : vertices) {
    if (!vs.insert(v).second) return QuiverIssue{ErrorCode::DuplicateId, v};
  }
  std::set<std::string> es;
  std::set<std::string> touched;
  for (const auto& e : edges) {
    if (!es.insert(e.id).second) return QuiverIssue{ErrorCode::DuplicateId, e.id};
    if (!vs.count(e.src) || !vs.count(e.dst)) return QuiverIssue{ErrorCode::DanglingEdge, e.id};
    touched.insert(e.src);
    touched.insert(e.dst);
  }
  for (const auto& v : vertices) {
    if (!touched.count(v)) return QuiverIssue{ErrorCode::IsolatedVertex, v};
  }
  return std::nullopt;
}

Quiver Quiver::create(std::vector<std::string> vertices, std::vector<EdgeDef> edges) {
  if (auto issue = validate(vertices, edges)) {
    std::string what;
    switch (issue->code) {
      case ErrorCode::IsolatedVertex: what = "vertex '" + issue->subject + "' has no incident edge"; break;
      case ErrorCode::DanglingEdge: what = "edge '" + issue->subject + "' references an unknown vertex"; break;
      default: what = "id '" + issue->subject + "' used twice"; break;
    }
    throw Error(issue->code, what);
  }
  std::sort(vertices.begin(), vertices.end(), natural_less);
  std::sort(edges.begin(), edges.end(), [](const EdgeDef& a, const EdgeDef& b) { return natural_less(a.id, b.id); });

  Quiver q;
  q.vertex_ids_ = std::move(vertices);
  for (std::size_t v = 0; v < q.vertex_ids_.size(); ++v) q.vertex_lookup_[q.vertex_ids_[v]] = v;
  const std::size_t nv = q.vertex_ids_.size();
  q.in_deg_.assign(nv, 0);
  q.out_deg_.assign(nv, 0);
  q.in_edges_.assign(nv, {});
  q.out_edges_.assign(nv, {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t s = q.vertex_lookup_.at(edges[e].src);
    const std::size_t t = q.vertex_lookup_.at(edges[e].dst);
    q.edge_ids_.push_back(edges[e].id);
    q.edge_lookup_[edges[e].id] = e;
    q.edges_.push_back({s, t});
    ++q.out_deg_[s];
    ++q.in_deg_[t];
    q.out_edges_[s].push_back(e);
    q.in_edges_[t].push_back(e);
  }
  return q;
}

std::optional<std::size_t> Quiver::find_vertex(const std::string& id) const {
  auto it = vertex_lookup_.find(id);
  if (it == vertex_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Quiver::find_edge(const std::string& id) const {
  auto it = edge_lookup_.find(id);
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Quiver::vertex_index(const std::string& id) const {
  if (auto v = find_vertex(id)) return *v;
  throw Error(ErrorCode::UnknownId, "no vertex '" + id + "'");
}

std::size_t Quiver::edge_index(const std::string& id) const {
  if (auto e = find_edge(id)) return *e;
  throw Error(ErrorCode::UnknownId, "no edge '" + id + "'");
}

VertexClass Quiver::vertex_class(std::size_t v) const {
  if (degree(v) > 1) return VertexClass::Interior;
  return out_deg_[v] == 1 ? VertexClass::BoundaryIn : VertexClass::BoundaryOut;
}

std::size_t Quiver::boundary_edge(std::size_t v) const {
  if (!is_boundary(v)) throw Error(ErrorCode::NotBoundary, "vertex '" + vertex_ids_[v] + "' is interior");
  return out_deg_[v] == 1 ? out_edges_[v][0] : in_edges_[v][0];
}

std::vector<std::size_t> Quiver::boundary_in() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertex_count(); ++v)
    if (vertex_class(v) == VertexClass::BoundaryIn) out.push_back(v);
  return out;
}

std::vector<std::size_t> Quiver::boundary_out() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertex_count(); ++v)
    if (vertex_class(v) == VertexClass::BoundaryOut) out.push_back(v);
  return out;
}

std::vector<std::size_t> Quiver::interior_vertices() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertex_count(); ++v)
    if (is_interior(v)) out.push_back(v);
  return out;
}

std::vector<EdgeDef> Quiver::edge_defs() const {
  std::vector<EdgeDef> out;
  out.reserve(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e)
    out.push_back({edge_ids_[e], vertex_ids_[edges_[e].src], vertex_ids_[edges_[e].dst]});
  return out;
}

bool Quiver::operator==(const Quiver& o) const {
  if (vertex_ids_ != o.vertex_ids_ || edge_ids_ != o.edge_ids_) return false;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].src != o.edges_[e].src || edges_[e].dst != o.edges_[e].dst) return false;
  }
  return true;
}

std::map<std::string, VertexClass> classify(const Quiver& q) {
  std::map<std::string, VertexClass> out;
  for (std::size_t v = 0; v < q.vertex_count(); ++v) out[q.vertex_id(v)] = q.vertex_class(v);
  return out;
}

std::pair<std::vector<std::size_t>, std::size_t> component_labels(const Quiver& q) {
  std::vector<std::size_t> parent(q.vertex_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto a = find(q.edge(e).src), b = find(q.edge(e).dst);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  // label in order of first appearance
  std::map<std::size_t, std::size_t> relabel;
  std::vector<std::size_t> label(q.vertex_count());
  for (std::size_t v = 0; v < q.vertex_count(); ++v) {
    const auto r = find(v);
    auto it = relabel.find(r);
    if (it == relabel.end()) it = relabel.emplace(r, relabel.size()).first;
    label[v] = it->second;
  }
  return {label, relabel.size()};
}

std::vector<ComponentInvariants> invariants(const Quiver& q) {
  const auto [label, count] = component_labels(q);
  std::vector<ComponentInvariants> out(count);
  std::vector<long> nv(count, 0), ne(count, 0);
  for (std::size_t v = 0; v < q.vertex_count(); ++v) {
    auto& c = out[label[v]];
    c.vertices.push_back(q.vertex_id(v));
    ++nv[label[v]];
    if (q.vertex_class(v) == VertexClass::BoundaryIn) ++c.m;
    if (q.vertex_class(v) == VertexClass::BoundaryOut) ++c.n;
  }
  for (std::size_t e = 0; e < q.edge_count(); ++e) ++ne[label[q.edge(e).src]];
  for (std::size_t c = 0; c < count; ++c) out[c].g = ne[c] - nv[c] + 1;
  return out;
}

std::vector<Quiver> components(const Quiver& q) {
  const auto [label, count] = component_labels(q);
  std::vector<std::vector<std::string>> vs(count);
  std::vector<std::vector<EdgeDef>> es(count);
  for (std::size_t v = 0; v < q.vertex_count(); ++v) vs[label[v]].push_back(q.vertex_id(v));
  const auto defs = q.edge_defs();
  for (std::size_t e = 0; e < q.edge_count(); ++e) es[label[q.edge(e).src]].push_back(defs[e]);
  std::vector<Quiver> out;
  for (std::size_t c = 0; c < count; ++c) out.push_back(Quiver::create(vs[c], es[c]));
  return out;
}

std::size_t SpanningTree::tree_edge_count() const {
  return static_cast<std::size_t>(std::count(in_tree.begin(), in_tree.end(), true));
}

SpanningTree spanning_tree(const Quiver& q, std::size_t root) {
  if (root >= q.vertex_count()) throw Error(ErrorCode::UnknownId, "root index out of range");
  SpanningTree t;
  t.root = root;
  t.in_tree.assign(q.edge_count(), false);
  t.parent_edge.assign(q.vertex_count(), std::nullopt);
  t.parent_vertex.assign(q.vertex_count(), std::nullopt);
  std::vector<bool> seen(q.vertex_count(), false);
  std::deque<std::size_t> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    t.order.push_back(v);
    // incident edges in index order
    std::vector<std::size_t> inc = q.out_edges(v);
    inc.insert(inc.end(), q.in_edges(v).begin(), q.in_edges(v).end());
    std::sort(inc.begin(), inc.end());
    for (auto e : inc) {
      const auto& ed = q.edge(e);
      const std::size_t w = ed.src == v ? ed.dst : ed.src;
      if (seen[w]) continue;
      seen[w] = true;
      t.in_tree[e] = true;
      t.parent_edge[w] = e;
      t.parent_vertex[w] = v;
      queue.push_back(w);
    }
  }
  if (t.order.size() != q.vertex_count()) {
    throw Error(ErrorCode::Disconnected, "quiver is not connected");
  }
  return t;
}

SpanningTree spanning_tree(const Quiver& q, const std::string& root) { return spanning_tree(q, q.vertex_index(root)); }

std::optional<std::size_t> default_root(const Quiver& q) {
  auto in = q.boundary_in();
  if (!in.empty()) return in.front();
  auto out = q.boundary_out();
  if (!out.empty()) return out.front();
  return std::nullopt;
}

std::string fresh_id(const std::string& base, const std::vector<std::string>& taken) {
  std::string id = base;
  while (std::find(taken.begin(), taken.end(), id) != taken.end()) id += "~2";
  return id;
}

GlueResult glue_with_maps(const Quiver& q1, const Quiver& q2,
                          const std::vector<std::pair<std::string, std::string>>& match) {
  std::set<std::string> out1, in2, used1, used2;
  for (auto v : q1.boundary_out()) out1.insert(q1.vertex_id(v));
  for (auto v : q2.boundary_in()) in2.insert(q2.vertex_id(v));
  for (const auto& [a, b] : match) {
    if (!out1.count(a)) throw Error(ErrorCode::NotBoundary, "'" + a + "' is not an outgoing boundary vertex of the first quiver");
    if (!in2.count(b)) throw Error(ErrorCode::NotBoundary, "'" + b + "' is not an incoming boundary vertex of the second quiver");
    if (!used1.insert(a).second || !used2.insert(b).second) throw Error(ErrorCode::NotBijection, "vertex matched twice");
  }
  if (used1.size() != out1.size() || used2.size() != in2.size()) {
    throw Error(ErrorCode::NotBijection, "match does not cover both boundary sets");
  }

  GlueResult r;
  std::vector<std::string> vertices = q1.vertex_ids();
  std::vector<EdgeDef> edges = q1.edge_defs();
  std::vector<std::string> taken = vertices;
  for (const auto& [a, b] : match) r.vertex_map2[b] = a;
  for (const auto& v : q2.vertex_ids()) {
    if (r.vertex_map2.count(v)) continue;
    const auto id = fresh_id(v, taken);
    taken.push_back(id);
    vertices.push_back(id);
    r.vertex_map2[v] = id;
  }
  std::vector<std::string> etaken = q1.edge_ids();
  for (const auto& e : q2.edge_defs()) {
    const auto id = fresh_id(e.id, etaken);
    etaken.push_back(id);
    r.edge_map2[e.id] = id;
    edges.push_back({id, r.vertex_map2.at(e.src), r.vertex_map2.at(e.dst)});
  }
  r.quiver = Quiver::create(std::move(vertices), std::move(edges));
  return r;
}

Quiver glue(const Quiver& q1, const Quiver& q2, const std::vector<std::pair<std::string, std::string>>& match) {
  return glue_with_maps(q1, q2, match).quiver;
}

std::vector<std::pair<std::string, std::string>> positional_match(const Quiver& q1, const Quiver& q2) {
  const auto a = q1.boundary_out();
  const auto b = q2.boundary_in();
  if (a.size() != b.size()) {
    throw Error(ErrorCode::NotBijection, std::to_string(a.size()) + " outgoing vs " + std::to_string(b.size()) +
                                             " incoming boundary vertices");
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back(q1.vertex_id(a[i]), q2.vertex_id(b[i]));
  return out;
}

Quiver delete_boundary_vertex(const Quiver& q, const std::string& v0) {
  const auto v = q.vertex_index(v0);
  if (!q.is_boundary(v)) throw Error(ErrorCode::NotBoundary, "vertex '" + v0 + "' is interior");
  const auto e = q.boundary_edge(v);
  const auto& ed = q.edge(e);
  const auto w = ed.src == v ? ed.dst : ed.src;
  if (q.degree(w) == 1) {
    throw Error(ErrorCode::ResultHasIsolatedVertex, "deleting '" + v0 + "' isolates '" + q.vertex_id(w) + "'");
  }
  std::vector<std::string> vertices;
  for (const auto& id : q.vertex_ids())
    if (id != v0) vertices.push_back(id);
  std::vector<EdgeDef> edges;
  for (const auto& d : q.edge_defs())
    if (d.id != q.edge_id(e)) edges.push_back(d);
  return Quiver::create(std::move(vertices), std::move(edges));
}

namespace {

// Multiset of (src, dst) edges as a count matrix under a vertex permutation.
bool edges_match(const Quiver& a, const Quiver& b, const std::vector<std::size_t>& perm) {
  std::multiset<std::pair<std::size_t, std::size_t>> ea, eb;
  for (std::size_t e = 0; e < a.edge_count(); ++e) ea.insert({perm[a.edge(e).src], perm[a.edge(e).dst]});
  for (std::size_t e = 0; e < b.edge_count(); ++e) eb.insert({b.edge(e).src, b.edge(e).dst});
  return ea == eb;
}

}  // namespace

bool isomorphic(const Quiver& a, const Quiver& b, bool fix_boundary_labels) {
  if (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count()) return false;
  const std::size_t n = a.vertex_count();
  auto signature = [](const Quiver& q, std::size_t v) {
    std::size_t loops = 0;
    for (auto e : q.out_edges(v))
      if (q.edge(e).is_loop()) ++loops;
    return std::tuple(q.in_degree(v), q.out_degree(v), loops);
  };
  // candidate targets per vertex of a
  std::vector<std::vector<std::size_t>> cand(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < n; ++w) {
      if (signature(a, v) != signature(b, w)) continue;
      if (fix_boundary_labels && (a.is_boundary(v) || b.is_boundary(w)) && a.vertex_id(v) != b.vertex_id(w)) continue;
      cand[v].push_back(w);
    }
    if (cand[v].empty()) return false;
  }
  // adjacency counts for incremental pruning
  auto count_matrix = [n](const Quiver& q) {
    std::vector<std::vector<int>> m(n, std::vector<int>(n, 0));
    for (std::size_t e = 0; e < q.edge_count(); ++e) ++m[q.edge(e).src][q.edge(e).dst];
    return m;
  };
  const auto ma = count_matrix(a);
  const auto mb = count_matrix(b);
  std::vector<std::size_t> perm(n);
  std::vector<bool> used(n, false);
  std::function<bool(std::size_t)> extend = [&](std::size_t v) -> bool {
    if (v == n) return edges_match(a, b, perm);
    for (auto w : cand[v]) {
      if (used[w]) continue;
      bool ok = true;
      for (std::size_t u = 0; u < v && ok; ++u) {
        ok = ma[u][v] == mb[perm[u]][w] && ma[v][u] == mb[w][perm[u]];
      }
      if (!ok) continue;
      used[w] = true;
      perm[v] = w;
      if (extend(v + 1)) return true;
      used[w] = false;
    }
    return false;
  };
  return extend(0);
}

}  // namespace lk

namespace lk {

Quiver random_quiver(std::mt19937_64& rng, std::size_t max_vertices, const std::string& prefix) {
  if (max_vertices < 2) throw Error(ErrorCode::UnknownId, "random_quiver needs at least 2 vertices");
  auto vid = [&](std::size_t k) { return prefix + "v" + std::to_string(k); };
  std::vector<std::string> vertices;
  std::vector<EdgeDef> edges;
  auto add_edge = [&](const std::string& s, const std::string& t) {
    edges.push_back({prefix + "e" + std::to_string(edges.size() + 1), s, t});
  };
  std::uniform_int_distribution<int> coin(0, 1);
  if (max_vertices == 2 || std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
    vertices = {vid(1), vid(2)};
    add_edge(vid(1), vid(2));
    return Quiver::create(vertices, edges);
  }
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, max_vertices - 1)(rng);
  const std::size_t legs = std::uniform_int_distribution<std::size_t>(1, max_vertices - k)(rng);
  for (std::size_t i = 1; i <= k; ++i) vertices.push_back(vid(i));
  auto orient = [&](const std::string& a, const std::string& b) {
    if (coin(rng)) add_edge(a, b); else add_edge(b, a);
  };
  for (std::size_t i = 2; i <= k; ++i) {
    orient(vid(i), vid(std::uniform_int_distribution<std::size_t>(1, i - 1)(rng)));
  }
  std::uniform_int_distribution<std::size_t> any(1, k);
  const int extra = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int i = 0; i < extra; ++i) orient(vid(any(rng)), vid(any(rng)));
  for (std::size_t j = 1; j <= legs; ++j) {
    const auto leg = vid(k + j);
    vertices.push_back(leg);
    orient(leg, vid(any(rng)));
  }
  // interior vertices need degree >= 2
  std::vector<int> deg(k + 1, 0);
  for (const auto& e : edges) {
    for (std::size_t i = 1; i <= k; ++i) {
      if (e.src == vid(i)) ++deg[i];
      if (e.dst == vid(i)) ++deg[i];
    }
  }
  for (std::size_t i = 1; i <= k; ++i) {
    if (deg[i] >= 2) continue;
    if (k == 1) {
      add_edge(vid(i), vid(i));
    } else {
      std::size_t j = any(rng);
      while (j == i) j = any(rng);
      orient(vid(i), vid(j));
      ++deg[j];
    }
  }
  return Quiver::create(vertices, edges);
}

}  // namespace lk
