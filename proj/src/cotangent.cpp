#include "lk/cotangent.hpp"

#include <algorithm>

namespace lk {

CotangentPoint CotangentPoint::trivial(const LieGroup& group, std::size_t edges) {
  return {group, std::vector<GroupElement>(edges, group.identity()), std::vector<AlgebraElement>(edges, group.zero())};
}

VertexGroupData identity_vertex_data(const Quiver& q, const LieGroup& group) {
  return VertexGroupData(q.vertex_count(), group.identity());
}

namespace {

void check_shape(const Quiver& q, const CotangentPoint& p) {
  if (p.a.size() != q.edge_count() || p.x.size() != q.edge_count()) {
    throw Error(ErrorCode::ShapeMismatch, "point has " + std::to_string(p.a.size()) + " edges, quiver has " +
                                              std::to_string(q.edge_count()));
  }
}

}  // namespace

CotangentPoint act(const Quiver& q, const VertexGroupData& b, const CotangentPoint& p) {
  check_shape(q, p);
  if (b.size() != q.vertex_count()) throw Error(ErrorCode::ShapeMismatch, "vertex data does not match the quiver");
  const auto& G = p.group;
  CotangentPoint out = p;
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto& bs = b[q.edge(e).src];
    const auto& bt = b[q.edge(e).dst];
    out.a[e] = bt * p.a[e] * bs.inverse();
    out.x[e] = G.Ad(bs, p.x[e]);
  }
  return out;
}

VertexAlgebraData moment_interior(const Quiver& q, const CotangentPoint& p) {
  check_shape(q, p);
  const auto& G = p.group;
  VertexAlgebraData out;
  for (auto v : q.interior_vertices()) {
    AlgebraElement s = G.zero();
    for (auto e : q.in_edges(v)) s += G.Ad(p.a[e], p.x[e]);
    for (auto e : q.out_edges(v)) s -= p.x[e];
    out.emplace(q.vertex_id(v), s);
  }
  return out;
}

VertexAlgebraData moment_boundary(const Quiver& q, const CotangentPoint& p) {
  check_shape(q, p);
  const auto& G = p.group;
  VertexAlgebraData out;
  for (std::size_t v = 0; v < q.vertex_count(); ++v) {
    if (!q.is_boundary(v)) continue;
    const auto e = q.boundary_edge(v);
    out.emplace(q.vertex_id(v), q.edge(e).dst == v ? G.Ad(p.a[e], p.x[e]) : -p.x[e]);
  }
  return out;
}

std::pair<AlgebraElement, AlgebraElement> moment_tcotg(const LieGroup& G, const GroupElement& g,
                                                       const AlgebraElement& x) {
  return {G.Ad(g, x), -x};
}

double omega_tcotg(const LieGroup& G, const AlgebraElement& x, const AlgebraElement& u1, const AlgebraElement& v1,
                   const AlgebraElement& u2, const AlgebraElement& v2) {
  return G.inner(u1, v2) - G.inner(u2, v1) + G.inner(x, G.bracket(u1, u2));
}

double omega_sum(const Quiver& q, const CotangentPoint& p, const CotangentTangent& t1, const CotangentTangent& t2) {
  check_shape(q, p);
  double s = 0.0;
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    s += omega_tcotg(p.group, p.x[e], t1.u[e], t1.v[e], t2.u[e], t2.v[e]);
  }
  return s;
}

double max_norm(const LieGroup& G, const VertexAlgebraData& d) {
  double m = 0.0;
  for (const auto& [id, x] : d) m = std::max(m, G.norm(x));
  return m;
}

void enforce_zero_level(const Quiver& q, const SpanningTree& tree, CotangentPoint& p) {
  const auto& G = p.group;
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const auto v = *it;
    if (!tree.parent_edge[v] || !q.is_interior(v)) continue;
    const auto c = *tree.parent_edge[v];
    // nu(v) without the parent edge's contribution
    AlgebraElement rest = G.zero();
    for (auto e : q.in_edges(v))
      if (e != c) rest += G.Ad(p.a[e], p.x[e]);
    for (auto e : q.out_edges(v))
      if (e != c) rest -= p.x[e];
    if (q.edge(c).dst == v) {
      p.x[c] = G.Ad(p.a[c].inverse(), -rest);
    } else {
      p.x[c] = rest;
    }
  }
}

CotangentPoint random_zero_level_point(const Quiver& q, const LieGroup& G, std::mt19937_64& rng, double a_scale,
                                       double x_scale) {
  CotangentPoint p = CotangentPoint::trivial(G, q.edge_count());
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    p.a[e] = G.random_group(rng, a_scale);
    p.x[e] = G.random_algebra(rng, x_scale);
  }
  const auto root = default_root(q);
  if (!root) throw Error(ErrorCode::ClosedComponent, "quiver has no boundary vertex to root the tree at");
  enforce_zero_level(q, spanning_tree(q, *root), p);
  return p;
}

}  // namespace lk
