#include "lk/reduction.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lk {

namespace {

void check_shape(const Quiver& q, const CotangentPoint& p) {
  if (p.a.size() != q.edge_count() || p.x.size() != q.edge_count()) {
    throw Error(ErrorCode::ShapeMismatch, "point has " + std::to_string(p.a.size()) + " edges, quiver has " +
                                              std::to_string(q.edge_count()));
  }
}

void check_zero_level(const Quiver& q, const CotangentPoint& p, double tol) {
  const double nu = max_norm(p.group, moment_interior(q, p));
  if (nu > tol) throw Error(ErrorCode::MomentNotZero, "interior moment " + std::to_string(nu));
}

SpanningTree default_tree(const Quiver& q) {
  const auto root = default_root(q);
  if (!root) throw Error(ErrorCode::RootNotBoundary, "quiver has no boundary vertex to root the slice at");
  return spanning_tree(q, *root);
}

// copies the edge data of `p` (on `from`) onto the edges of `to`, matched by id
CotangentPoint restrict_to(const Quiver& from, const CotangentPoint& p, const Quiver& to) {
  CotangentPoint out = CotangentPoint::trivial(p.group, to.edge_count());
  for (std::size_t e = 0; e < to.edge_count(); ++e) {
    const auto src = from.edge_index(to.edge_id(e));
    out.a[e] = p.a[src];
    out.x[e] = p.x[src];
  }
  return out;
}

}  // namespace

std::vector<bool> pinned_edges(const Quiver& q, const SpanningTree& tree) {
  std::vector<bool> out(q.edge_count(), false);
  for (std::size_t v = 0; v < q.vertex_count(); ++v)
    if (q.is_interior(v) && tree.parent_edge[v]) out[*tree.parent_edge[v]] = true;
  return out;
}

NormalForm normal_form(const Quiver& q, const SpanningTree& tree, const CotangentPoint& p, double tol) {
  check_shape(q, p);
  if (!q.is_boundary(tree.root)) throw Error(ErrorCode::RootNotBoundary, "root '" + q.vertex_id(tree.root) + "' is interior");
  check_zero_level(q, p, tol);
  VertexGroupData b = identity_vertex_data(q, p.group);
  for (auto v : tree.order) {
    if (!q.is_interior(v) || !tree.parent_edge[v]) continue;
    const auto e = *tree.parent_edge[v];
    const auto& bu = b[*tree.parent_vertex[v]];
    // b_t a b_s^-1 = I, solved for the end at v
    b[v] = q.edge(e).dst == v ? bu * p.a[e].inverse() : bu * p.a[e];
  }
  NormalForm nf{{act(q, b, p), tree}, b};
  const auto pinned = pinned_edges(q, tree);
  for (std::size_t e = 0; e < q.edge_count(); ++e)
    if (pinned[e]) nf.reduced.point.a[e] = p.group.identity();
  return nf;
}

NormalForm normal_form(const Quiver& q, const CotangentPoint& p, double tol) {
  return normal_form(q, default_tree(q), p, tol);
}

double point_distance(const CotangentPoint& p, const CotangentPoint& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::ShapeMismatch, "points differ in edge count");
  double m = 0.0;
  for (std::size_t e = 0; e < p.size(); ++e)
    m = std::max({m, distance(p.a[e], q.a[e]), p.group.norm(p.x[e] - q.x[e])});
  return m;
}

long free_parameter_count(const Quiver& q, const ReducedPoint& r) {
  const auto& G = r.point.group;
  const int d = G.dim();
  const auto pinned = pinned_edges(q, r.tree);
  const long unpinned = static_cast<long>(std::count(pinned.begin(), pinned.end(), false));

  // nu is linear in x; its rank is the number of independent Kirchhoff constraints
  const auto interior = q.interior_vertices();
  std::map<std::size_t, int> row;
  for (std::size_t i = 0; i < interior.size(); ++i) row[interior[i]] = static_cast<int>(i) * d;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<int>(interior.size()) * d, static_cast<int>(q.edge_count()) * d);
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const int col = static_cast<int>(e) * d;
    const auto s = q.edge(e).src, t = q.edge(e).dst;
    if (q.is_interior(t)) J.block(row.at(t), col, d, d) += G.Ad_matrix(r.point.a[e]);
    if (q.is_interior(s)) J.block(row.at(s), col, d, d) -= Eigen::MatrixXd::Identity(d, d);
  }
  const long rank = J.size() == 0 ? 0 : numerical_rank(J, 1e-8);
  return unpinned * d + static_cast<long>(q.edge_count()) * d - rank;
}

std::optional<VertexGroupData> same_orbit(const Quiver& q, const CotangentPoint& p, const CotangentPoint& pp,
                                          double tol) {
  const auto tree = default_tree(q);
  const auto n1 = normal_form(q, tree, p);
  const auto n2 = normal_form(q, tree, pp);
  if (point_distance(n1.reduced.point, n2.reduced.point) > tol) return std::nullopt;
  VertexGroupData b(q.vertex_count(), p.group.identity());
  for (std::size_t v = 0; v < q.vertex_count(); ++v) b[v] = n2.b[v].inverse() * n1.b[v];
  return b;
}

GluedPoint glue_points(const Quiver& q1, const CotangentPoint& p1, const Quiver& q2, const CotangentPoint& p2,
                       const std::vector<std::pair<std::string, std::string>>& match, double tol) {
  check_shape(q1, p1);
  check_shape(q2, p2);
  if (!(p1.group == p2.group)) throw Error(ErrorCode::SpecMismatch, "points live on different groups");
  auto glued = glue_with_maps(q1, q2, match);
  const auto l1 = moment_boundary(q1, p1);
  const auto l2 = moment_boundary(q2, p2);
  for (const auto& [v1, v2] : match) {
    const double r = p1.group.norm(l1.at(v1) + l2.at(v2));
    if (r > tol) {
      throw Error(ErrorCode::DiagonalMomentNonzero, "lambda(" + v1 + ") + lambda(" + v2 + ") = " + std::to_string(r));
    }
  }
  const auto& q = glued.quiver;
  std::map<std::string, std::pair<int, std::size_t>> source;
  for (std::size_t e = 0; e < q1.edge_count(); ++e) source[q1.edge_id(e)] = {1, e};
  for (std::size_t e = 0; e < q2.edge_count(); ++e) source[glued.edge_map2.at(q2.edge_id(e))] = {2, e};
  CotangentPoint p = CotangentPoint::trivial(p1.group, q.edge_count());
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto [side, idx] = source.at(q.edge_id(e));
    const auto& from = side == 1 ? p1 : p2;
    p.a[e] = from.a[idx];
    p.x[e] = from.x[idx];
  }
  return {std::move(glued), std::move(p)};
}

std::pair<CotangentPoint, CotangentPoint> random_matched_points(
    const Quiver& q1, const Quiver& q2, const std::vector<std::pair<std::string, std::string>>& match,
    const LieGroup& G, std::mt19937_64& rng) {
  const auto out2 = q2.boundary_out();
  const auto in1 = q1.boundary_in();
  auto random_point = [&](const Quiver& q) {
    CotangentPoint p = CotangentPoint::trivial(G, q.edge_count());
    for (std::size_t e = 0; e < q.edge_count(); ++e) {
      p.a[e] = G.random_group(rng, 0.8);
      p.x[e] = G.random_algebra(rng, 1.0);
    }
    return p;
  };
  if (!out2.empty()) {
    auto p1 = random_zero_level_point(q1, G, rng);
    auto p2 = random_point(q2);
    for (const auto& [v1, v2] : match) {
      const auto e1 = q1.boundary_edge(q1.vertex_index(v1));
      const auto e2 = q2.boundary_edge(q2.vertex_index(v2));
      p2.x[e2] = G.Ad(p1.a[e1], p1.x[e1]);
    }
    enforce_zero_level(q2, spanning_tree(q2, out2.front()), p2);
    return {p1, p2};
  }
  if (!in1.empty()) {
    auto p2 = random_zero_level_point(q2, G, rng);
    auto p1 = random_point(q1);
    for (const auto& [v1, v2] : match) {
      const auto e1 = q1.boundary_edge(q1.vertex_index(v1));
      const auto e2 = q2.boundary_edge(q2.vertex_index(v2));
      p1.x[e1] = G.Ad(p1.a[e1].inverse(), p2.x[e2]);
    }
    enforce_zero_level(q1, spanning_tree(q1, in1.front()), p1);
    return {p1, p2};
  }
  throw Error(ErrorCode::ClosedComponent, "the glued quiver has no boundary");
}

CappedPoint reduce_boundary(const Quiver& q, const CotangentPoint& p, const std::string& v0, double tol) {
  check_shape(q, p);
  const auto v = q.vertex_index(v0);
  if (!q.is_boundary(v)) throw Error(ErrorCode::NotBoundary, "vertex '" + v0 + "' is interior");
  const double lambda = p.group.norm(moment_boundary(q, p).at(v0));
  if (lambda > tol) throw Error(ErrorCode::MomentNotZero, "lambda(" + v0 + ") = " + std::to_string(lambda));
  const auto e = q.boundary_edge(v);
  const auto w = q.edge(e).src == v ? q.edge(e).dst : q.edge(e).src;

  Quiver reduced;
  if (q.is_boundary(w)) {
    // a whole seg: T*G reduced by G at one end is a point, the other end goes too
    std::vector<std::string> vs;
    for (std::size_t u = 0; u < q.vertex_count(); ++u)
      if (u != v && u != w) vs.push_back(q.vertex_id(u));
    auto es = q.edge_defs();
    es.erase(es.begin() + static_cast<long>(e));
    reduced = Quiver::create(vs, es);
  } else {
    if (q.degree(w) == 2) {
      throw Error(ErrorCode::EndpointBecomesBoundary,
                  "removing '" + v0 + "' leaves '" + q.vertex_id(w) + "' with a single edge");
    }
    reduced = delete_boundary_vertex(q, v0);
  }
  CotangentPoint out = restrict_to(q, p, reduced);
  return {std::move(reduced), std::move(out)};
}

CotangentPoint random_cappable_point(const Quiver& q, const std::string& v0, const LieGroup& G, std::mt19937_64& rng) {
  const auto v = q.vertex_index(v0);
  const auto e0 = q.boundary_edge(v);
  std::optional<std::size_t> root;
  for (std::size_t u = 0; u < q.vertex_count() && !root; ++u)
    if (u != v && q.is_boundary(u)) root = u;
  if (!root) throw Error(ErrorCode::ClosedComponent, "'" + v0 + "' is the only boundary vertex");
  CotangentPoint p = CotangentPoint::trivial(G, q.edge_count());
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    p.a[e] = G.random_group(rng, 0.8);
    p.x[e] = G.random_algebra(rng, 1.0);
  }
  p.x[e0] = G.zero();
  enforce_zero_level(q, spanning_tree(q, *root), p);
  return p;
}

VertexAlgebraData boundary_field_values(const Quiver& q, const EdgeField& A) {
  VertexAlgebraData out;
  for (std::size_t v = 0; v < q.vertex_count(); ++v) {
    if (!q.is_boundary(v)) continue;
    const auto e = q.boundary_edge(v);
    out.emplace(q.vertex_id(v), q.edge(e).dst == v ? A.A1[e].back() : -A.A1[e].front());
  }
  return out;
}

PullbackValues pullback_check(const Quiver& q, const CotangentPoint& p, const CotangentTangent& t1,
                              const CotangentTangent& t2, int N) {
  check_shape(q, p);
  check_zero_level(q, p, 1e-9);
  const auto& G = p.group;
  Grid grid(N);
  TangentField X = EdgeField::zero(G, N, q.edge_count());
  TangentField Y = X;
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto L = G.log(p.a[e]);
    const auto c1 = G.bracket(t1.u[e], p.x[e]);
    const auto c2 = G.bracket(t2.u[e], p.x[e]);
    for (int k = 0; k <= N; ++k) {
      const double t = grid.t(k);
      const auto gamma = G.exp(t * L);
      X.A0[e][k] = G.Ad(gamma, t1.u[e]);
      X.A1[e][k] = G.Ad(gamma, t * c1 + t1.v[e]);
      Y.A0[e][k] = G.Ad(gamma, t2.u[e]);
      Y.A1[e][k] = G.Ad(gamma, t * c2 + t2.v[e]);
    }
  }
  return {symplectic_form(X, Y), omega_sum(q, p, t1, t2)};
}

VertexGroupData random_vertex_group(const Quiver& q, const LieGroup& G, std::mt19937_64& rng, double scale,
                                    bool interior_only) {
  VertexGroupData b = identity_vertex_data(q, G);
  for (std::size_t v = 0; v < q.vertex_count(); ++v)
    if (!interior_only || q.is_interior(v)) b[v] = G.random_group(rng, scale);
  return b;
}

CotangentTangent random_cotangent_tangent(const LieGroup& G, std::size_t edges, std::mt19937_64& rng) {
  CotangentTangent t;
  for (std::size_t e = 0; e < edges; ++e) {
    t.u.push_back(G.random_algebra(rng, 1.0));
    t.v.push_back(G.random_algebra(rng, 1.0));
  }
  return t;
}

}  // namespace lk
