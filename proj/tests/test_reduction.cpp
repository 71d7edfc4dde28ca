#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lk/homotopy.hpp"
#include "lk/reduction.hpp"

#include <random>

using namespace lk;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an lk::Error");
  return ErrorCode::ParseError;
}

const LieGroup SU2(GroupKind::SU2);

Quiver seg(const std::string& a = "v", const std::string& b = "w", const std::string& e = "e") {
  return Quiver::create({a, b}, {{e, a, b}});
}

Quiver pants() { return Quiver::create({"i1", "i2", "c", "o"}, {{"e1", "i1", "c"}, {"e2", "i2", "c"}, {"e3", "c", "o"}}); }

Quiver five() {
  return Quiver::create({"i", "a", "b", "o1", "o2"},
                        {{"e1", "i", "a"}, {"e2", "a", "b"}, {"e3", "b", "o1"}, {"e4", "b", "o2"}, {"l", "a", "a"}});
}

Quiver left_factor() {
  return Quiver::create({"p", "q", "a", "b", "x", "y"},
                        {{"f1", "p", "a"}, {"f2", "q", "a"}, {"f3", "a", "b"}, {"f4", "b", "x"}, {"f5", "b", "y"}});
}

Quiver right_factor() {
  return Quiver::create({"x'", "y'", "c", "z"}, {{"g1", "x'", "c"}, {"g2", "y'", "c"}, {"g3", "c", "z"}});
}

long expected_dim(const Quiver& q, const LieGroup& G) {
  return 2 * (static_cast<long>(q.edge_count()) - static_cast<long>(q.interior_vertices().size())) * G.dim();
}

double vertex_distance(const VertexGroupData& a, const VertexGroupData& b) {
  double m = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v) m = std::max(m, distance(a[v], b[v]));
  return m;
}

}  // namespace

TEST_CASE("the vertex group action") {
  std::mt19937_64 rng(1);
  auto q = five();
  auto p = random_zero_level_point(q, SU2, rng);
  CHECK(point_distance(act(q, identity_vertex_data(q, SU2), p), p) == 0.0);
  auto b1 = random_vertex_group(q, SU2, rng, 1.0, false);
  auto b2 = random_vertex_group(q, SU2, rng, 1.0, false);
  VertexGroupData b12(q.vertex_count(), SU2.identity());
  for (std::size_t v = 0; v < q.vertex_count(); ++v) b12[v] = b1[v] * b2[v];
  CHECK(point_distance(act(q, b1, act(q, b2, p)), act(q, b12, p)) <= 1e-12);
  // loop: conjugation by the single vertex value
  const auto l = q.edge_index("l");
  const auto& ba = b1[q.vertex_index("a")];
  CHECK(distance(act(q, b1, p).a[l], ba * p.a[l] * ba.inverse()) <= 1e-12);
  CHECK(code_of([&] { act(q, VertexGroupData(2, SU2.identity()), p); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("moment maps") {
  std::mt19937_64 rng(2);
  auto q = pants();
  auto p = CotangentPoint::trivial(SU2, 3);
  CHECK(max_norm(SU2, moment_interior(q, p)) == 0.0);
  CHECK(max_norm(SU2, moment_boundary(q, p)) == 0.0);
  for (std::size_t e = 0; e < 3; ++e) p.x[e] = SU2.random_algebra(rng, 1.0);
  const auto& x = p.x;
  const auto nu = moment_interior(q, p).at("c");
  CHECK(SU2.norm(nu - (x[q.edge_index("e1")] + x[q.edge_index("e2")] - x[q.edge_index("e3")])) <= 1e-14);

  // seg: (-x at the source, Ad_a x at the target)
  auto s = seg();
  CotangentPoint ps{SU2, {SU2.random_group(rng)}, {SU2.random_algebra(rng, 1.0)}};
  auto lam = moment_boundary(s, ps);
  CHECK(SU2.norm(lam.at("v") + ps.x[0]) == 0.0);
  CHECK(SU2.norm(lam.at("w") - SU2.Ad(ps.a[0], ps.x[0])) <= 1e-14);

  // equivariance of nu
  auto q5 = five();
  for (int i = 0; i < 20; ++i) {
    CotangentPoint r = CotangentPoint::trivial(SU2, q5.edge_count());
    for (std::size_t e = 0; e < q5.edge_count(); ++e) {
      r.a[e] = SU2.random_group(rng);
      r.x[e] = SU2.random_algebra(rng, 1.0);
    }
    auto b = random_vertex_group(q5, SU2, rng, 1.0, false);
    const auto lhs = moment_interior(q5, act(q5, b, r));
    const auto rhs = moment_interior(q5, r);
    for (const auto& [id, val] : rhs) CHECK(SU2.norm(lhs.at(id) - SU2.Ad(b[q5.vertex_index(id)], val)) <= 1e-12);
  }
}

TEST_CASE("the T*G moment map and symplectic form") {
  std::mt19937_64 rng(3);
  const auto x = SU2.random_algebra(rng, 1.0);
  auto [m1, m2] = moment_tcotg(SU2, SU2.identity(), x);
  CHECK(SU2.norm(m1 - x) == 0.0);
  CHECK(SU2.norm(m2 + x) == 0.0);
  auto [z1, z2] = moment_tcotg(SU2, SU2.random_group(rng), SU2.zero());
  CHECK(SU2.norm(z1) + SU2.norm(z2) == 0.0);

  // (a, b).(g, x) = (a g b^-1, Ad_b x) moves mu to (Ad_a mu_1, Ad_b mu_2)
  const auto g = SU2.random_group(rng), a = SU2.random_group(rng), b = SU2.random_group(rng);
  auto [n1, n2] = moment_tcotg(SU2, a * g * b.inverse(), SU2.Ad(b, x));
  auto [o1, o2] = moment_tcotg(SU2, g, x);
  CHECK(SU2.norm(n1 - SU2.Ad(a, o1)) <= 1e-12);
  CHECK(SU2.norm(n2 - SU2.Ad(b, o2)) <= 1e-12);

  const auto u1 = SU2.random_algebra(rng, 1.0), v1 = SU2.random_algebra(rng, 1.0);
  const auto u2 = SU2.random_algebra(rng, 1.0), v2 = SU2.random_algebra(rng, 1.0);
  CHECK(omega_tcotg(SU2, x, u1, v1, u1, v1) == doctest::Approx(0.0));
  CHECK(omega_tcotg(SU2, SU2.zero(), u1, v1, u2, v2) == doctest::Approx(SU2.inner(u1, v2) - SU2.inner(u2, v1)));
  CHECK(omega_tcotg(SU2, x, u1, v1, u2, v2) == doctest::Approx(-omega_tcotg(SU2, x, u2, v2, u1, v1)));

  // Gram matrix on a basis of g x g
  for (auto kind : {GroupKind::UnitCircle, GroupKind::SU2, GroupKind::SO3}) {
    const LieGroup G(kind);
    const int d = G.dim();
    const auto xg = G.random_algebra(rng, 2.0);
    Eigen::MatrixXd gram(2 * d, 2 * d);
    auto vec = [&](int i) {
      return i < d ? std::pair(G.basis(i), G.zero()) : std::pair(G.zero(), G.basis(i - d));
    };
    for (int i = 0; i < 2 * d; ++i)
      for (int j = 0; j < 2 * d; ++j) {
        auto [ui, vi] = vec(i);
        auto [uj, vj] = vec(j);
        gram(i, j) = omega_tcotg(G, xg, ui, vi, uj, vj);
      }
    CHECK(numerical_rank(gram) == 2 * d);
  }
}

TEST_CASE("pullback of the field-space form under psi") {
  std::mt19937_64 rng(4);
  auto glued = glue(left_factor(), right_factor(), {{"x", "x'"}, {"y", "y'"}});
  const std::vector<Quiver> quivers{seg(), pants(), glued};
  int count = 0;
  for (int i = 0; i < 34; ++i) {
    for (const auto& q : quivers) {
      auto p = random_zero_level_point(q, SU2, rng);
      auto t1 = random_cotangent_tangent(SU2, q.edge_count(), rng);
      auto t2 = random_cotangent_tangent(SU2, q.edge_count(), rng);
      auto r = pullback_check(q, p, t1, t2);
      CHECK(std::abs(r.numeric - r.closed_form) <= 1e-6);
      ++count;
    }
  }
  CHECK(count >= 100);

  auto q = pants();
  auto p = random_zero_level_point(q, SU2, rng);
  auto t1 = random_cotangent_tangent(SU2, 3, rng);
  CotangentTangent zero{std::vector<AlgebraElement>(3, SU2.zero()), std::vector<AlgebraElement>(3, SU2.zero())};
  auto r0 = pullback_check(q, p, t1, zero);
  CHECK(r0.numeric == doctest::Approx(0.0));
  CHECK(r0.closed_form == doctest::Approx(0.0));

  // x = 0 and commuting u's: the canonical pairing
  auto s = seg();
  CotangentPoint ps{SU2, {SU2.random_group(rng)}, {SU2.zero()}};
  CotangentTangent a{{SU2.basis(0)}, {SU2.random_algebra(rng, 1.0)}};
  CotangentTangent b{{2.0 * SU2.basis(0)}, {SU2.random_algebra(rng, 1.0)}};
  auto rs = pullback_check(s, ps, a, b);
  const double canonical = SU2.inner(a.u[0], b.v[0]) - SU2.inner(b.u[0], a.v[0]);
  CHECK(rs.numeric == doctest::Approx(canonical).epsilon(1e-10));
  CHECK(rs.closed_form == doctest::Approx(canonical).epsilon(1e-12));

  p.x[0] = p.x[0] + SU2.basis(1);
  CHECK(code_of([&] { pullback_check(q, p, t1, t1); }) == ErrorCode::MomentNotZero);
}

TEST_CASE("boundary moment of phi(A) is the signed boundary value of A1") {
  std::mt19937_64 rng(5);
  auto q = five();
  for (int i = 0; i < 3; ++i) {
    auto p = random_zero_level_point(q, SU2, rng);
    auto A = synthesize_solution(q, p, 400);
    auto lam = moment_boundary(q, moduli_coordinates(q, A));
    auto vals = boundary_field_values(q, A);
    REQUIRE(lam.size() == 3);
    for (const auto& [id, x] : vals) CHECK(SU2.norm(lam.at(id) - x) <= 1e-6);
  }
}

TEST_CASE("normal form") {
  std::mt19937_64 rng(6);
  auto q = five();
  const auto tree = spanning_tree(q, "i");
  for (int i = 0; i < 100; ++i) {
    auto p = random_zero_level_point(q, SU2, rng);
    auto b = random_vertex_group(q, SU2, rng);
    auto n1 = normal_form(q, tree, p);
    auto n2 = normal_form(q, tree, act(q, b, p));
    CHECK(point_distance(n1.reduced.point, n2.reduced.point) <= 1e-9);
    CHECK(point_distance(act(q, n1.b, p), n1.reduced.point) <= 1e-12);
    for (auto v : {"i", "o1", "o2"}) CHECK(distance(n1.b[q.vertex_index(v)], SU2.identity()) == 0.0);
  }
  auto p = random_zero_level_point(q, SU2, rng);
  auto n = normal_form(q, tree, p);
  const auto pinned = pinned_edges(q, tree);
  CHECK(std::count(pinned.begin(), pinned.end(), true) == 2);
  for (std::size_t e = 0; e < q.edge_count(); ++e)
    if (pinned[e]) CHECK(distance(n.reduced.point.a[e], SU2.identity()) == 0.0);
  // idempotent, and an already normalized point has witness I
  auto again = normal_form(q, tree, n.reduced.point);
  CHECK(point_distance(again.reduced.point, n.reduced.point) <= 1e-12);
  CHECK(vertex_distance(again.b, identity_vertex_data(q, SU2)) <= 1e-12);

  auto s = seg();
  CotangentPoint ps{SU2, {SU2.random_group(rng)}, {SU2.random_algebra(rng, 1.0)}};
  CHECK(point_distance(normal_form(s, ps).reduced.point, ps) == 0.0);

  CHECK(code_of([&] { normal_form(q, spanning_tree(q, "a"), p); }) == ErrorCode::RootNotBoundary);
  auto bad = p;
  bad.x[0] = bad.x[0] + SU2.basis(0);
  CHECK(code_of([&] { normal_form(q, tree, bad); }) == ErrorCode::MomentNotZero);
}

TEST_CASE("free parameters match the dimension formula") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    auto q = random_quiver(rng, 8);
    for (auto kind : {GroupKind::UnitCircle, GroupKind::SU2, GroupKind::SO3}) {
      const LieGroup G(kind);
      auto p = random_zero_level_point(q, G, rng);
      CHECK(free_parameter_count(q, normal_form(q, p).reduced) == expected_dim(q, G));
    }
  }
}

TEST_CASE("same_orbit") {
  std::mt19937_64 rng(8);
  auto q = five();
  auto p = random_zero_level_point(q, SU2, rng);
  auto self = same_orbit(q, p, p);
  REQUIRE(self.has_value());
  CHECK(vertex_distance(*self, identity_vertex_data(q, SU2)) <= 1e-12);
  for (int i = 0; i < 10; ++i) {
    auto b = random_vertex_group(q, SU2, rng);
    auto w = same_orbit(q, p, act(q, b, p));
    REQUIRE(w.has_value());
    CHECK(vertex_distance(*w, b) <= 1e-9);
    CHECK_FALSE(same_orbit(q, p, random_zero_level_point(q, SU2, rng)).has_value());
  }
}

TEST_CASE("gluing points") {
  std::mt19937_64 rng(9);
  // seg * seg: Ad_{a1} x1 = x2
  {
    auto s1 = seg("v", "w", "e"), s2 = seg("v'", "w'", "f");
    CotangentPoint p1{SU2, {SU2.random_group(rng)}, {SU2.random_algebra(rng, 1.0)}};
    CotangentPoint p2{SU2, {SU2.random_group(rng)}, {SU2.Ad(p1.a[0], p1.x[0])}};
    auto g = glue_points(s1, p1, s2, p2, {{"w", "v'"}});
    CHECK(g.glued.quiver.edge_count() == 2);
    CHECK(max_norm(SU2, moment_interior(g.glued.quiver, g.point)) <= 1e-9);
    p2.x[0] = p2.x[0] + SU2.basis(2);
    CHECK(code_of([&] { glue_points(s1, p1, s2, p2, {{"w", "v'"}}); }) == ErrorCode::DiagonalMomentNonzero);
  }
  // the two-stage picture: zero level, dimension bookkeeping, unmatched boundary moments untouched
  auto q1 = left_factor(), q2 = right_factor();
  const std::vector<std::pair<std::string, std::string>> match{{"x", "x'"}, {"y", "y'"}};
  for (int i = 0; i < 10; ++i) {
    auto [p1, p2] = random_matched_points(q1, q2, match, SU2, rng);
    CHECK(max_norm(SU2, moment_interior(q1, p1)) <= 1e-9);
    CHECK(max_norm(SU2, moment_interior(q2, p2)) <= 1e-9);
    auto g = glue_points(q1, p1, q2, p2, match);
    const auto& q = g.glued.quiver;
    CHECK(max_norm(SU2, moment_interior(q, g.point)) <= 1e-8);
    const long d1 = free_parameter_count(q1, normal_form(q1, p1).reduced);
    const long d2 = free_parameter_count(q2, normal_form(q2, p2).reduced);
    CHECK(free_parameter_count(q, normal_form(q, g.point).reduced) == d1 + d2 - 2 * 2 * SU2.dim());
    const auto l = moment_boundary(q, g.point);
    const auto l1 = moment_boundary(q1, p1);
    const auto l2 = moment_boundary(q2, p2);
    CHECK(SU2.norm(l.at("p") - l1.at("p")) <= 1e-14);
    CHECK(SU2.norm(l.at("z") - l2.at("z")) <= 1e-14);
    // interior gauge on the factors commutes with gluing
    auto b1 = random_vertex_group(q1, SU2, rng);
    auto b2 = random_vertex_group(q2, SU2, rng);
    auto h = glue_points(q1, act(q1, b1, p1), q2, act(q2, b2, p2), match);
    CHECK(same_orbit(q, g.point, h.point).has_value());
  }
  // random pairs, either side carrying the free boundary
  int glued = 0;
  for (int i = 0; i < 200 && glued < 30; ++i) {
    auto a = random_quiver(rng, 7, "a"), b = random_quiver(rng, 7, "b");
    if (a.boundary_out().size() != b.boundary_in().size()) continue;
    const auto m = positional_match(a, b);
    if (a.boundary_in().empty() && b.boundary_out().empty()) {
      CHECK(code_of([&] { random_matched_points(a, b, m, SU2, rng); }) == ErrorCode::ClosedComponent);
      continue;
    }
    auto [p1, p2] = random_matched_points(a, b, m, SU2, rng);
    auto g = glue_points(a, p1, b, p2, m);
    CHECK(max_norm(SU2, moment_interior(g.glued.quiver, g.point)) <= 1e-8);
    ++glued;
  }
  CHECK(glued >= 20);
}

TEST_CASE("cap reduction") {
  std::mt19937_64 rng(10);
  // seg with x = 0 reduces to the empty point
  {
    auto s = seg();
    CotangentPoint p{SU2, {SU2.random_group(rng)}, {SU2.zero()}};
    auto r = reduce_boundary(s, p, "w");
    CHECK(r.quiver.vertex_count() == 0);
    CHECK(r.point.size() == 0);
  }
  // octopus (0,2,1) capped at its out-leg
  {
    auto q = octopus(0, 2, 1);
    auto p = random_cappable_point(q, "out1", SU2, rng);
    CHECK(SU2.norm(moment_boundary(q, p).at("out1")) <= 1e-12);
    auto r = reduce_boundary(q, p, "out1");
    auto inv = invariants(r.quiver);
    REQUIRE(inv.size() == 1);
    CHECK(std::tuple(inv[0].g, inv[0].m, inv[0].n) == std::tuple(0L, 2L, 0L));
    CHECK(max_norm(SU2, moment_interior(r.quiver, r.point)) <= 1e-12);
  }
  // dimension drop and preserved boundary moments on random quivers
  int capped = 0;
  for (int i = 0; i < 100 && capped < 30; ++i) {
    auto q = random_quiver(rng, 8);
    std::vector<std::string> candidates;
    for (std::size_t v = 0; v < q.vertex_count(); ++v) {
      if (!q.is_boundary(v)) continue;
      const auto e = q.boundary_edge(v);
      const auto w = q.edge(e).src == v ? q.edge(e).dst : q.edge(e).src;
      if (q.is_interior(w) && q.degree(w) > 2 && q.boundary_in().size() + q.boundary_out().size() > 1)
        candidates.push_back(q.vertex_id(v));
    }
    if (candidates.empty()) continue;
    ++capped;
    const auto v0 = candidates.front();
    auto p = random_cappable_point(q, v0, SU2, rng);
    auto r = reduce_boundary(q, p, v0);
    CHECK(max_norm(SU2, moment_interior(r.quiver, r.point)) <= 1e-8);
    const long before = free_parameter_count(q, normal_form(q, p).reduced);
    const long after = free_parameter_count(r.quiver, normal_form(r.quiver, r.point).reduced);
    CHECK(before - after == 2 * SU2.dim());
    const auto l0 = moment_boundary(q, p);
    for (const auto& [id, x] : moment_boundary(r.quiver, r.point)) CHECK(SU2.norm(x - l0.at(id)) <= 1e-8);
  }
  CHECK(capped >= 20);

  auto q = pants();
  auto p = random_zero_level_point(q, SU2, rng);
  CHECK(code_of([&] { reduce_boundary(q, p, "c"); }) == ErrorCode::NotBoundary);
  CHECK(code_of([&] { reduce_boundary(q, p, "o"); }) == ErrorCode::MomentNotZero);
  auto path = Quiver::create({"i", "a", "b", "o"}, {{"e1", "i", "a"}, {"m", "a", "b"}, {"e2", "b", "o"}});
  auto pp = random_cappable_point(path, "o", SU2, rng);
  CHECK(code_of([&] { reduce_boundary(path, pp, "o"); }) == ErrorCode::EndpointBecomesBoundary);
}
