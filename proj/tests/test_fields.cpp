#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lk/fields.hpp"

#include <cmath>
#include <numbers>
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

Quiver seg() { return Quiver::create({"v", "w"}, {{"e", "v", "w"}}); }

Quiver pants() { return Quiver::create({"i1", "i2", "c", "o"}, {{"e1", "i1", "c"}, {"e2", "i2", "c"}, {"e3", "c", "o"}}); }

// five edges, one loop, two interior vertices
Quiver five() {
  return Quiver::create({"i", "a", "b", "o1", "o2"},
                        {{"e1", "i", "a"}, {"e2", "a", "b"}, {"e3", "b", "o1"}, {"e4", "b", "o2"}, {"l", "a", "a"}});
}

double max_diff(const LieGroup& G, const AlgebraPath& a, const AlgebraPath& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, G.norm(a[k] - b[k]));
  return m;
}

double max_diff(const TangentField& X, const TangentField& Y) {
  double m = 0.0;
  for (std::size_t e = 0; e < X.edges(); ++e)
    m = std::max({m, max_diff(X.group, X.A0[e], Y.A0[e]), max_diff(X.group, X.A1[e], Y.A1[e])});
  return m;
}

double max_diff(const AlgebraNetwork& a, const AlgebraNetwork& b) {
  double m = 0.0;
  for (std::size_t e = 0; e < a.u.size(); ++e) m = std::max(m, max_diff(a.group, a.u[e], b.u[e]));
  return m;
}

AlgebraPath constant_path(int N, const AlgebraElement& x) { return AlgebraPath(N + 1, x); }

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

TEST_CASE("grid and quadrature") {
  CHECK(code_of([] { Grid(7); }) == ErrorCode::InvalidGrid);
  CHECK(code_of([] { Grid(6); }) == ErrorCode::InvalidGrid);
  const int N = 16;
  // the stencils are exact on quartics, Simpson on cubics
  std::vector<double> f(N + 1), df(N + 1), cubic(N + 1);
  for (int k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) / N;
    f[k] = 3 * t * t * t * t - 2 * t * t * t + t - 1;
    df[k] = 12 * t * t * t - 6 * t * t + 1;
    cubic[k] = 4 * t * t * t + 1;
  }
  const auto d = fd_derivative(f);
  for (int k = 0; k <= N; ++k) CHECK(d[k] == doctest::Approx(df[k]).epsilon(1e-10));
  CHECK(simpson(cubic) == doctest::Approx(2.0).epsilon(1e-14));
  const Eigen::SparseMatrix<double> F = fd_matrix(N);
  const Eigen::VectorXd fv = Eigen::Map<Eigen::VectorXd>(f.data(), N + 1);
  const Eigen::VectorXd dv = F * fv;
  for (int k = 0; k <= N; ++k) CHECK(dv(k) == doctest::Approx(df[k]).epsilon(1e-10));
}

TEST_CASE("residuals: trivial cases and sign conventions") {
  const int N = 16;
  auto q = pants();
  auto A = EdgeField::zero(SU2, N, 3);
  CHECK(max_of(lax_residual(A)) == 0.0);
  CHECK(max_of(kirchhoff_residual(q, A)) == 0.0);

  // commuting constant pair
  const auto xi = SU2.basis(2);
  A.A0[0] = constant_path(N, xi);
  A.A1[0] = constant_path(N, 0.7 * xi);
  CHECK(max_of(lax_residual(A)) <= 1e-12);

  std::mt19937_64 rng(1);
  const auto x1 = SU2.random_algebra(rng, 1.0), x2 = SU2.random_algebra(rng, 1.0), x3 = SU2.random_algebra(rng, 1.0);
  auto B = EdgeField::zero(SU2, N, 3);
  B.A1[q.edge_index("e1")] = constant_path(N, x1);
  B.A1[q.edge_index("e2")] = constant_path(N, x2);
  B.A1[q.edge_index("e3")] = constant_path(N, x3);
  CHECK(kirchhoff_residual(q, B).at("c") == doctest::Approx(SU2.norm(x1 + x2 - x3)));
  const auto mp = moment_psi(q, B);
  CHECK(SU2.norm(mp.kirchhoff.at("c") - (x3 - x1 - x2)) <= 1e-14);

  // a loop at v contributes A1(1) - A1(0)
  auto loop = Quiver::create({"i", "v"}, {{"a", "i", "v"}, {"l", "v", "v"}});
  auto L = EdgeField::zero(SU2, N, 2);
  for (int k = 0; k <= N; ++k) L.A1[loop.edge_index("l")][k] = (static_cast<double>(k) / N) * x1;
  CHECK(kirchhoff_residual(loop, L).at("v") == doctest::Approx(SU2.norm(x1)));
}

TEST_CASE("gauge_transform closed forms") {
  const int N = 400;
  std::mt19937_64 rng(2);
  auto q = seg();
  auto A = random_edge_field(q, SU2, N, rng, 0.5);
  CHECK(max_diff(gauge_transform(GaugeNetwork::identity(SU2, N, 1), A), A) == 0.0);

  const auto g0 = SU2.random_group(rng);
  GaugeNetwork c{SU2, N, {GroupPath(N + 1, g0)}};
  const auto cA = gauge_transform(c, A);
  for (int k = 0; k <= N; k += 50) {
    CHECK(SU2.norm(cA.A0[0][k] - SU2.Ad(g0, A.A0[0][k])) <= 1e-12);
    CHECK(SU2.norm(cA.A1[0][k] - SU2.Ad(g0, A.A1[0][k])) <= 1e-12);
  }

  const auto xi = SU2.random_algebra(rng, 1.0);
  GaugeNetwork arc{SU2, N, {GroupPath(N + 1, SU2.identity())}};
  for (int k = 0; k <= N; ++k) arc.g[0][k] = SU2.exp((static_cast<double>(k) / N) * xi);
  const auto r = gauge_transform(arc, EdgeField::zero(SU2, N, 1));
  CHECK(max_diff(SU2, r.A0[0], constant_path(N, -xi)) <= 1e-8);
  CHECK(max_diff(SU2, r.A1[0], constant_path(N, SU2.zero())) == 0.0);

  GaugeNetwork bad{SU2, N, {}};
  CHECK(code_of([&] { gauge_transform(bad, A); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("transport and phi_of_path") {
  const int N = 400;
  std::mt19937_64 rng(3);
  CHECK(distance(transport(SU2, constant_path(N, SU2.zero())).back(), SU2.identity()) == 0.0);

  for (auto kind : {GroupKind::UnitCircle, GroupKind::SU2, GroupKind::SO3}) {
    const LieGroup G(kind);
    const auto xi = G.random_algebra(rng, 1.5);
    const auto g = transport(G, constant_path(N, xi));
    CHECK(distance(g.back(), G.exp(-xi)) <= 1e-8);
    CHECK(distance(g[N / 4], G.exp(-0.25 * xi)) <= 1e-8);
    double defect = 0.0;
    for (const auto& x : g) defect = std::max(defect, G.group_defect(x.m));
    CHECK(defect <= 1e-10);
  }

  // Phi(exp(t xi)) = -xi and the round trip on a product of two arcs
  const auto xi = SU2.random_algebra(rng, 1.0), eta = SU2.random_algebra(rng, 1.0);
  GroupPath arc(N + 1, SU2.identity()), prod(N + 1, SU2.identity());
  for (int k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) / N;
    arc[k] = SU2.exp(t * xi);
    prod[k] = SU2.exp(t * xi) * SU2.exp(t * eta);
  }
  CHECK(max_diff(SU2, phi_of_path(SU2, arc), constant_path(N, -xi)) <= 1e-8);
  const auto back = transport(SU2, phi_of_path(SU2, prod));
  double err = 0.0;
  for (int k = 0; k <= N; ++k) err = std::max(err, distance(back[k], prod[k]));
  CHECK(err <= 1e-6);

  GroupPath shifted = prod;
  for (auto& x : shifted) x = SU2.exp(xi) * x;
  CHECK(code_of([&] { phi_of_path(SU2, shifted); }) == ErrorCode::NotBased);
}

TEST_CASE("parallel transport of a gauge-transformed field") {
  const int N = 400;
  std::mt19937_64 rng(4);
  auto q = pants();
  auto A = random_edge_field(q, SU2, N, rng, 0.6);
  const auto h = random_gauge(q, SU2, N, rng, 0.5, false);
  const auto gA = parallel_transport(A);
  const auto ghA = parallel_transport(gauge_transform(h, A));
  double err = 0.0;
  for (std::size_t e = 0; e < q.edge_count(); ++e)
    for (int k = 0; k <= N; ++k)
      err = std::max(err, distance(ghA.g[e][k], h.g[e][k] * gA.g[e][k] * h.g[e][0].inverse()));
  CHECK(err <= 1e-6);
}

TEST_CASE("synthesize_solution and moduli_coordinates") {
  const int N = 400;
  std::mt19937_64 rng(5);

  auto triv = synthesize_solution(pants(), CotangentPoint::trivial(SU2, 3), N);
  CHECK(max_diff(triv, EdgeField::zero(SU2, N, 3)) == 0.0);

  // seg: closed form and Lax residual
  auto s = seg();
  const auto Y = SU2.random_algebra(rng, 1.0), x = SU2.random_algebra(rng, 1.0);
  CotangentPoint p{SU2, {SU2.exp(Y)}, {x}};
  auto A = synthesize_solution(s, p, N);
  CHECK(max_diff(SU2, A.A0[0], constant_path(N, -Y)) <= 1e-12);
  CHECK(SU2.norm(A.A1[0][N / 2] - SU2.Ad(SU2.exp(0.5 * Y), x)) <= 1e-12);
  CHECK(max_of(lax_residual(A)) <= 1e-8);
  auto back = moduli_coordinates(s, A);
  CHECK(distance(back.a[0], p.a[0]) <= 1e-6);
  CHECK(SU2.norm(back.x[0] - x) <= 1e-12);

  // pants with nu = 0 built by hand: x3 = Ad_{a1} x1 + Ad_{a2} x2 (edge e3 leaves c)
  auto q = pants();
  CotangentPoint pp = CotangentPoint::trivial(SU2, 3);
  for (std::size_t e = 0; e < 3; ++e) {
    pp.a[e] = SU2.random_group(rng, 0.8);
    pp.x[e] = SU2.random_algebra(rng, 1.0);
  }
  const auto e1 = q.edge_index("e1"), e2 = q.edge_index("e2"), e3 = q.edge_index("e3");
  pp.x[e3] = SU2.Ad(pp.a[e1], pp.x[e1]) + SU2.Ad(pp.a[e2], pp.x[e2]);
  auto Ap = synthesize_solution(q, pp, N);
  CHECK(max_of(kirchhoff_residual(q, Ap)) <= 1e-9);
  const auto mp = moment_psi(q, Ap);
  double lax = 0.0;
  for (const auto& path : mp.lax)
    for (const auto& v : path) lax = std::max(lax, SU2.norm(v));
  CHECK(lax <= 1e-6);

  pp.x[e3] = pp.x[e3] + SU2.basis(0);
  CHECK(code_of([&] { synthesize_solution(q, pp, N); }) == ErrorCode::MomentNotZero);

  // constant commuting pair on a seg
  const auto xi = SU2.basis(1);
  auto C = EdgeField::zero(SU2, N, 1);
  C.A0[0] = constant_path(N, 0.9 * xi);
  C.A1[0] = constant_path(N, -0.4 * xi);
  auto pc = moduli_coordinates(s, C);
  CHECK(distance(pc.a[0], SU2.exp(-0.9 * xi)) <= 1e-8);
  CHECK(SU2.norm(pc.x[0] + 0.4 * xi) <= 1e-14);

  auto Z = EdgeField::zero(SU2, N, 3);
  auto pz = moduli_coordinates(q, Z);
  for (std::size_t e = 0; e < 3; ++e) CHECK(distance(pz.a[e], SU2.identity()) == 0.0);

  auto bad = random_edge_field(q, SU2, N, rng, 1.0);
  CHECK(code_of([&] { moduli_coordinates(q, bad); }) == ErrorCode::ResidualTooLarge);
}

TEST_CASE("phi is equivariant under the vertex gauge action") {
  const int N = 400;
  std::mt19937_64 rng(6);
  auto q = five();
  for (int trial = 0; trial < 3; ++trial) {
    auto p = random_zero_level_point(q, SU2, rng, 0.7);
    auto A = synthesize_solution(q, p, N);
    auto g = random_gauge(q, SU2, N, rng, 0.6, false);
    auto vals = vertex_values(q, g);
    REQUIRE(vals.has_value());
    // g.A carries the O(N^-4) error of the differentiated gauge, hence the looser acceptance
    auto lhs = moduli_coordinates(q, gauge_transform(g, A), 1e-4);
    auto rhs = act(q, *vals, moduli_coordinates(q, A));
    for (std::size_t e = 0; e < q.edge_count(); ++e) {
      CHECK(distance(lhs.a[e], rhs.a[e]) <= 1e-6);
      CHECK(SU2.norm(lhs.x[e] - rhs.x[e]) <= 1e-6);
    }
  }
}

TEST_CASE("gauge networks: matching and based") {
  const int N = 16;
  std::mt19937_64 rng(7);
  auto q = five();
  auto g = random_gauge(q, SU2, N, rng, 0.5);
  CHECK(is_vertex_matching(q, g));
  CHECK(is_based(q, g));
  auto u = random_gauge(q, SU2, N, rng, 0.5, false);
  CHECK(is_vertex_matching(q, u));
  CHECK_FALSE(is_based(q, u));
  g.g[0][N] = SU2.random_group(rng);
  CHECK_FALSE(is_vertex_matching(q, g));
  auto w = random_lie_g0(q, SU2, N, rng, 1.0);
  CHECK(in_lie_g0(q, w));
  w.u[0][0] = SU2.basis(0);
  CHECK_FALSE(in_lie_g0(q, w));
}

TEST_CASE("infinitesimal action against a finite-difference derivative of the gauge action") {
  const int N = 400;
  std::mt19937_64 rng(8);
  auto q = five();
  auto A = random_edge_field(q, SU2, N, rng, 0.7);
  auto u = random_lie_g0(q, SU2, N, rng, 0.8);
  auto Du = infinitesimal_action(q, A, u);

  const double s = 1e-4;
  auto along = [&](double sc) {
    GaugeNetwork g = GaugeNetwork::identity(SU2, N, q.edge_count());
    for (std::size_t e = 0; e < q.edge_count(); ++e)
      for (int k = 0; k <= N; ++k) g.g[e][k] = SU2.exp(sc * u.u[e][k]);
    return gauge_transform(g, A);
  };
  const auto plus = along(s), minus = along(-s);
  TangentField fd = A;
  for (std::size_t e = 0; e < q.edge_count(); ++e)
    for (int k = 0; k <= N; ++k) {
      fd.A0[e][k] = (1.0 / (2 * s)) * (plus.A0[e][k] - minus.A0[e][k]);
      fd.A1[e][k] = (1.0 / (2 * s)) * (plus.A1[e][k] - minus.A1[e][k]);
    }
  CHECK(max_diff(Du, fd) <= 1e-6);

  // A = 0 gives (-u', 0); u = 0 gives 0
  auto D0 = infinitesimal_action(q, EdgeField::zero(SU2, N, q.edge_count()), u);
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto du = fd_derivative(u.u[e]);
    for (int k = 0; k <= N; k += 40) CHECK(SU2.norm(D0.A0[e][k] + du[k]) <= 1e-14);
  }
  CHECK(max_diff(infinitesimal_action(q, A, AlgebraNetwork::zero(SU2, N, q.edge_count())),
                 EdgeField::zero(SU2, N, q.edge_count())) == 0.0);

  u.u[0][0] = SU2.basis(1);
  CHECK(code_of([&] { infinitesimal_action(q, A, u); }) == ErrorCode::NotInLieG0);
}

TEST_CASE("adjointness of D_A and D_A^*") {
  const int N = 400;
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto q = random_quiver(rng, 6);
    auto A = random_edge_field(q, SU2, N, rng, 0.8);
    auto u = random_lie_g0(q, SU2, N, rng, 1.0);
    auto Y = random_tangent(q, SU2, N, rng, 1.0);
    const double lhs = tangent_inner(infinitesimal_action(q, A, u), Y);
    const double rhs = pairing(q, u, coadjoint_op(q, A, Y));
    CHECK(std::abs(lhs - rhs) <= 1e-6 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("coadjoint operator and pairings: closed forms") {
  const int N = 16;
  std::mt19937_64 rng(10);
  auto q = pants();
  auto Z = EdgeField::zero(SU2, N, 3);
  auto Y = EdgeField::zero(SU2, N, 3);
  std::vector<AlgebraElement> c;
  for (std::size_t e = 0; e < 3; ++e) {
    c.push_back(SU2.random_algebra(rng, 1.0));
    Y.A0[e] = constant_path(N, c.back());
  }
  auto img = coadjoint_op(q, Z, Y);
  for (const auto& path : img.path) CHECK(max_diff(SU2, path, constant_path(N, SU2.zero())) <= 1e-12);
  // c has e3 outgoing, e1, e2 incoming
  const auto expect = c[q.edge_index("e3")] - c[q.edge_index("e1")] - c[q.edge_index("e2")];
  CHECK(SU2.norm(img.vertex.at("c") - expect) <= 1e-14);

  auto u = random_lie_g0(q, SU2, N, rng, 1.0);
  CoadjointImage only_vertex{std::vector<AlgebraPath>(3, constant_path(N, SU2.zero())), {{"c", expect}}};
  const auto uc = u.u[q.edge_index("e3")][0];
  CHECK(pairing(q, u, only_vertex) == doctest::Approx(SU2.inner(uc, expect)));

  auto X = random_tangent(q, SU2, N, rng, 1.0);
  auto W = random_tangent(q, SU2, N, rng, 1.0);
  CHECK(std::abs(symplectic_form(X, X)) <= 1e-14);
  CHECK(symplectic_form(X, W) == doctest::Approx(-symplectic_form(W, X)));
}

TEST_CASE("network ODE: kernel dimension and surjectivity") {
  const int N = 160;
  std::mt19937_64 rng(11);
  auto check_kernel = [&](const Quiver& q, int dim, bool random_B) {
    NetworkOde ode;
    ode.N = N;
    ode.dim = dim;
    if (random_B) {
      for (std::size_t e = 0; e < q.edge_count(); ++e) {
        EndoPath Bp(N + 1);
        const Eigen::MatrixXd B0 = Eigen::MatrixXd::Random(dim, dim), B1 = Eigen::MatrixXd::Random(dim, dim);
        for (int k = 0; k <= N; ++k) Bp[k] = B0 + std::sin(3.0 * k / N) * B1;
        ode.B.push_back(Bp);
      }
    }
    const auto tree = spanning_tree(q, *default_root(q));
    const long expected = (static_cast<long>(q.edge_count()) - static_cast<long>(q.interior_vertices().size())) * dim;
    CHECK(static_cast<long>(boundary_slots(q, tree).size()) * dim == expected);
    CHECK(numerical_rank(boundary_to_solution_matrix(q, tree, ode), 1e-8) == expected);
    return ode;
  };
  check_kernel(seg(), 3, false);
  check_kernel(pants(), 3, false);
  check_kernel(five(), 2, true);
  for (int i = 0; i < 5; ++i) check_kernel(random_quiver(rng, 7), 2, true);

  // seg with B = 0: kernel is constant functions
  {
    auto q = seg();
    NetworkOde ode{N, 2, {}, {}, {}};
    const auto tree = spanning_tree(q, "v");
    Eigen::VectorXd c(2);
    c << 0.3, -1.2;
    auto x = solve_network_ode(q, tree, ode, {c});
    for (const auto& val : x[0]) CHECK((val - c).norm() <= 1e-14);
    auto z = solve_network_ode(q, tree, ode, {Eigen::VectorXd::Zero(2)});
    for (const auto& val : z[0]) CHECK(val.norm() == 0.0);
  }

  // surjectivity: random (a, b) and data are matched to within the discretization
  auto q = five();
  auto ode = check_kernel(q, 3, true);
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    VecPath ap(N + 1);
    const Eigen::VectorXd a0 = Eigen::VectorXd::Random(3), a1 = Eigen::VectorXd::Random(3);
    for (int k = 0; k <= N; ++k) ap[k] = a0 + std::cos(2.0 * k / N) * a1;
    ode.a.push_back(ap);
  }
  for (auto v : q.interior_vertices()) ode.b[q.vertex_id(v)] = Eigen::VectorXd::Random(3);
  const auto tree = spanning_tree(q, *default_root(q));
  std::vector<Eigen::VectorXd> data;
  for (std::size_t i = 0; i < boundary_slots(q, tree).size(); ++i) data.push_back(Eigen::VectorXd::Random(3));
  auto x = solve_network_ode(q, tree, ode, data);
  CHECK(network_residual(q, ode, x) <= 1e-6);

  CHECK(code_of([&] { solve_network_ode(q, spanning_tree(q, "a"), ode, data); }) == ErrorCode::RootNotBoundary);
}

TEST_CASE("L_0: Dirichlet problem on a seg") {
  const int N = 100;
  auto q = seg();
  VertexLaplacian L(q, EdgeField::zero(SU2, N, 1));
  CoadjointImage rhs{{constant_path(N, SU2.basis(0))}, {}};
  for (auto method : {VertexLaplacian::Method::Sparse, VertexLaplacian::Method::Dense}) {
    auto u = L.solve(rhs, method);
    double err = 0.0;
    for (int k = 0; k <= N; ++k) {
      const double t = static_cast<double>(k) / N;
      err = std::max(err, SU2.norm(u.u[0][k] - (t * (1 - t) / 2) * SU2.basis(0)));
    }
    CHECK(err <= 1e-8);
  }
  auto uc = solve_l0_constructive(q, SU2, N, rhs);
  for (int k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) / N;
    CHECK(SU2.norm(uc.u[0][k] - (t * (1 - t) / 2) * SU2.basis(0)) <= 1e-8);
  }
}

TEST_CASE("L_0: constructive solve agrees with the assembled operator") {
  std::mt19937_64 rng(12);
  auto random_rhs = [&](const Quiver& q, int N) {
    CoadjointImage r;
    for (std::size_t e = 0; e < q.edge_count(); ++e) r.path.push_back(random_smooth_path(SU2, N, rng, 1.0));
    for (auto v : q.interior_vertices()) r.vertex.emplace(q.vertex_id(v), SU2.random_algebra(rng, 1.0));
    return r;
  };
  // star with one interior vertex and zero path data: piecewise linear
  {
    const int N = 50;
    auto q = Quiver::create({"i1", "i2", "c", "o1", "o2"},
                            {{"a1", "i1", "c"}, {"a2", "i2", "c"}, {"b1", "c", "o1"}, {"b2", "c", "o2"}});
    CoadjointImage r{std::vector<AlgebraPath>(4, constant_path(N, SU2.zero())), {{"c", SU2.basis(2)}}};
    auto uc = solve_l0_constructive(q, SU2, N, r);
    auto ud = VertexLaplacian(q, EdgeField::zero(SU2, N, 4)).solve(r, VertexLaplacian::Method::Dense);
    CHECK(max_diff(uc, ud) <= 1e-8);
    // M = [4], z = basis(2): c = basis(2)/4, linear along every leg
    const auto b1 = q.edge_index("b1");
    CHECK(SU2.norm(uc.u[b1][N / 2] - (0.125) * SU2.basis(2)) <= 1e-12);
  }
  for (const auto& q : {pants(), five()}) {
    const int N = 100;
    auto r = random_rhs(q, N);
    VertexLaplacian L(q, EdgeField::zero(SU2, N, q.edge_count()));
    auto uc = solve_l0_constructive(q, SU2, N, r);
    CHECK(max_diff(uc, L.solve(r, VertexLaplacian::Method::Dense)) <= 1e-8);
    CHECK(max_diff(uc, L.solve(r, VertexLaplacian::Method::Sparse)) <= 1e-8);
    CHECK(in_lie_g0(q, uc));
  }
  {
    const int N = 400;
    auto q = five();
    auto r = random_rhs(q, N);
    VertexLaplacian L(q, EdgeField::zero(SU2, N, q.edge_count()));
    CHECK(max_diff(solve_l0_constructive(q, SU2, N, r), L.solve(r)) <= 1e-8);
  }
}

TEST_CASE("L_A equals D_A^* D_A on Lie(G0) and is invertible") {
  const int N = 48;
  std::mt19937_64 rng(13);
  auto q = pants();
  auto A = random_edge_field(q, SU2, N, rng, 0.8);
  VertexLaplacian L(q, A);
  auto u = random_lie_g0(q, SU2, N, rng, 1.0);
  const Eigen::VectorXd lhs = L.matrix() * L.pack(u);
  const Eigen::VectorXd rhs = L.pack_rhs(coadjoint_op(q, A, infinitesimal_action(q, A, u)));
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>()));
  CHECK(max_diff(L.unpack(L.pack(u)), u) <= 1e-14);

  const double dense = L.smallest_singular_value(true);
  const double iter = L.smallest_singular_value(false);
  CHECK(dense > 1e-6);
  CHECK(iter == doctest::Approx(dense).epsilon(1e-6));
  for (int trial = 0; trial < 3; ++trial) {
    auto B = random_edge_field(five(), SU2, 32, rng, 1.0);
    CHECK(VertexLaplacian(five(), B).smallest_singular_value() > 1e-6);
  }
}

TEST_CASE("Newton gauge fixing") {
  const int N = 100;
  std::mt19937_64 rng(14);
  auto q = five();
  auto p = random_zero_level_point(q, SU2, rng, 0.7);
  auto A = synthesize_solution(q, p, N);

  auto same = gauge_fix_to_slice(q, A, A);
  CHECK(same.iterations == 0);
  CHECK(distance_from_identity(same.s) == 0.0);

  for (int trial = 0; trial < 3; ++trial) {
    auto g = random_gauge(q, SU2, N, rng, 0.015);
    REQUIRE(distance_from_identity(g) <= 0.05);
    auto B = gauge_transform(g, A);
    auto r = gauge_fix_to_slice(q, A, B);
    CHECK(r.iterations <= 8);
    CHECK(r.residual <= 1e-8);
    CHECK(slice_residual(q, A, gauge_transform(r.s, B)) <= 1e-8);
    CHECK(is_based(q, r.s));
    // quadratic convergence: each residual well below the previous one
    for (std::size_t i = 2; i < r.history.size(); ++i) CHECK(r.history[i] <= 0.5 * r.history[i - 1]);
  }

  // B = A + eps Y with D_A^* Y = 0: s = I up to O(eps^2)
  VertexLaplacian L(q, A);
  auto Y = random_tangent(q, SU2, N, rng, 1.0);
  auto u = L.solve(coadjoint_op(q, A, Y));
  auto Du = infinitesimal_action(q, A, u);
  for (std::size_t e = 0; e < q.edge_count(); ++e)
    for (int k = 0; k <= N; ++k) {
      Y.A0[e][k] -= Du.A0[e][k];
      Y.A1[e][k] -= Du.A1[e][k];
    }
  std::vector<double> dist;
  for (double eps : {1e-2, 1e-3}) {
    auto B = A;
    for (std::size_t e = 0; e < q.edge_count(); ++e)
      for (int k = 0; k <= N; ++k) {
        B.A0[e][k] += eps * Y.A0[e][k];
        B.A1[e][k] += eps * Y.A1[e][k];
      }
    auto r = gauge_fix_to_slice(q, A, B);
    dist.push_back(distance_from_identity(r.s));
    CHECK(dist.back() <= 10 * eps * eps);
  }

  auto far = random_gauge(q, SU2, N, rng, 3.0);
  CHECK(code_of([&] { gauge_fix_to_slice(q, A, gauge_transform(far, random_edge_field(q, SU2, N, rng, 3.0))); }) ==
        ErrorCode::NewtonDiverged);
}

TEST_CASE("gauge invariance of residuals: fourth-order convergence") {
  std::mt19937_64 rng(15);
  auto q = five();
  auto p = random_zero_level_point(q, SU2, rng, 0.7);
  std::vector<double> res;
  for (int N : {100, 200, 400}) {
    std::mt19937_64 grng(99);
    auto A = synthesize_solution(q, p, N);
    auto g = random_gauge(q, SU2, N, grng, 0.6);
    res.push_back(max_of(lax_residual(gauge_transform(g, A))));
  }
  CHECK(observed_order(res[0], res[1]) >= 3.5);
  CHECK(observed_order(res[1], res[2]) >= 3.5);
}
