#include "lk/fields.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lk {

// ---------------------------------------------------------------- grid

Grid::Grid(int n) : N(n) {
  if (n < 8 || n % 2 != 0) {
    throw Error(ErrorCode::InvalidGrid, "grid N must be even and >= 8, got " + std::to_string(n));
  }
}

Stencil fd_stencil(int N, int k) {
  constexpr double c = 1.0 / 12.0;
  if (k == 0) return {0, {-25 * c, 48 * c, -36 * c, 16 * c, -3 * c}};
  if (k == 1) return {0, {-3 * c, -10 * c, 18 * c, -6 * c, 1 * c}};
  if (k == N - 1) return {N - 4, {-1 * c, 6 * c, -18 * c, 10 * c, 3 * c}};
  if (k == N) return {N - 4, {3 * c, -16 * c, 36 * c, -48 * c, 25 * c}};
  return {k - 2, {1 * c, -8 * c, 0.0, 8 * c, -1 * c}};
}

Eigen::SparseMatrix<double> fd_matrix(int N) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k <= N; ++k) {
    const auto s = fd_stencil(N, k);
    for (int j = 0; j < 5; ++j)
      if (s.w[j] != 0.0) trip.emplace_back(k, s.start + j, s.w[j] * N);
  }
  Eigen::SparseMatrix<double> m(N + 1, N + 1);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

std::vector<double> simpson_weights(int N) {
  std::vector<double> w(N + 1);
  const double h = 1.0 / N;
  for (int k = 0; k <= N; ++k) w[k] = (k == 0 || k == N) ? h / 3.0 : (k % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
  return w;
}

double simpson(const std::vector<double>& values) {
  const auto w = simpson_weights(static_cast<int>(values.size()) - 1);
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += w[k] * values[k];
  return s;
}

// ---------------------------------------------------------------- field types

EdgeField EdgeField::zero(const LieGroup& group, int N, std::size_t edges) {
  Grid grid(N);
  AlgebraPath z(grid.nodes(), group.zero());
  return {group, N, std::vector<AlgebraPath>(edges, z), std::vector<AlgebraPath>(edges, z)};
}

GaugeNetwork GaugeNetwork::identity(const LieGroup& group, int N, std::size_t edges) {
  Grid grid(N);
  return {group, N, std::vector<GroupPath>(edges, GroupPath(grid.nodes(), group.identity()))};
}

AlgebraNetwork AlgebraNetwork::zero(const LieGroup& group, int N, std::size_t edges) {
  Grid grid(N);
  return {group, N, std::vector<AlgebraPath>(edges, AlgebraPath(grid.nodes(), group.zero()))};
}

namespace {

void check_field(const Quiver& q, const EdgeField& A) {
  Grid grid(A.N);
  if (A.A0.size() != q.edge_count() || A.A1.size() != q.edge_count()) {
    throw Error(ErrorCode::ShapeMismatch, "field has " + std::to_string(A.A0.size()) + " edges, quiver has " +
                                              std::to_string(q.edge_count()));
  }
  for (std::size_t e = 0; e < A.A0.size(); ++e) {
    if (static_cast<int>(A.A0[e].size()) != grid.nodes() || static_cast<int>(A.A1[e].size()) != grid.nodes()) {
      throw Error(ErrorCode::ShapeMismatch, "edge " + q.edge_id(e) + " has the wrong number of samples");
    }
  }
}

void check_same_shape(const EdgeField& A, const EdgeField& B) {
  if (!(A.group == B.group) || A.N != B.N || A.A0.size() != B.A0.size()) {
    throw Error(ErrorCode::ShapeMismatch, "fields differ in group, grid or edge count");
  }
}

// value of a network at vertex v, read from the first incident edge end
template <class Path>
const typename Path::value_type& at_vertex(const Quiver& q, const std::vector<Path>& paths, std::size_t v) {
  if (!q.out_edges(v).empty()) return paths[q.out_edges(v).front()].front();
  return paths[q.in_edges(v).front()].back();
}

// Cubic Lagrange interpolation through the four nodes around t.
template <class T>
T cubic_at(const std::vector<T>& f, double t) {
  const int N = static_cast<int>(f.size()) - 1;
  const double x = t * N;
  const int j0 = std::clamp(static_cast<int>(std::floor(x)) - 1, 0, N - 3);
  double w[4];
  for (int i = 0; i < 4; ++i) {
    w[i] = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != i) w[i] *= (x - (j0 + m)) / static_cast<double>(i - m);
  }
  T acc = w[0] * f[j0];
  for (int i = 1; i < 4; ++i) acc = acc + w[i] * f[j0 + i];
  return acc;
}

std::vector<Mat> matrices(const GroupPath& g) {
  std::vector<Mat> out;
  out.reserve(g.size());
  for (const auto& x : g) out.push_back(x.m);
  return out;
}

}  // namespace

std::optional<VertexGroupData> vertex_values(const Quiver& q, const GaugeNetwork& g, double tol) {
  VertexGroupData out(q.vertex_count(), g.group.identity());
  for (std::size_t v = 0; v < q.vertex_count(); ++v) {
    const auto& ref = at_vertex(q, g.g, v);
    for (auto e : q.out_edges(v))
      if ((g.g[e].front().m - ref.m).norm() > tol) return std::nullopt;
    for (auto e : q.in_edges(v))
      if ((g.g[e].back().m - ref.m).norm() > tol) return std::nullopt;
    out[v] = ref;
  }
  return out;
}

bool is_vertex_matching(const Quiver& q, const GaugeNetwork& g, double tol) {
  return vertex_values(q, g, tol).has_value();
}

bool is_based(const Quiver& q, const GaugeNetwork& g, double tol) {
  auto vals = vertex_values(q, g, tol);
  if (!vals) return false;
  for (std::size_t v = 0; v < q.vertex_count(); ++v)
    if (q.is_boundary(v) && ((*vals)[v].m - g.group.identity().m).norm() > tol) return false;
  return true;
}

bool in_lie_g0(const Quiver& q, const AlgebraNetwork& u, double tol) {
  for (std::size_t v = 0; v < q.vertex_count(); ++v) {
    const auto& ref = at_vertex(q, u.u, v);
    for (auto e : q.out_edges(v))
      if ((u.u[e].front().m - ref.m).norm() > tol) return false;
    for (auto e : q.in_edges(v))
      if ((u.u[e].back().m - ref.m).norm() > tol) return false;
    if (q.is_boundary(v) && ref.m.norm() > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------- residuals

MomentPsi moment_psi(const Quiver& q, const EdgeField& A) {
  check_field(q, A);
  const auto& G = A.group;
  MomentPsi out;
  for (std::size_t e = 0; e < A.edges(); ++e) {
    auto d = fd_derivative(A.A1[e]);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += G.bracket(A.A0[e][k], A.A1[e][k]);
    out.lax.push_back(std::move(d));
  }
  for (auto v : q.interior_vertices()) {
    AlgebraElement s = G.zero();
    for (auto e : q.out_edges(v)) s += A.A1[e].front();
    for (auto e : q.in_edges(v)) s -= A.A1[e].back();
    out.kirchhoff.emplace(q.vertex_id(v), s);
  }
  return out;
}

std::vector<double> lax_residual(const EdgeField& A) {
  const auto& G = A.group;
  std::vector<double> out;
  for (std::size_t e = 0; e < A.edges(); ++e) {
    const auto d = fd_derivative(A.A1[e]);
    double m = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) m = std::max(m, G.norm(d[k] + G.bracket(A.A0[e][k], A.A1[e][k])));
    out.push_back(m);
  }
  return out;
}

std::map<std::string, double> kirchhoff_residual(const Quiver& q, const EdgeField& A) {
  check_field(q, A);
  std::map<std::string, double> out;
  for (const auto& [id, s] : moment_psi(q, A).kirchhoff) out[id] = A.group.norm(s);
  return out;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double max_of(const std::map<std::string, double>& m) {
  double r = 0.0;
  for (const auto& [k, x] : m) r = std::max(r, x);
  return r;
}

// ---------------------------------------------------------------- gauge action and transport

EdgeField gauge_transform(const GaugeNetwork& g, const EdgeField& A) {
  if (!(g.group == A.group) || g.N != A.N || g.g.size() != A.edges()) {
    throw Error(ErrorCode::ShapeMismatch, "gauge network and field differ in group, grid or edge count");
  }
  const auto& G = A.group;
  EdgeField out = A;
  for (std::size_t e = 0; e < A.edges(); ++e) {
    const auto gm = matrices(g.g[e]);
    const auto dg = fd_derivative(gm);
    for (std::size_t k = 0; k < gm.size(); ++k) {
      const Mat inv = gm[k].adjoint();
      out.A0[e][k] = G.project_to_algebra(gm[k] * A.A0[e][k].m * inv - dg[k] * inv);
      out.A1[e][k] = G.Ad(g.g[e][k], A.A1[e][k]);
    }
  }
  return out;
}

GroupPath transport(const LieGroup& G, const AlgebraPath& v, int refine) {
  const int N = static_cast<int>(v.size()) - 1;
  Grid grid(N);
  const int steps = N * refine;
  const double dt = 1.0 / steps;
  GroupPath out(N + 1, G.identity());
  Mat g = G.identity().m;
  auto f = [&](double t, const Mat& x) -> Mat { return -(cubic_at(v, t).m * x); };
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const Mat k1 = f(t, g);
    const Mat k2 = f(t + 0.5 * dt, g + (0.5 * dt) * k1);
    const Mat k3 = f(t + 0.5 * dt, g + (0.5 * dt) * k2);
    const Mat k4 = f(t + dt, g + dt * k3);
    g = G.project_to_group(g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).m;
    if ((s + 1) % refine == 0) out[(s + 1) / refine] = {g};
  }
  return out;
}

AlgebraPath phi_of_path(const LieGroup& G, const GroupPath& g) {
  Grid grid(static_cast<int>(g.size()) - 1);
  if ((g.front().m - G.identity().m).norm() > 1e-9) throw Error(ErrorCode::NotBased, "path does not start at I");
  const auto gm = matrices(g);
  const auto dg = fd_derivative(gm);
  AlgebraPath out;
  out.reserve(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) out.push_back(G.project_to_algebra(-(dg[k] * gm[k].adjoint())));
  return out;
}

GaugeNetwork parallel_transport(const EdgeField& A) {
  GaugeNetwork out{A.group, A.N, {}};
  for (const auto& a0 : A.A0) out.g.push_back(transport(A.group, a0));
  return out;
}

CotangentPoint moduli_coordinates(const Quiver& q, const EdgeField& A, double tol) {
  check_field(q, A);
  const double lax = max_of(lax_residual(A));
  const double kir = max_of(kirchhoff_residual(q, A));
  if (lax > tol || kir > tol) {
    throw Error(ErrorCode::ResidualTooLarge,
                "Lax residual " + std::to_string(lax) + ", Kirchhoff residual " + std::to_string(kir));
  }
  const auto gA = parallel_transport(A);
  CotangentPoint p = CotangentPoint::trivial(A.group, A.edges());
  for (std::size_t e = 0; e < A.edges(); ++e) {
    p.a[e] = gA.g[e].back();
    p.x[e] = A.A1[e].front();
  }
  return p;
}

EdgeField synthesize_solution(const Quiver& q, const CotangentPoint& p, int N, double tol) {
  const double nu = max_norm(p.group, moment_interior(q, p));
  if (nu > tol) throw Error(ErrorCode::MomentNotZero, "interior moment " + std::to_string(nu));
  const auto& G = p.group;
  Grid grid(N);
  EdgeField A = EdgeField::zero(G, N, q.edge_count());
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto Y = G.log(p.a[e]);
    for (int k = 0; k <= N; ++k) {
      A.A0[e][k] = -Y;
      A.A1[e][k] = G.Ad(G.exp(grid.t(k) * Y), p.x[e]);
    }
  }
  return A;
}

// ---------------------------------------------------------------- linear operators

TangentField infinitesimal_action(const Quiver& q, const EdgeField& A, const AlgebraNetwork& u) {
  check_field(q, A);
  if (u.N != A.N || u.u.size() != A.edges()) throw Error(ErrorCode::ShapeMismatch, "u does not match the field");
  if (!in_lie_g0(q, u)) throw Error(ErrorCode::NotInLieG0, "u is not vertex-matching and boundary-trivial");
  const auto& G = A.group;
  TangentField Y = A;
  for (std::size_t e = 0; e < A.edges(); ++e) {
    const auto du = fd_derivative(u.u[e]);
    for (std::size_t k = 0; k < du.size(); ++k) {
      Y.A0[e][k] = G.bracket(u.u[e][k], A.A0[e][k]) - du[k];
      Y.A1[e][k] = G.bracket(u.u[e][k], A.A1[e][k]);
    }
  }
  return Y;
}

CoadjointImage coadjoint_op(const Quiver& q, const EdgeField& A, const TangentField& Y) {
  check_field(q, A);
  check_same_shape(A, Y);
  const auto& G = A.group;
  CoadjointImage out;
  for (std::size_t e = 0; e < A.edges(); ++e) {
    auto d = fd_derivative(Y.A0[e]);
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] += G.bracket(A.A0[e][k], Y.A0[e][k]) + G.bracket(A.A1[e][k], Y.A1[e][k]);
    }
    out.path.push_back(std::move(d));
  }
  for (auto v : q.interior_vertices()) {
    AlgebraElement s = G.zero();
    for (auto e : q.out_edges(v)) s += Y.A0[e].front();
    for (auto e : q.in_edges(v)) s -= Y.A0[e].back();
    out.vertex.emplace(q.vertex_id(v), s);
  }
  return out;
}

double pairing(const Quiver& q, const AlgebraNetwork& u, const CoadjointImage& yz) {
  const auto& G = u.group;
  double s = 0.0;
  for (std::size_t e = 0; e < u.u.size(); ++e) {
    std::vector<double> f(u.u[e].size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = G.inner(u.u[e][k], yz.path[e][k]);
    s += simpson(f);
  }
  for (const auto& [id, z] : yz.vertex) s += G.inner(at_vertex(q, u.u, q.vertex_index(id)), z);
  return s;
}

double tangent_inner(const TangentField& Y, const TangentField& Yp) {
  check_same_shape(Y, Yp);
  const auto& G = Y.group;
  double s = 0.0;
  for (std::size_t e = 0; e < Y.edges(); ++e) {
    std::vector<double> f(Y.A0[e].size());
    for (std::size_t k = 0; k < f.size(); ++k)
      f[k] = G.inner(Y.A0[e][k], Yp.A0[e][k]) + G.inner(Y.A1[e][k], Yp.A1[e][k]);
    s += simpson(f);
  }
  return s;
}

double symplectic_form(const TangentField& X, const TangentField& Y) {
  check_same_shape(X, Y);
  const auto& G = X.group;
  double s = 0.0;
  for (std::size_t e = 0; e < X.edges(); ++e) {
    std::vector<double> f(X.A0[e].size());
    for (std::size_t k = 0; k < f.size(); ++k)
      f[k] = G.inner(X.A0[e][k], Y.A1[e][k]) - G.inner(X.A1[e][k], Y.A0[e][k]);
    s += simpson(f);
  }
  return s;
}

// ---------------------------------------------------------------- network ODE

std::vector<BoundarySlot> boundary_slots(const Quiver& q, const SpanningTree& tree) {
  std::vector<BoundarySlot> out;
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto& ed = q.edge(e);
    if (!tree.in_tree[e]) {
      out.push_back({e, true});
      continue;
    }
    if (q.is_boundary(ed.src) && ed.src != tree.root) out.push_back({e, false});
    if (q.is_boundary(ed.dst) && ed.dst != tree.root) out.push_back({e, true});
  }
  return out;
}

namespace {

// One edge of x' = a - Bx from a prescribed endpoint value.
VecPath integrate_edge(const NetworkOde& ode, std::size_t e, const Eigen::VectorXd& x0, bool from_end) {
  const int N = ode.N;
  const int refine = 2;
  const int steps = N * refine;
  const double dt = (from_end ? -1.0 : 1.0) / steps;
  const bool hasB = !ode.B.empty();
  const bool hasA = !ode.a.empty();
  auto rhs = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(ode.dim);
    if (hasA) r += cubic_at(ode.a[e], t);
    if (hasB) r -= cubic_at(ode.B[e], t) * x;
    return r;
  };
  VecPath out(N + 1, Eigen::VectorXd::Zero(ode.dim));
  Eigen::VectorXd x = x0;
  double t = from_end ? 1.0 : 0.0;
  out[from_end ? N : 0] = x;
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd k1 = rhs(t, x);
    const Eigen::VectorXd k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = rhs(t + dt, x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = from_end ? 1.0 - (s + 1) * (1.0 / steps) : (s + 1) * (1.0 / steps);
    if ((s + 1) % refine == 0) {
      const int node = (s + 1) / refine;
      out[from_end ? N - node : node] = x;
    }
  }
  return out;
}

Eigen::VectorXd b_at(const NetworkOde& ode, const std::string& id) {
  auto it = ode.b.find(id);
  return it == ode.b.end() ? Eigen::VectorXd::Zero(ode.dim) : it->second;
}

}  // namespace

std::vector<VecPath> solve_network_ode(const Quiver& q, const SpanningTree& tree, const NetworkOde& ode,
                                       const std::vector<Eigen::VectorXd>& data) {
  Grid grid(ode.N);
  if (tree.order.size() != q.vertex_count()) throw Error(ErrorCode::Disconnected, "tree does not span the quiver");
  if (!q.is_boundary(tree.root)) {
    throw Error(ErrorCode::RootNotBoundary, "root '" + q.vertex_id(tree.root) + "' is interior");
  }
  const auto slots = boundary_slots(q, tree);
  if (data.size() != slots.size()) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(slots.size()) + " boundary values, got " +
                                              std::to_string(data.size()));
  }
  std::vector<VecPath> x(q.edge_count());
  std::vector<bool> known(q.edge_count(), false);
  std::map<std::pair<std::size_t, bool>, std::size_t> slot_of;
  for (std::size_t i = 0; i < slots.size(); ++i) slot_of[{slots[i].edge, slots[i].at_end}] = i;

  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (tree.in_tree[slots[i].edge]) continue;
    x[slots[i].edge] = integrate_edge(ode, slots[i].edge, data[i], true);
    known[slots[i].edge] = true;
  }
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const auto v = *it;
    if (!tree.parent_edge[v]) continue;
    const auto c = *tree.parent_edge[v];
    const bool v_is_end = q.edge(c).dst == v;
    Eigen::VectorXd start;
    if (q.is_boundary(v)) {
      start = data[slot_of.at({c, v_is_end})];
    } else {
      // sum_{s(e)=v} x_e(0) - sum_{t(e)=v} x_e(1) = b_v, solved for the parent edge's end at v
      Eigen::VectorXd rest = Eigen::VectorXd::Zero(ode.dim);
      for (auto e : q.out_edges(v)) {
        if (e == c) continue;
        if (!known[e]) throw Error(ErrorCode::Disconnected, "propagation order broken at " + q.vertex_id(v));
        rest += x[e].front();
      }
      for (auto e : q.in_edges(v)) {
        if (e == c) continue;
        if (!known[e]) throw Error(ErrorCode::Disconnected, "propagation order broken at " + q.vertex_id(v));
        rest -= x[e].back();
      }
      const Eigen::VectorXd bv = b_at(ode, q.vertex_id(v));
      start = v_is_end ? Eigen::VectorXd(rest - bv) : Eigen::VectorXd(bv - rest);
    }
    x[c] = integrate_edge(ode, c, start, v_is_end);
    known[c] = true;
  }
  return x;
}

double network_residual(const Quiver& q, const NetworkOde& ode, const std::vector<VecPath>& x) {
  double r = 0.0;
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto dx = fd_derivative(x[e]);
    for (std::size_t k = 0; k < dx.size(); ++k) {
      Eigen::VectorXd res = dx[k];
      if (!ode.B.empty()) res += ode.B[e][k] * x[e][k];
      if (!ode.a.empty()) res -= ode.a[e][k];
      r = std::max(r, res.norm());
    }
  }
  for (auto v : q.interior_vertices()) {
    Eigen::VectorXd s = -b_at(ode, q.vertex_id(v));
    for (auto e : q.out_edges(v)) s += x[e].front();
    for (auto e : q.in_edges(v)) s -= x[e].back();
    r = std::max(r, s.norm());
  }
  return r;
}

Eigen::MatrixXd boundary_to_solution_matrix(const Quiver& q, const SpanningTree& tree, const NetworkOde& ode) {
  NetworkOde hom = ode;
  hom.a.clear();
  hom.b.clear();
  const auto slots = boundary_slots(q, tree);
  const int k = ode.dim;
  const int rows = static_cast<int>(q.edge_count()) * (ode.N + 1) * k;
  Eigen::MatrixXd m(rows, static_cast<int>(slots.size()) * k);
  std::vector<Eigen::VectorXd> data(slots.size(), Eigen::VectorXd::Zero(k));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (int a = 0; a < k; ++a) {
      data[i](a) = 1.0;
      const auto x = solve_network_ode(q, tree, hom, data);
      data[i](a) = 0.0;
      int r = 0;
      for (const auto& path : x)
        for (const auto& val : path)
          for (int c = 0; c < k; ++c) m(r++, static_cast<int>(i) * k + a) = val(c);
    }
  }
  return m;
}

long numerical_rank(const Eigen::MatrixXd& m, double threshold) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  long r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > threshold * s(0)) ++r;
  return r;
}

// ---------------------------------------------------------------- L_A

namespace {

using Trip = Eigen::Triplet<double>;

void add_block(std::vector<Trip>& t, int row, int col, const CoordMatrix& b, double scale = 1.0) {
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j)
      if (b(i, j) != 0.0) t.emplace_back(row + i, col + j, scale * b(i, j));
}

void add_identity(std::vector<Trip>& t, int row, int col, int d, double scale) {
  for (int i = 0; i < d; ++i) t.emplace_back(row + i, col + i, scale);
}

Eigen::SparseMatrix<double> from_triplets(int rows, int cols, const std::vector<Trip>& t) {
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

struct Layout {
  int E, N, d, nint;
  int full() const { return E * (N + 1) * d; }
  int fi(int e, int k) const { return (e * (N + 1) + k) * d; }
  int path_unknowns() const { return E * (N - 1) * d; }
  int ui(int e, int k) const { return (e * (N - 1) + (k - 1)) * d; }
  int vi(int pos) const { return path_unknowns() + pos * d; }
  int unknowns() const { return path_unknowns() + nint * d; }
};

Eigen::VectorXd vec_of(const LieGroup& G, const std::vector<AlgebraPath>& paths, const Layout& L) {
  Eigen::VectorXd out(L.full());
  for (int e = 0; e < L.E; ++e)
    for (int k = 0; k <= L.N; ++k) out.segment(L.fi(e, k), L.d) = G.coords(paths[e][k]);
  return out;
}

double blockwise_max(const Eigen::VectorXd& v, int d) {
  double m = 0.0;
  for (int i = 0; i + d <= v.size(); i += d) m = std::max(m, v.segment(i, d).norm());
  return m;
}

}  // namespace

VertexLaplacian::VertexLaplacian(const Quiver& q, const EdgeField& A)
    : q_(q), G_(A.group), N_(A.N), d_dim_(A.group.dim()), interior_(q.interior_vertices()) {
  check_field(q, A);
  for (std::size_t i = 0; i < interior_.size(); ++i) interior_pos_[interior_[i]] = static_cast<int>(i);
  const Layout L{static_cast<int>(q.edge_count()), N_, d_dim_, static_cast<int>(interior_.size())};
  const int d = d_dim_;
  const int nfull = L.full();

  std::vector<Trip> t;
  for (int e = 0; e < L.E; ++e) {
    for (int k = 1; k < N_; ++k) add_identity(t, L.fi(e, k), L.ui(e, k), d, 1.0);
    const auto s = q.edge(e).src, dst = q.edge(e).dst;
    if (q.is_interior(s)) add_identity(t, L.fi(e, 0), L.vi(interior_pos_.at(s)), d, 1.0);
    if (q.is_interior(dst)) add_identity(t, L.fi(e, N_), L.vi(interior_pos_.at(dst)), d, 1.0);
  }
  emb_ = from_triplets(nfull, L.unknowns(), t);

  t.clear();
  for (int e = 0; e < L.E; ++e) {
    for (int k = 0; k <= N_; ++k) {
      add_block(t, L.fi(e, k), L.fi(e, k), G_.ad_matrix(A.A0[e][k]), -1.0);
      const auto st = fd_stencil(N_, k);
      for (int j = 0; j < 5; ++j)
        if (st.w[j] != 0.0) add_identity(t, L.fi(e, k), L.fi(e, st.start + j), d, -st.w[j] * N_);
      add_block(t, nfull + L.fi(e, k), L.fi(e, k), G_.ad_matrix(A.A1[e][k]), -1.0);
    }
  }
  d_ = from_triplets(2 * nfull, nfull, t);

  t.clear();
  for (int e = 0; e < L.E; ++e) {
    for (int k = 0; k <= N_; ++k) {
      const auto st = fd_stencil(N_, k);
      for (int j = 0; j < 5; ++j)
        if (st.w[j] != 0.0) add_identity(t, L.fi(e, k), L.fi(e, st.start + j), d, st.w[j] * N_);
      add_block(t, L.fi(e, k), L.fi(e, k), G_.ad_matrix(A.A0[e][k]));
      add_block(t, L.fi(e, k), nfull + L.fi(e, k), G_.ad_matrix(A.A1[e][k]));
    }
  }
  for (int pos = 0; pos < L.nint; ++pos) {
    const auto v = interior_[pos];
    for (auto e : q.out_edges(v)) add_identity(t, nfull + pos * d, L.fi(static_cast<int>(e), 0), d, 1.0);
    for (auto e : q.in_edges(v)) add_identity(t, nfull + pos * d, L.fi(static_cast<int>(e), N_), d, -1.0);
  }
  dstar_ = from_triplets(nfull + L.nint * d, 2 * nfull, t);

  t.clear();
  for (int e = 0; e < L.E; ++e)
    for (int k = 1; k < N_; ++k) add_identity(t, L.ui(e, k), L.fi(e, k), d, 1.0);
  for (int pos = 0; pos < L.nint; ++pos) add_identity(t, L.vi(pos), nfull + pos * d, d, 1.0);
  restrict_ = from_triplets(L.unknowns(), nfull + L.nint * d, t);

  L_ = restrict_ * dstar_ * d_ * emb_;
  L_.makeCompressed();
}

Eigen::VectorXd VertexLaplacian::pack(const AlgebraNetwork& u) const {
  const Layout L{static_cast<int>(q_.edge_count()), N_, d_dim_, static_cast<int>(interior_.size())};
  Eigen::VectorXd x(L.unknowns());
  for (int e = 0; e < L.E; ++e)
    for (int k = 1; k < N_; ++k) x.segment(L.ui(e, k), d_dim_) = G_.coords(u.u[e][k]);
  for (int pos = 0; pos < L.nint; ++pos) x.segment(L.vi(pos), d_dim_) = G_.coords(at_vertex(q_, u.u, interior_[pos]));
  return x;
}

AlgebraNetwork VertexLaplacian::unpack(const Eigen::VectorXd& x) const {
  const Layout L{static_cast<int>(q_.edge_count()), N_, d_dim_, static_cast<int>(interior_.size())};
  const Eigen::VectorXd full = emb_ * x;
  AlgebraNetwork u = AlgebraNetwork::zero(G_, N_, q_.edge_count());
  for (int e = 0; e < L.E; ++e)
    for (int k = 0; k <= N_; ++k) u.u[e][k] = G_.from_coords(full.segment(L.fi(e, k), d_dim_));
  return u;
}

Eigen::VectorXd VertexLaplacian::pack_rhs(const CoadjointImage& r) const {
  const Layout L{static_cast<int>(q_.edge_count()), N_, d_dim_, static_cast<int>(interior_.size())};
  Eigen::VectorXd x(L.unknowns());
  for (int e = 0; e < L.E; ++e)
    for (int k = 1; k < N_; ++k) x.segment(L.ui(e, k), d_dim_) = G_.coords(r.path[e][k]);
  for (int pos = 0; pos < L.nint; ++pos) {
    auto it = r.vertex.find(q_.vertex_id(interior_[pos]));
    x.segment(L.vi(pos), d_dim_) = it == r.vertex.end() ? Coords::Zero(d_dim_) : G_.coords(it->second);
  }
  return x;
}

CoadjointImage VertexLaplacian::unpack_rhs(const Eigen::VectorXd& x) const {
  const Layout L{static_cast<int>(q_.edge_count()), N_, d_dim_, static_cast<int>(interior_.size())};
  CoadjointImage r;
  r.path.assign(q_.edge_count(), AlgebraPath(N_ + 1, G_.zero()));
  for (int e = 0; e < L.E; ++e)
    for (int k = 1; k < N_; ++k) r.path[e][k] = G_.from_coords(x.segment(L.ui(e, k), d_dim_));
  for (int pos = 0; pos < L.nint; ++pos)
    r.vertex.emplace(q_.vertex_id(interior_[pos]), G_.from_coords(x.segment(L.vi(pos), d_dim_)));
  return r;
}

Eigen::VectorXd VertexLaplacian::solve_vector(const Eigen::VectorXd& rhs, Method method) const {
  if (method == Method::Dense) {
    const Eigen::MatrixXd dense(L_);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
    return lu.solve(rhs);
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(L_);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "sparse LU failed: " + lu.lastErrorMessage());
  return lu.solve(rhs);
}

AlgebraNetwork VertexLaplacian::solve(const CoadjointImage& rhs, Method method) const {
  return unpack(solve_vector(pack_rhs(rhs), method));
}

double VertexLaplacian::smallest_singular_value(bool dense) const {
  if (dense) {
    const Eigen::MatrixXd m(L_);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu, lut;
  lu.compute(L_);
  const Eigen::SparseMatrix<double> Lt = L_.transpose();
  lut.compute(Lt);
  if (lu.info() != Eigen::Success || lut.info() != Eigen::Success) return 0.0;
  std::mt19937_64 rng(0);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(L_.rows());
  for (int i = 0; i < x.size(); ++i) x(i) = normal(rng);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    const Eigen::VectorXd w = lu.solve(Eigen::VectorXd(lut.solve(x)));
    const double next = w.norm();
    x = w / next;
    if (std::abs(next - lambda) <= 1e-12 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return 1.0 / std::sqrt(lambda);
}

VertexLaplacian assemble_vertex_laplacian(const Quiver& q, const EdgeField& A) { return VertexLaplacian(q, A); }

AlgebraNetwork solve_l0_constructive(const Quiver& q, const LieGroup& G, int N, const CoadjointImage& rhs) {
  Grid grid(N);
  const int d = G.dim();
  const Eigen::SparseMatrix<double> F = fd_matrix(N);
  const Eigen::MatrixXd F2 = Eigen::MatrixXd(F * F);
  const Eigen::MatrixXd T = -F2.block(1, 1, N - 1, N - 1);
  Eigen::PartialPivLU<Eigen::MatrixXd> dirichlet(T);
  const Eigen::MatrixXd Fd(F);

  const auto interior = q.interior_vertices();
  std::map<std::size_t, int> pos;
  for (std::size_t i = 0; i < interior.size(); ++i) pos[interior[i]] = static_cast<int>(i);

  // w per edge: -FD(FD w) = f at interior nodes, w = 0 at both ends
  std::vector<Eigen::MatrixXd> w(q.edge_count(), Eigen::MatrixXd::Zero(N + 1, d));
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    Eigen::MatrixXd f(N - 1, d);
    for (int k = 1; k < N; ++k) f.row(k - 1) = G.coords(rhs.path[e][k]).transpose();
    w[e].block(1, 0, N - 1, d) = dirichlet.solve(f);
  }

  const int n = static_cast<int>(interior.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, d);
  for (int i = 0; i < n; ++i) {
    auto it = rhs.vertex.find(q.vertex_id(interior[i]));
    if (it != rhs.vertex.end()) z.row(i) = G.coords(it->second).transpose();
  }
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto s = q.edge(e).src, t = q.edge(e).dst;
    const Eigen::RowVectorXd dw0 = Fd.row(0) * w[e];
    const Eigen::RowVectorXd dw1 = Fd.row(N) * w[e];
    if (q.is_interior(s)) z.row(pos.at(s)) += dw0;
    if (q.is_interior(t)) z.row(pos.at(t)) -= dw1;
    if (s == t) continue;
    if (q.is_interior(s)) M(pos.at(s), pos.at(s)) += 1.0;
    if (q.is_interior(t)) M(pos.at(t), pos.at(t)) += 1.0;
    if (q.is_interior(s) && q.is_interior(t)) {
      M(pos.at(s), pos.at(t)) -= 1.0;
      M(pos.at(t), pos.at(s)) -= 1.0;
    }
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, d);
  if (n > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularSystem, "vertex system M(c) = z is singular");
    c = lu.solve(z);
  }
  AlgebraNetwork u = AlgebraNetwork::zero(G, N, q.edge_count());
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto s = q.edge(e).src, t = q.edge(e).dst;
    const Eigen::RowVectorXd cs = q.is_interior(s) ? Eigen::RowVectorXd(c.row(pos.at(s))) : Eigen::RowVectorXd::Zero(d);
    const Eigen::RowVectorXd ct = q.is_interior(t) ? Eigen::RowVectorXd(c.row(pos.at(t))) : Eigen::RowVectorXd::Zero(d);
    for (int k = 0; k <= N; ++k) {
      const Eigen::RowVectorXd val = w[e].row(k) + cs + grid.t(k) * (ct - cs);
      u.u[e][k] = G.from_coords(val.transpose());
    }
  }
  return u;
}

// ---------------------------------------------------------------- gauge fixing

namespace {

Eigen::VectorXd tangent_vec(const TangentField& Y, const Layout& L) {
  Eigen::VectorXd out(2 * L.full());
  out.head(L.full()) = vec_of(Y.group, Y.A0, L);
  out.tail(L.full()) = vec_of(Y.group, Y.A1, L);
  return out;
}

TangentField difference(const EdgeField& C, const EdgeField& A) {
  TangentField D = C;
  for (std::size_t e = 0; e < C.edges(); ++e)
    for (std::size_t k = 0; k < C.A0[e].size(); ++k) {
      D.A0[e][k] = C.A0[e][k] - A.A0[e][k];
      D.A1[e][k] = C.A1[e][k] - A.A1[e][k];
    }
  return D;
}

// coords of Proj(e_b M) (right = true) or Proj(M e_b) for every basis b
CoordMatrix multiplication_block(const LieGroup& G, const Mat& M, bool right) {
  CoordMatrix out(G.dim(), G.dim());
  for (int b = 0; b < G.dim(); ++b) {
    const Mat eb = G.basis(b).m;
    out.col(b) = G.coords(G.project_to_algebra(right ? Mat(eb * M) : Mat(M * eb)));
  }
  return out;
}

}  // namespace

double slice_residual(const Quiver& q, const EdgeField& A, const EdgeField& C) {
  check_same_shape(A, C);
  const VertexLaplacian ops(q, A);
  const Layout L{static_cast<int>(q.edge_count()), A.N, A.group.dim(), static_cast<int>(q.interior_vertices().size())};
  const Eigen::VectorXd r = ops.restrict_rows() * (ops.dstar_matrix() * tangent_vec(difference(C, A), L));
  return blockwise_max(r, A.group.dim());
}

GaugeFixResult gauge_fix_to_slice(const Quiver& q, const EdgeField& A, const EdgeField& B, const GaugeFixOptions& opts) {
  check_field(q, A);
  check_same_shape(A, B);
  const auto& G = A.group;
  const int d = G.dim();
  const int N = A.N;
  const VertexLaplacian ops(q, A);
  const Layout L{static_cast<int>(q.edge_count()), N, d, static_cast<int>(q.interior_vertices().size())};
  const Eigen::SparseMatrix<double> RDs = ops.restrict_rows() * ops.dstar_matrix();

  GaugeFixResult res{GaugeNetwork::identity(G, N, q.edge_count()), 0, 0.0, {}};
  for (int it = 0;; ++it) {
    const EdgeField C = gauge_transform(res.s, B);
    const Eigen::VectorXd r = RDs * tangent_vec(difference(C, A), L);
    const double norm = blockwise_max(r, d);
    res.history.push_back(norm);
    res.residual = norm;
    res.iterations = it;
    if (norm <= opts.tol) return res;
    if (!std::isfinite(norm) || (it > 0 && norm >= res.history[it - 1]) || it >= opts.max_iterations) {
      throw Error(ErrorCode::NewtonDiverged, "residual " + std::to_string(norm) + " after " + std::to_string(it) +
                                                 " iterations");
    }

    // Jacobian of delta -> D_A^*(exp(delta) s . B - A) at delta = 0
    std::vector<Trip> t;
    const int nfull = L.full();
    for (int e = 0; e < L.E; ++e) {
      const auto gm = matrices(res.s.g[e]);
      const auto dg = fd_derivative(gm);
      for (int i = 0; i <= N; ++i) {
        const Mat inv = gm[i].adjoint();
        add_block(t, L.fi(e, i), L.fi(e, i), G.ad_matrix(C.A0[e][i]), -1.0);
        add_block(t, L.fi(e, i), L.fi(e, i), multiplication_block(G, dg[i] * inv, false));
        const auto st = fd_stencil(N, i);
        for (int j = 0; j < 5; ++j) {
          if (st.w[j] == 0.0) continue;
          const int col = st.start + j;
          add_block(t, L.fi(e, i), L.fi(e, col), multiplication_block(G, gm[col] * inv, true), -st.w[j] * N);
        }
        add_block(t, nfull + L.fi(e, i), L.fi(e, i), G.ad_matrix(C.A1[e][i]), -1.0);
      }
    }
    const Eigen::SparseMatrix<double> dG = from_triplets(2 * nfull, nfull, t);
    Eigen::SparseMatrix<double> J = RDs * dG * ops.embed();
    J.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "gauge-fixing Jacobian is singular");
    const Eigen::VectorXd delta = ops.embed() * Eigen::VectorXd(lu.solve(-r));
    if (!delta.allFinite() || blockwise_max(delta, d) > 1.0) {
      throw Error(ErrorCode::NewtonDiverged, "Newton step too large");
    }
    for (int e = 0; e < L.E; ++e)
      for (int i = 0; i <= N; ++i)
        res.s.g[e][i] = G.exp(G.from_coords(delta.segment(L.fi(e, i), d))) * res.s.g[e][i];
  }
}

// ---------------------------------------------------------------- sampling

AlgebraPath random_smooth_path(const LieGroup& G, int N, std::mt19937_64& rng, double scale) {
  Grid grid(N);
  const auto c0 = G.random_algebra(rng, scale);
  std::vector<AlgebraElement> c, s;
  for (int m = 1; m <= 2; ++m) {
    c.push_back(G.random_algebra(rng, scale / m));
    s.push_back(G.random_algebra(rng, scale / m));
  }
  AlgebraPath out(grid.nodes(), G.zero());
  for (int k = 0; k <= N; ++k) {
    AlgebraElement x = c0;
    for (int m = 1; m <= 2; ++m) {
      const double a = m * std::numbers::pi * grid.t(k);
      x += std::cos(a) * c[m - 1] + std::sin(a) * s[m - 1];
    }
    out[k] = x;
  }
  return out;
}

EdgeField random_edge_field(const Quiver& q, const LieGroup& G, int N, std::mt19937_64& rng, double scale) {
  EdgeField A{G, N, {}, {}};
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    A.A0.push_back(random_smooth_path(G, N, rng, scale));
    A.A1.push_back(random_smooth_path(G, N, rng, scale));
  }
  return A;
}

TangentField random_tangent(const Quiver& q, const LieGroup& G, int N, std::mt19937_64& rng, double scale) {
  return random_edge_field(q, G, N, rng, scale);
}

AlgebraNetwork random_lie_g0(const Quiver& q, const LieGroup& G, int N, std::mt19937_64& rng, double scale) {
  Grid grid(N);
  std::vector<AlgebraElement> c(q.vertex_count(), G.zero());
  for (std::size_t v = 0; v < q.vertex_count(); ++v)
    if (q.is_interior(v)) c[v] = G.random_algebra(rng, scale);
  AlgebraNetwork u = AlgebraNetwork::zero(G, N, q.edge_count());
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto b1 = G.random_algebra(rng, scale);
    const auto b2 = G.random_algebra(rng, scale / 2);
    const auto& cs = c[q.edge(e).src];
    const auto& ct = c[q.edge(e).dst];
    for (int k = 0; k <= N; ++k) {
      const double t = grid.t(k);
      u.u[e][k] = (1.0 - t) * cs + t * ct + std::sin(std::numbers::pi * t) * b1 + std::sin(2 * std::numbers::pi * t) * b2;
    }
    // exact endpoint values so vertex matching holds to the last bit
    u.u[e].front() = cs;
    u.u[e].back() = ct;
  }
  return u;
}

GaugeNetwork random_gauge(const Quiver& q, const LieGroup& G, int N, std::mt19937_64& rng, double scale, bool based) {
  Grid grid(N);
  VertexGroupData gv(q.vertex_count(), G.identity());
  for (std::size_t v = 0; v < q.vertex_count(); ++v)
    if (!based || q.is_interior(v)) gv[v] = G.random_group(rng, scale);
  GaugeNetwork g = GaugeNetwork::identity(G, N, q.edge_count());
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    const auto& gs = gv[q.edge(e).src];
    const auto& gt = gv[q.edge(e).dst];
    const auto Z = G.random_algebra(rng, scale);
    const auto L = G.log(gt * gs.inverse());
    for (int k = 0; k <= N; ++k) {
      const double t = grid.t(k);
      g.g[e][k] = G.exp(t * L) * gs * G.exp(std::sin(std::numbers::pi * t) * Z);
    }
    g.g[e].front() = gs;
    g.g[e].back() = gt;
  }
  return g;
}

double distance_from_identity(const GaugeNetwork& g) {
  double m = 0.0;
  const Mat I = g.group.identity().m;
  for (const auto& path : g.g) {
    for (const auto& x : path) {
      Eigen::JacobiSVD<Mat> svd(x.m - I);
      m = std::max(m, svd.singularValues()(0));
    }
  }
  return m;
}

}  // namespace lk
