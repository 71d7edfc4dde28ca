#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <optional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lk/cotangent.hpp"
#include "lk/liegroup.hpp"
#include "lk/quiver.hpp"

namespace lk {

// ---------------------------------------------------------------- grid

/// Uniform grid t_k = k/N on [0,1]; N even and >= 8 so composite Simpson applies.
struct Grid {
  int N;

  explicit Grid(int n);
  int nodes() const { return N + 1; }
  double h() const { return 1.0 / N; }
  double t(int k) const { return static_cast<double>(k) / N; }
};

/// Row k of the fourth-order derivative stencil: first node index and five
/// weights, to be scaled by N. Central in the interior, one-sided at k = 0, 1,
/// N-1, N.
struct Stencil {
  int start;
  std::array<double, 5> w;
};
Stencil fd_stencil(int N, int k);

/// The derivative stencil as an (N+1) x (N+1) sparse matrix (already scaled).
Eigen::SparseMatrix<double> fd_matrix(int N);

std::vector<double> simpson_weights(int N);

template <class T>
std::vector<T> fd_derivative(const std::vector<T>& f) {
  const int N = static_cast<int>(f.size()) - 1;
  std::vector<T> out(f.size(), f[0]);
  for (int k = 0; k <= N; ++k) {
    const auto s = fd_stencil(N, k);
    T acc = (s.w[0] * N) * f[s.start];
    for (int j = 1; j < 5; ++j) acc = acc + (s.w[j] * N) * f[s.start + j];
    out[k] = acc;
  }
  return out;
}

double simpson(const std::vector<double>& values);

// ---------------------------------------------------------------- field types

using AlgebraPath = std::vector<AlgebraElement>;
using GroupPath = std::vector<GroupElement>;

/// Sampled pair (A0, A1) per edge, indexed by the quiver's edge order.
struct EdgeField {
  LieGroup group;
  int N;
  std::vector<AlgebraPath> A0;
  std::vector<AlgebraPath> A1;

  static EdgeField zero(const LieGroup& group, int N, std::size_t edges);
  std::size_t edges() const { return A0.size(); }
};

/// Tangent vectors to the field space and the targets (Y0, Y1) share the shape.
using TangentField = EdgeField;

struct GaugeNetwork {
  LieGroup group;
  int N;
  std::vector<GroupPath> g;

  static GaugeNetwork identity(const LieGroup& group, int N, std::size_t edges);
};

/// Sampled algebra-valued network, e.g. an element of Lie(G0).
struct AlgebraNetwork {
  LieGroup group;
  int N;
  std::vector<AlgebraPath> u;

  static AlgebraNetwork zero(const LieGroup& group, int N, std::size_t edges);
};

/// Vertex values g(v) if the endpoints agree at every vertex within `tol`.
std::optional<VertexGroupData> vertex_values(const Quiver& q, const GaugeNetwork& g, double tol = 1e-9);
bool is_vertex_matching(const Quiver& q, const GaugeNetwork& g, double tol = 1e-9);
/// Vertex matching and trivial at every boundary vertex.
bool is_based(const Quiver& q, const GaugeNetwork& g, double tol = 1e-9);
bool in_lie_g0(const Quiver& q, const AlgebraNetwork& u, double tol = 1e-9);

// ---------------------------------------------------------------- residuals

/// Per edge, max over nodes of |dA1/dt + [A0, A1]|.
std::vector<double> lax_residual(const EdgeField& A);

/// Per interior vertex, |sum_{t(e)=v} A1(1) - sum_{s(e)=v} A1(0)|.
std::map<std::string, double> kirchhoff_residual(const Quiver& q, const EdgeField& A);

double max_of(const std::vector<double>& v);
double max_of(const std::map<std::string, double>& m);

struct MomentPsi {
  std::vector<AlgebraPath> lax;  // dA1/dt + [A0, A1]
  VertexAlgebraData kirchhoff;   // sum_{s(e)=v} A1(0) - sum_{t(e)=v} A1(1)
};
MomentPsi moment_psi(const Quiver& q, const EdgeField& A);

// ---------------------------------------------------------------- gauge action and transport

/// (g A0 g^-1 - g' g^-1, g A1 g^-1) with g' by the derivative stencil.
EdgeField gauge_transform(const GaugeNetwork& g, const EdgeField& A);

/// Solves g' + v g = 0, g(0) = I, by RK4 on a grid refined by `refine`, with
/// cubic interpolation of v between nodes and projection onto the group
/// after every step.
GroupPath transport(const LieGroup& G, const AlgebraPath& v, int refine = 2);

/// -g' g^-1 projected onto the algebra; throws NotBased unless g(0) = I.
AlgebraPath phi_of_path(const LieGroup& G, const GroupPath& g);

/// Per edge g_A with g_A' + A0 g_A = 0, g_A(0) = I.
GaugeNetwork parallel_transport(const EdgeField& A);

/// (g_A(1), A1(0)) per edge; throws ResidualTooLarge when the Lax or Kirchhoff
/// residual exceeds `tol`.
CotangentPoint moduli_coordinates(const Quiver& q, const EdgeField& A, double tol = 1e-6);

/// Exact solution through (a, x): A0 = -log a, A1(t) = Ad_{exp(t log a)} x.
/// Throws MomentNotZero unless nu(p) vanishes within `tol`.
EdgeField synthesize_solution(const Quiver& q, const CotangentPoint& p, int N, double tol = 1e-9);

// ---------------------------------------------------------------- linear operators

/// D_A u = ([u, A0] - u', [u, A1]); throws NotInLieG0.
TangentField infinitesimal_action(const Quiver& q, const EdgeField& A, const AlgebraNetwork& u);

struct CoadjointImage {
  std::vector<AlgebraPath> path;  // Y0' + [A0, Y0] + [A1, Y1]
  VertexAlgebraData vertex;       // sum_{s(e)=v} Y0(0) - sum_{t(e)=v} Y0(1)
};
/// D_A^* Y.
CoadjointImage coadjoint_op(const Quiver& q, const EdgeField& A, const TangentField& Y);

/// int <u, Y> + sum_v <u(v), Z(v)> over interior vertices.
double pairing(const Quiver& q, const AlgebraNetwork& u, const CoadjointImage& yz);
/// int <Y0, Y0'> + <Y1, Y1'>.
double tangent_inner(const TangentField& Y, const TangentField& Yp);
/// int <X0, Y1> - <X1, Y0>.
double symplectic_form(const TangentField& X, const TangentField& Y);

// ---------------------------------------------------------------- network ODE

using VecPath = std::vector<Eigen::VectorXd>;
using EndoPath = std::vector<Eigen::MatrixXd>;

/// x' + B x = a on every edge, sum_{s(e)=v} x_e(0) - sum_{t(e)=v} x_e(1) = b_v at
/// interior v. An empty B means B = 0; an empty `a` means a = 0; missing b
/// entries are zero.
struct NetworkOde {
  int N = 0;
  int dim = 0;
  std::vector<EndoPath> B;
  std::vector<VecPath> a;
  std::map<std::string, Eigen::VectorXd> b;
};

/// Which endpoint value of which edge is prescribed: x_e(1) off the tree,
/// x_e(0) on boundary-source edges except the root edge, x_e(1) on
/// boundary-target edges except the root edge.
struct BoundarySlot {
  std::size_t edge;
  bool at_end;  // true: value at t = 1
};
std::vector<BoundarySlot> boundary_slots(const Quiver& q, const SpanningTree& tree);

/// Leaves-to-root propagation; `data[i]` is the value for slot i. Throws
/// RootNotBoundary and Disconnected.
std::vector<VecPath> solve_network_ode(const Quiver& q, const SpanningTree& tree, const NetworkOde& ode,
                                       const std::vector<Eigen::VectorXd>& data);

/// Max over edges/nodes of |x' + Bx - a| and over vertices of the Kirchhoff defect.
double network_residual(const Quiver& q, const NetworkOde& ode, const std::vector<VecPath>& x);

/// Columns: solutions (all node values stacked) for unit boundary data with
/// a = 0, b = 0. Its rank is the dimension of ker R.
Eigen::MatrixXd boundary_to_solution_matrix(const Quiver& q, const SpanningTree& tree, const NetworkOde& ode);

/// Numerical rank with singular values compared against `threshold` times the largest.
long numerical_rank(const Eigen::MatrixXd& m, double threshold = 1e-8);

// ---------------------------------------------------------------- L_A = D_A^* D_A

/// Discrete L_A on Lie(G0): unknowns are the interior node values of every
/// edge plus the values at interior vertices (endpoint values are eliminated
/// through the vertex values, and vanish at the boundary); equations are the
/// path component at interior nodes plus the vertex sums. Coordinates are
/// taken in the orthonormal algebra basis.
class VertexLaplacian {
 public:
  enum class Method { Sparse, Dense };

  VertexLaplacian(const Quiver& q, const EdgeField& A);

  int size() const { return static_cast<int>(L_.rows()); }
  const Eigen::SparseMatrix<double>& matrix() const { return L_; }

  Eigen::VectorXd pack(const AlgebraNetwork& u) const;
  AlgebraNetwork unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd pack_rhs(const CoadjointImage& r) const;
  CoadjointImage unpack_rhs(const Eigen::VectorXd& r) const;

  AlgebraNetwork solve(const CoadjointImage& rhs, Method method = Method::Sparse) const;
  Eigen::VectorXd solve_vector(const Eigen::VectorXd& rhs, Method method = Method::Sparse) const;

  /// Dense SVD when `dense`, otherwise inverse iteration on L^T L.
  double smallest_singular_value(bool dense = true) const;

  // building blocks, exposed for the gauge-fixing Jacobian and for tests
  const Eigen::SparseMatrix<double>& embed() const { return emb_; }
  const Eigen::SparseMatrix<double>& restrict_rows() const { return restrict_; }
  const Eigen::SparseMatrix<double>& d_matrix() const { return d_; }
  const Eigen::SparseMatrix<double>& dstar_matrix() const { return dstar_; }

 private:
  Quiver q_;
  LieGroup G_;
  int N_;
  int d_dim_;
  std::vector<std::size_t> interior_;
  std::map<std::size_t, int> interior_pos_;
  Eigen::SparseMatrix<double> emb_, d_, dstar_, restrict_, L_;
};

VertexLaplacian assemble_vertex_laplacian(const Quiver& q, const EdgeField& A);

/// L_0 u = rhs solved as in the constructive argument: a Dirichlet solve per
/// edge for w, then u = w + c_s + (c_t - c_s) t with c from the graph
/// Laplacian system M c = z.
AlgebraNetwork solve_l0_constructive(const Quiver& q, const LieGroup& G, int N, const CoadjointImage& rhs);

// ---------------------------------------------------------------- gauge fixing

struct GaugeFixOptions {
  double tol = 1e-8;
  int max_iterations = 12;
};

struct GaugeFixResult {
  GaugeNetwork s;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;  // residual before each step, then the final one
};

/// Max-norm of D_A^*(C - A) on the square system (interior nodes and vertex sums).
double slice_residual(const Quiver& q, const EdgeField& A, const EdgeField& C);

/// Newton iteration s <- exp(delta) s on Lie(G0) for D_A^*(s.B - A) = 0 with
/// the exact discrete Jacobian. Throws NewtonDiverged when the residual stops
/// decreasing, blows up, or the iteration cap is reached.
GaugeFixResult gauge_fix_to_slice(const Quiver& q, const EdgeField& A, const EdgeField& B,
                                  const GaugeFixOptions& opts = {});

// ---------------------------------------------------------------- sampling

/// c0 + sum_{m=1,2} (c_m cos(m pi t) + s_m sin(m pi t)), random coefficients.
AlgebraPath random_smooth_path(const LieGroup& G, int N, std::mt19937_64& rng, double scale);
EdgeField random_edge_field(const Quiver& q, const LieGroup& G, int N, std::mt19937_64& rng, double scale);
TangentField random_tangent(const Quiver& q, const LieGroup& G, int N, std::mt19937_64& rng, double scale);
/// Linear interpolation of random vertex values (zero at the boundary) plus
/// sine bumps vanishing at both ends.
AlgebraNetwork random_lie_g0(const Quiver& q, const LieGroup& G, int N, std::mt19937_64& rng, double scale);
/// g_e(t) = exp(t log(g_t g_s^-1)) g_s exp(sin(pi t) Z_e) with random vertex
/// values (identity at the boundary, or everywhere random when `based` is
/// false).
GaugeNetwork random_gauge(const Quiver& q, const LieGroup& G, int N, std::mt19937_64& rng, double scale,
                          bool based = true);
/// max over edges and nodes of the operator-norm distance |g - I|.
double distance_from_identity(const GaugeNetwork& g);

}  // namespace lk
