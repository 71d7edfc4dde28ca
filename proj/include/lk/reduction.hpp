#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lk/cotangent.hpp"
#include "lk/fields.hpp"
#include "lk/quiver.hpp"

namespace lk {

/// A point in tree-normal form together with the tree that defines the slice.
struct ReducedPoint {
  CotangentPoint point;
  SpanningTree tree;
};

struct NormalForm {
  ReducedPoint reduced;
  VertexGroupData b;  // act(b, p) == reduced.point; identity on the boundary
};

/// Edges whose group coordinate the slice pins to I: for every interior
/// vertex, the tree edge through which BFS first reaches it.
std::vector<bool> pinned_edges(const Quiver& q, const SpanningTree& tree);

/// Walks the tree from the root and picks b_v at each interior vertex so the
/// pinned edge's a becomes I. Throws RootNotBoundary, MomentNotZero.
NormalForm normal_form(const Quiver& q, const SpanningTree& tree, const CotangentPoint& p, double tol = 1e-9);
/// Same, with the default tree.
NormalForm normal_form(const Quiver& q, const CotangentPoint& p, double tol = 1e-9);

/// Max over edges of |a - a'| (Frobenius) and |x - x'|.
double point_distance(const CotangentPoint& p, const CotangentPoint& q);

/// Free real coordinates left on the slice: dim G per unpinned a, plus the x
/// coordinates minus the rank of x -> nu(a, x) at the point.
long free_parameter_count(const Quiver& q, const ReducedPoint& r);

/// Witness b with act(b, p) = p' when the normal forms (with the default tree)
/// agree within `tol`.
std::optional<VertexGroupData> same_orbit(const Quiver& q, const CotangentPoint& p, const CotangentPoint& pp,
                                          double tol = 2e-9);

struct GluedPoint {
  GlueResult glued;
  CotangentPoint point;
};

/// Concatenates edge data along glue_with_maps. Throws DiagonalMomentNonzero
/// unless lambda_1(v1) + lambda_2(v2) = 0 within `tol` for every matched pair.
GluedPoint glue_points(const Quiver& q1, const CotangentPoint& p1, const Quiver& q2, const CotangentPoint& p2,
                       const std::vector<std::pair<std::string, std::string>>& match, double tol = 1e-8);

/// Random zero-level pair (p1, p2) whose boundary moments cancel along the
/// match. Throws ClosedComponent when the glued quiver would have no boundary.
std::pair<CotangentPoint, CotangentPoint> random_matched_points(
    const Quiver& q1, const Quiver& q2, const std::vector<std::pair<std::string, std::string>>& match,
    const LieGroup& G, std::mt19937_64& rng);

struct CappedPoint {
  Quiver quiver;
  CotangentPoint point;
};

/// Reduction by G at the boundary vertex v0: needs lambda(v0) = 0 within
/// `tol`, after which x on v0's edge vanishes and the edge is dropped. When
/// the edge is a whole seg component both ends go. Throws NotBoundary,
/// MomentNotZero, EndpointBecomesBoundary (the other end would drop to degree 1).
CappedPoint reduce_boundary(const Quiver& q, const CotangentPoint& p, const std::string& v0, double tol = 1e-8);

/// Random zero-level point with lambda(v0) = 0.
CotangentPoint random_cappable_point(const Quiver& q, const std::string& v0, const LieGroup& G, std::mt19937_64& rng);

/// sgn(v) A1(v) at boundary vertices: A1(1) at targets, -A1(0) at sources.
VertexAlgebraData boundary_field_values(const Quiver& q, const EdgeField& A);

struct PullbackValues {
  double numeric;
  double closed_form;
};

/// Integrates the symplectic form of the field space on the images of two
/// tangent vectors under the differential of psi, sampled on N nodes, and the
/// cotangent form on the same pair. Throws MomentNotZero.
PullbackValues pullback_check(const Quiver& q, const CotangentPoint& p, const CotangentTangent& t1,
                              const CotangentTangent& t2, int N = 400);

/// Random element of G^V; identity on the boundary when `interior_only`.
VertexGroupData random_vertex_group(const Quiver& q, const LieGroup& G, std::mt19937_64& rng, double scale = 1.0,
                                    bool interior_only = true);

CotangentTangent random_cotangent_tangent(const LieGroup& G, std::size_t edges, std::mt19937_64& rng);

}  // namespace lk
