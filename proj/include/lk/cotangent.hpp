#pragma once

#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lk/liegroup.hpp"
#include "lk/quiver.hpp"

namespace lk {

/// Point (a, x) of T*G^E = (G x g)^E, left-trivialised; indexed by the
/// quiver's edge order.
struct CotangentPoint {
  LieGroup group;
  std::vector<GroupElement> a;
  std::vector<AlgebraElement> x;

  static CotangentPoint trivial(const LieGroup& group, std::size_t edges);
  std::size_t size() const { return a.size(); }
};

/// Element of G^V, indexed by the quiver's vertex order.
using VertexGroupData = std::vector<GroupElement>;

/// Algebra values keyed by vertex id (interior vertices for moments of the
/// interior action, boundary vertices for the boundary moment).
using VertexAlgebraData = std::map<std::string, AlgebraElement>;

VertexGroupData identity_vertex_data(const Quiver& q, const LieGroup& group);

/// b.(a, x) = (b_t(e) a_e b_s(e)^-1, Ad_{b_s(e)} x_e).
CotangentPoint act(const Quiver& q, const VertexGroupData& b, const CotangentPoint& p);

/// nu(v) = sum_{t(e)=v} Ad_{a_e} x_e - sum_{s(e)=v} x_e over interior v.
VertexAlgebraData moment_interior(const Quiver& q, const CotangentPoint& p);

/// lambda(v) = Ad_{a_e} x_e if v = t(e), -x_e if v = s(e), over boundary v.
VertexAlgebraData moment_boundary(const Quiver& q, const CotangentPoint& p);

/// mu(g, x) = (Ad_g x, -x) for the G x G action (a,b).(g,x) = (a g b^-1, Ad_b x).
std::pair<AlgebraElement, AlgebraElement> moment_tcotg(const LieGroup& G, const GroupElement& g,
                                                       const AlgebraElement& x);

/// <u1,v2> - <u2,v1> + <x,[u1,u2]> in the left-trivialised chart.
double omega_tcotg(const LieGroup& G, const AlgebraElement& x, const AlgebraElement& u1, const AlgebraElement& v1,
                   const AlgebraElement& u2, const AlgebraElement& v2);

/// Per-edge tangent vectors (u_e, v_e) at a point of T*G^E.
struct CotangentTangent {
  std::vector<AlgebraElement> u;
  std::vector<AlgebraElement> v;
};

double omega_sum(const Quiver& q, const CotangentPoint& p, const CotangentTangent& t1, const CotangentTangent& t2);

double max_norm(const LieGroup& G, const VertexAlgebraData& d);

/// Random point with nu = 0: a and x drawn at random, then the x of tree
/// edges are solved leaves-to-root so that every interior constraint holds.
/// `a_scale` is the standard deviation of log a in algebra coordinates.
CotangentPoint random_zero_level_point(const Quiver& q, const LieGroup& G, std::mt19937_64& rng,
                                       double a_scale = 0.8, double x_scale = 1.0);

/// Re-solves x on tree edges (same scheme as above) so that nu = 0 exactly.
void enforce_zero_level(const Quiver& q, const SpanningTree& tree, CotangentPoint& p);

}  // namespace lk
