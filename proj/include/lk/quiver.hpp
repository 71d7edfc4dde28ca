#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lk/error.hpp"

namespace lk {

enum class VertexClass { BoundaryIn, BoundaryOut, Interior };

struct EdgeDef {
  std::string id;
  std::string src;
  std::string dst;
};

struct QuiverIssue {
  ErrorCode code;
  std::string subject;
};

/// Checks the quiver invariants on raw parts: unique ids, edges referencing
/// existing vertices, no isolated vertices.
std::optional<QuiverIssue> validate(const std::vector<std::string>& vertices, const std::vector<EdgeDef>& edges);

/// "Natural" id ordering: digit runs compare numerically (v2 < v10).
bool natural_less(const std::string& a, const std::string& b);

/// Finite directed multigraph with loops and parallel edges allowed and no
/// isolated vertices. Immutable; vertices and edges are stored sorted by id
/// (natural order), and every positional notion (boundary order, edge index
/// in field data) refers to that order.
class Quiver {
 public:
  struct Edge {
    std::size_t src;
    std::size_t dst;
    bool is_loop() const { return src == dst; }
  };

  Quiver() = default;

  /// Throws Error with the code of the first violated invariant.
  static Quiver create(std::vector<std::string> vertices, std::vector<EdgeDef> edges);

  std::size_t vertex_count() const { return vertex_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return vertex_ids_.empty(); }

  const std::string& vertex_id(std::size_t v) const { return vertex_ids_[v]; }
  const std::string& edge_id(std::size_t e) const { return edge_ids_[e]; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  const std::vector<std::string>& vertex_ids() const { return vertex_ids_; }
  const std::vector<std::string>& edge_ids() const { return edge_ids_; }

  std::optional<std::size_t> find_vertex(const std::string& id) const;
  std::optional<std::size_t> find_edge(const std::string& id) const;
  std::size_t vertex_index(const std::string& id) const;  // throws UnknownId
  std::size_t edge_index(const std::string& id) const;    // throws UnknownId

  std::size_t in_degree(std::size_t v) const { return in_deg_[v]; }
  std::size_t out_degree(std::size_t v) const { return out_deg_[v]; }
  std::size_t degree(std::size_t v) const { return in_deg_[v] + out_deg_[v]; }

  VertexClass vertex_class(std::size_t v) const;
  bool is_boundary(std::size_t v) const { return degree(v) == 1; }
  bool is_interior(std::size_t v) const { return degree(v) > 1; }

  /// Edges with the given vertex as source / target; a loop appears in both.
  const std::vector<std::size_t>& out_edges(std::size_t v) const { return out_edges_[v]; }
  const std::vector<std::size_t>& in_edges(std::size_t v) const { return in_edges_[v]; }
  /// The unique edge of a boundary vertex.
  std::size_t boundary_edge(std::size_t v) const;

  /// Boundary vertices in storage order; this is the positional order used by
  /// gluing and by cobordism wiring.
  std::vector<std::size_t> boundary_in() const;
  std::vector<std::size_t> boundary_out() const;
  std::vector<std::size_t> interior_vertices() const;

  std::vector<EdgeDef> edge_defs() const;

  bool operator==(const Quiver& o) const;

 private:
  std::vector<std::string> vertex_ids_;
  std::vector<std::string> edge_ids_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> in_deg_, out_deg_;
  std::vector<std::vector<std::size_t>> out_edges_, in_edges_;
  std::map<std::string, std::size_t> vertex_lookup_, edge_lookup_;
};

std::map<std::string, VertexClass> classify(const Quiver& q);

struct ComponentInvariants {
  std::vector<std::string> vertices;  // component members, storage order
  long g = 0;
  long m = 0;
  long n = 0;
};

/// Per connected component: g = |E|-|V|+1, m = |in-boundary|, n = |out-boundary|.
std::vector<ComponentInvariants> invariants(const Quiver& q);

/// Component index per vertex (undirected connectivity) and component count.
std::pair<std::vector<std::size_t>, std::size_t> component_labels(const Quiver& q);

std::vector<Quiver> components(const Quiver& q);

struct SpanningTree {
  std::size_t root = 0;
  std::vector<bool> in_tree;                   // per edge
  std::vector<std::optional<std::size_t>> parent_edge;    // per vertex, empty at root
  std::vector<std::optional<std::size_t>> parent_vertex;  // per vertex, empty at root
  std::vector<std::size_t> order;              // BFS order, root first

  std::size_t tree_edge_count() const;
};

/// BFS spanning tree of the underlying undirected graph. Edges are explored in
/// index order, so the result is deterministic. Throws Disconnected.
SpanningTree spanning_tree(const Quiver& q, std::size_t root);
SpanningTree spanning_tree(const Quiver& q, const std::string& root);

/// Default root: first in-boundary vertex, else first out-boundary vertex.
std::optional<std::size_t> default_root(const Quiver& q);

struct GlueResult {
  Quiver quiver;
  std::map<std::string, std::string> vertex_map2;  // q2 vertex id -> id in result
  std::map<std::string, std::string> edge_map2;    // q2 edge id -> id in result
};

/// Glues q1's out-boundary to q2's in-boundary along `match` (pairs
/// (v1 in out-boundary of q1, v2 in in-boundary of q2)); the match must be a
/// bijection onto both boundary sets. Merged vertices keep q1's id; q2 ids
/// that collide with q1 ids get a "~2" suffix (repeated until unique).
GlueResult glue_with_maps(const Quiver& q1, const Quiver& q2,
                          const std::vector<std::pair<std::string, std::string>>& match);
Quiver glue(const Quiver& q1, const Quiver& q2, const std::vector<std::pair<std::string, std::string>>& match);

/// Match boundary_out(q1)[i] with boundary_in(q2)[i].
std::vector<std::pair<std::string, std::string>> positional_match(const Quiver& q1, const Quiver& q2);

/// Removes a boundary vertex and its unique edge.
Quiver delete_boundary_vertex(const Quiver& q, const std::string& v0);

/// Brute-force isomorphism test for small quivers (intended for <= 10
/// vertices). With `fix_boundary_labels`, boundary vertices must map to
/// boundary vertices with the same id.
bool isomorphic(const Quiver& a, const Quiver& b, bool fix_boundary_labels = false);

/// Random connected quiver with non-empty boundary and at most
/// `max_vertices` vertices (>= 2). Vertex ids are prefix+"v"+k, edge ids
/// prefix+"e"+k, so distinct prefixes give disjoint id sets. Occasionally
/// returns a single edge.
Quiver random_quiver(std::mt19937_64& rng, std::size_t max_vertices = 8, const std::string& prefix = "");

/// An id not present in `taken`, formed as base, base~2, base~2~2, ...
std::string fresh_id(const std::string& base, const std::vector<std::string>& taken);

}  // namespace lk
