#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lk/quiver.hpp"

namespace lk {

/// One end of an edge; `at_dst` picks the target end.
struct HalfEdge {
  std::string edge;
  bool at_dst = false;

  bool operator==(const HalfEdge&) const = default;
};

/// Contract: remove the non-loop edge `edge` between two distinct interior
/// vertices and merge its endpoints into `keep` (the source when empty).
/// Split: move the half-edges `moved` off the interior vertex `vertex` onto a
/// fresh vertex `new_vertex`, joined to `vertex` by the fresh edge `edge`
/// (vertex -> new_vertex when `outward`, else the reverse). Both cells of the
/// partition must be non-empty.
struct Move {
  enum class Kind { Contract, Split };

  Kind kind = Kind::Contract;
  std::string edge;
  std::string vertex;
  std::vector<HalfEdge> moved;
  std::string new_vertex;
  bool outward = true;

  static Move contract(std::string edge, std::string keep = {});
  static Move split(std::string vertex, std::vector<HalfEdge> moved, std::string new_vertex, std::string new_edge,
                    bool outward = true);

  bool operator==(const Move&) const = default;
};

std::string describe(const Move& mv);

struct MoveResult {
  Quiver quiver;
  Move inverse;
};

/// Applies a move; the returned inverse restores the original quiver exactly
/// (same ids), not merely up to isomorphism.
MoveResult apply_move(const Quiver& q, const Move& mv);

/// Half-edges incident to a vertex, ordered by edge index (src end first).
std::vector<HalfEdge> half_edges(const Quiver& q, std::size_t v);

/// Moves that reverse edge `e` (both endpoints interior). Non-loop edges use
/// Contract + Split; a loop is first split off onto a clone vertex, reversed
/// there, and contracted back.
std::vector<Move> flip_moves(const Quiver& q, const std::string& e);
Quiver flip_interior_edge(const Quiver& q, const std::string& e);

struct OctopusForm {
  long g = 0;
  long m = 0;
  long n = 0;
  Quiver realization;
};

/// Canonical octopus: center "c", legs in1..inm -> c (edges a1..), c -> out1..
/// (edges b1..), loops l1.. at c. Throws ClosedComponent when m+n = 0 and
/// NotInteriorVertex for (0,1,0)/(0,0,1), which have no quiver realization.
Quiver octopus(long g, long m, long n);

struct Normalization {
  std::vector<OctopusForm> forms;  // one per component, component order
  std::vector<Move> trace;         // replays q -> reached
  Quiver reached;                  // each component an octopus up to renaming
};

/// Contracts the smallest interior-interior non-loop edge until every
/// component has at most one interior vertex. A component with no interior
/// vertex (a single edge) admits no move and is left as is; its form is
/// (0,1,1). Throws ClosedComponent.
Normalization normalize(const Quiver& q);

/// Labeled comparison: boundary vertex labels (with their in/out class) must
/// coincide, components must cover the same boundary labels and have equal
/// genus. Throws BoundaryMismatch when the labeled boundaries differ.
bool homotopic(const Quiver& a, const Quiver& b);

/// Unlabeled comparison: equal multisets of per-component (g, m, n).
bool homotopic_unlabeled(const Quiver& a, const Quiver& b);

/// A uniformly chosen applicable move (contract or split with fresh ids), or
/// nothing if the quiver admits none.
std::optional<Move> random_move(const Quiver& q, std::mt19937_64& rng);

}  // namespace lk
