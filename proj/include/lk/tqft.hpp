#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lk/homotopy.hpp"
#include "lk/liegroup.hpp"
#include "lk/quiver.hpp"

namespace lk {

enum class Generator { Cup, Cap, PantsMerge, PantsSplit, Cylinder, Swap };

std::string_view to_string(Generator g);
int source_arity(Generator g);
int target_arity(Generator g);

/// Layers are composed top to bottom; generators in a layer sit side by side.
using CobLayer = std::vector<Generator>;
using CobWord = std::vector<CobLayer>;

/// Text form: layers separated by ';', generators by ','. Names: cup, cap,
/// merge, split, id (or cylinder), swap; case and surrounding spaces ignored.
/// An empty layer is the empty object's identity. Throws ParseError.
CobWord parse_word(std::string_view text);
std::string format_word(const CobWord& w);

/// A connected surface: genus plus the source and target circle positions
/// wired to it (sorted).
struct CobComponent {
  long g = 0;
  std::vector<int> inputs;
  std::vector<int> outputs;

  long m() const { return static_cast<long>(inputs.size()); }
  long n() const { return static_cast<long>(outputs.size()); }
  bool closed() const { return inputs.empty() && outputs.empty(); }
};

/// Diffeomorphism class of a cobordism source -> target circles. Components
/// are kept in a canonical order, so == is exact equality of classes.
struct CobClass {
  int source = 0;
  int target = 0;
  std::vector<CobComponent> components;

  bool operator==(const CobClass& o) const;
};

/// Sorts wiring and components into canonical order; checks every position is
/// wired exactly once.
CobClass canonical(CobClass c);

std::string describe(const CobClass& c);

CobClass generator_class(Generator g);
CobClass identity_class(int circles);

/// c1 followed by c2, gluing output i of c1 to input i of c2. Merging k
/// components along j circle pairs adds j - (k - 1) to the total genus.
/// Throws ArityMismatch.
CobClass compose(const CobClass& c1, const CobClass& c2);
CobClass tensor(const CobClass& c1, const CobClass& c2);

/// Throws ArityMismatch when adjacent layers do not fit.
CobClass evaluate(const CobWord& w);

/// Per component (g, m, n); wiring follows the natural order of the boundary
/// vertex ids within boundary_in() and boundary_out().
CobClass thicken(const Quiver& q);

/// A quiver whose thickening is `c`: an octopus per bounded component and a
/// bouquet of g loops per closed component of genus g. Throws
/// NotInteriorVertex for disks and ClosedComponent for spheres.
Quiver quiver_for(const CobClass& c);

struct HamComponent {
  enum class Kind { ModuliSpace, Point, FormalSequence };

  Kind kind = Kind::ModuliSpace;
  long dimension = 0;                  // 2(g+m+n-1) dim G; 0 for points; unused for sequences
  std::optional<OctopusForm> octopus;  // moduli spaces only
  std::vector<CobClass> sequence;      // closed components: (g,0,1) followed by a cup
};

struct HamDescription {
  std::vector<HamComponent> components;  // same order as the class

  /// Sum over components that carry a dimension (points and moduli spaces).
  long total_dimension() const;
  bool has_formal_sequence() const;
};

std::string_view to_string(HamComponent::Kind k);

long ham_dimension(long g, long m, long n, const LieGroup& G);
HamDescription ham_description(const CobClass& c, const LieGroup& G);

/// Dimension predicted by reducing the tensor of the layer pieces: the sum
/// of all generator dimensions minus 2 dim G per internal circle.
long reduced_dimension(const CobWord& w, const LieGroup& G);

struct Relation {
  std::string name;
  CobWord lhs;
  CobWord rhs;
};

/// Unit, counit, (co)associativity, Frobenius, (co)commutativity, swap
/// involution, swap naturality for every generator, and the braid relation.
std::vector<Relation> cob_relations();

struct RelationCheck {
  Relation relation;
  CobClass lhs;
  CobClass rhs;
  bool classes_equal = false;
  long lhs_dimension = 0;
  long rhs_dimension = 0;
  bool dimensions_consistent = false;  // both sides agree with each other and with the reduction count
  bool passed() const { return classes_equal && dimensions_consistent; }
};

std::vector<RelationCheck> check_relations(const LieGroup& G);

}  // namespace lk
