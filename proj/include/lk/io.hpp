#pragma once

#include <string>

#include "json.hpp"

#include "lk/cotangent.hpp"
#include "lk/fields.hpp"
#include "lk/quiver.hpp"
#include "lk/tqft.hpp"

namespace lk {

using Json = nlohmann::ordered_json;

/// Matrices are arrays of rows, each entry a [re, im] pair.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

/// Element readers check membership to 1e-8 and throw SpecMismatch.
AlgebraElement algebra_from_json(const LieGroup& G, const Json& j);
GroupElement group_from_json(const LieGroup& G, const Json& j);

/// {"vertices": [...], "edges": [{"id", "src", "dst"}, ...]}
Json quiver_to_json(const Quiver& q);
Quiver quiver_from_json(const Json& j);

/// {"group", "edges": {id: {"a": matrix, "x": matrix}}}
Json point_to_json(const Quiver& q, const CotangentPoint& p);
CotangentPoint point_from_json(const Quiver& q, const Json& j);

/// {"group", "grid", "edges": {id: {"A0": [matrix...], "A1": [matrix...]}}}
Json field_to_json(const Quiver& q, const EdgeField& A);
EdgeField field_from_json(const Quiver& q, const Json& j);

/// {"layers": [["cap", "id"], ["merge"]]}
Json word_to_json(const CobWord& w);
CobWord word_from_json(const Json& j);

Json cob_class_to_json(const CobClass& c);
Json ham_to_json(const HamDescription& h);
Json algebra_map_to_json(const LieGroup& G, const VertexAlgebraData& d);

/// Throws ParseError on unreadable files or malformed JSON.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace lk
