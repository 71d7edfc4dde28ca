#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lk/io.hpp"

#include <cstdio>
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

Quiver pants() { return Quiver::create({"i1", "i2", "c", "o"}, {{"e1", "i1", "c"}, {"e2", "i2", "c"}, {"e3", "c", "o"}}); }

}  // namespace

TEST_CASE("matrices round trip bit for bit") {
  Mat m(2, 2);
  m << Complex(0.1, -0.3), Complex(1.0 / 3.0, 0), Complex(-2e-17, 7), Complex(0, 0);
  auto back = matrix_from_json(Json::parse(matrix_to_json(m).dump()));
  CHECK(back == m);
  CHECK(matrix_from_json(Json::parse("[[1.5]]"))(0, 0) == Complex(1.5, 0));
  CHECK(code_of([] { matrix_from_json(Json::parse("[[1,2],[3]]")); }) == ErrorCode::ParseError);
  CHECK(code_of([] { matrix_from_json(Json::parse("[]")); }) == ErrorCode::ParseError);
  CHECK(code_of([] { matrix_from_json(Json::parse("[[\"x\"]]")); }) == ErrorCode::ParseError);
}

TEST_CASE("group and algebra membership is checked on read") {
  CHECK(code_of([] { group_from_json(SU2, Json::parse("[[[2,0],[0,0]],[[0,0],[0.5,0]]]")); }) ==
        ErrorCode::SpecMismatch);
  CHECK(code_of([] { algebra_from_json(SU2, Json::parse("[[[1,0],[0,0]],[[0,0],[-1,0]]]")); }) ==
        ErrorCode::SpecMismatch);
  CHECK(code_of([] { group_from_json(SU2, Json::parse("[[[1,0]]]")); }) == ErrorCode::SpecMismatch);
  auto id = group_from_json(SU2, Json::parse("[[[1,0],[0,0]],[[0,0],[1,0]]]"));
  CHECK(id.m.isApprox(Mat::Identity(2, 2)));
}

TEST_CASE("quivers round trip") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    auto q = random_quiver(rng, 8, "r");
    auto back = quiver_from_json(Json::parse(quiver_to_json(q).dump()));
    CHECK(back.vertex_ids() == q.vertex_ids());
    CHECK(quiver_to_json(back) == quiver_to_json(q));
  }
  CHECK(code_of([] { quiver_from_json(Json::parse(R"({"vertices":["a"]})")); }) == ErrorCode::ParseError);
  CHECK_THROWS_AS(quiver_from_json(Json::parse(R"({"vertices":["a"],"edges":[{"id":"e","src":"a","dst":"b"}]})")),
                  Error);
}

TEST_CASE("cotangent points and fields round trip") {
  std::mt19937_64 rng(12);
  const auto q = pants();
  for (auto kind : {GroupKind::UnitCircle, GroupKind::SU2, GroupKind::SO3}) {
    const LieGroup G(kind);
    auto p = random_zero_level_point(q, G, rng);
    auto back = point_from_json(q, Json::parse(point_to_json(q, p).dump()));
    CHECK(back.group.name() == G.name());
    for (std::size_t e = 0; e < q.edge_count(); ++e) {
      CHECK((back.a[e].m - p.a[e].m).norm() == 0.0);
      CHECK((back.x[e].m - p.x[e].m).norm() <= 1e-15);
    }
    auto A = synthesize_solution(q, p, 16);
    auto B = field_from_json(q, Json::parse(field_to_json(q, A).dump()));
    CHECK(B.N == 16);
    for (std::size_t e = 0; e < q.edge_count(); ++e)
      for (int k = 0; k <= 16; ++k) CHECK((B.A1[e][k].m - A.A1[e][k].m).norm() <= 1e-15);
  }

  auto j = point_to_json(q, random_zero_level_point(q, SU2, rng));
  auto missing = j;
  missing["edges"].erase("e2");
  CHECK(code_of([&] { point_from_json(q, missing); }) == ErrorCode::ParseError);
  auto extra = j;
  extra["edges"]["zz"] = j["edges"]["e1"];
  CHECK(code_of([&] { point_from_json(q, extra); }) == ErrorCode::UnknownId);

  auto f = field_to_json(q, EdgeField::zero(SU2, 8, q.edge_count()));
  f["grid"] = 10;
  CHECK(code_of([&] { field_from_json(q, f); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("words and classes") {
  auto w = parse_word("cap,id;merge");
  CHECK(word_to_json(w).dump() == R"({"layers":[["cap","id"],["merge"]]})");
  CHECK(word_from_json(word_to_json(w)) == w);
  CHECK(code_of([] { word_from_json(Json::parse(R"({"layers":[]})")); }) == ErrorCode::ParseError);
  CHECK(code_of([] { word_from_json(Json::parse(R"({"layers":[["cap,cap"]]})")); }) == ErrorCode::ParseError);

  auto c = cob_class_to_json(evaluate(parse_word("split;merge")));
  CHECK(c["components"][0]["g"] == 1);
  auto h = ham_to_json(ham_description(identity_class(1), SU2));
  CHECK(h["total_dimension"] == 6);
  CHECK(h["components"][0]["kind"].is_string());
}

TEST_CASE("files") {
  CHECK(code_of([] { read_json_file("/nonexistent/lk.json"); }) == ErrorCode::ParseError);
  const std::string path = "lk_io_test.json";
  write_json_file(path, quiver_to_json(pants()));
  CHECK(quiver_to_json(quiver_from_json(read_json_file(path))) == quiver_to_json(pants()));
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{not json", f);
    std::fclose(f);
  }
  CHECK(code_of([&] { read_json_file(path); }) == ErrorCode::ParseError);
  std::remove(path.c_str());
}
