// lk: command-line front end.
//
// Exit codes: 0 success, 1 usage or IO, 2 validation, 3 tolerance.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <unistd.h>

#include "CLI11.hpp"

#include "lk/acceptance.hpp"
#include "lk/homotopy.hpp"
#include "lk/io.hpp"
#include "lk/reduction.hpp"

namespace {

using namespace lk;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string group = "su2";
  int grid = 400;
  std::uint64_t seed = 0;
  bool json = false;
  std::vector<std::string> tol;
};

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--tol expects KEY=VAL, got '" + item + "'");
    const auto key = item.substr(0, eq);
    double value = 0;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("--tol value for '" + key + "' is not a number");
    }
    out[key] = value;
  }
  try {
    check_tolerance_overrides(out);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return out;
}

AcceptanceConfig config_of(const Options& o) {
  if (o.grid < 8 || o.grid % 2) throw UsageError("--grid must be even and >= 8");
  return {o.group, o.grid, o.seed, parse_tolerances(o.tol)};
}

double tolerance(const AcceptanceConfig& cfg, const std::string& key) {
  auto it = cfg.tol.find(key);
  return it != cfg.tol.end() ? it->second : default_tolerances().at(key);
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
      return 1;
    case ErrorCode::ResidualTooLarge:
    case ErrorCode::NewtonDiverged:
      return 3;
    default:
      return 2;
  }
}

bool use_color() { return std::getenv("NO_COLOR") == nullptr && isatty(fileno(stdout)); }

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

Quiver load_quiver(const std::string& path) { return quiver_from_json(read_json_file(path)); }

std::string triple(long g, long m, long n) {
  return "(" + std::to_string(g) + "," + std::to_string(m) + "," + std::to_string(n) + ")";
}

Json form_json(const OctopusForm& f) { return {{"g", f.g}, {"m", f.m}, {"n", f.n}}; }

// ------------------------------------------------------------------ quiver

int quiver_validate(const Options& o, const std::string& file) {
  auto q = load_quiver(file);
  const auto comps = component_labels(q).second;
  if (o.json) {
    print_json({{"valid", true}, {"vertices", q.vertex_count()}, {"edges", q.edge_count()}, {"components", comps},
                {"interior", q.interior_vertices().size()}});
  } else {
    std::cout << "valid: " << q.vertex_count() << " vertices, " << q.edge_count() << " edges, " << comps
              << " component" << (comps == 1 ? "" : "s") << ", " << q.interior_vertices().size() << " interior\n";
  }
  return 0;
}

int quiver_invariants(const Options& o, const std::string& file) {
  auto inv = invariants(load_quiver(file));
  if (o.json) {
    Json out = Json::array();
    for (const auto& c : inv) out.push_back({{"g", c.g}, {"m", c.m}, {"n", c.n}, {"vertices", c.vertices}});
    print_json(out);
  } else {
    for (const auto& c : inv) std::cout << triple(c.g, c.m, c.n) << '\n';
  }
  return 0;
}

std::vector<std::pair<std::string, std::string>> parse_match(const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--match expects OUT=IN, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

int quiver_glue(const std::string& f1, const std::string& f2, const std::vector<std::string>& match) {
  auto q1 = load_quiver(f1), q2 = load_quiver(f2);
  auto m = match.empty() ? positional_match(q1, q2) : parse_match(match);
  print_json(quiver_to_json(glue(q1, q2, m)));
  return 0;
}

int quiver_normalize(const Options& o, const std::string& file, bool trace) {
  auto n = normalize(load_quiver(file));
  if (o.json) {
    Json forms = Json::array();
    for (const auto& f : n.forms) forms.push_back(form_json(f));
    Json out{{"forms", forms}, {"reached", quiver_to_json(n.reached)}};
    if (trace) {
      Json t = Json::array();
      for (const auto& mv : n.trace) t.push_back(describe(mv));
      out["trace"] = std::move(t);
    }
    print_json(out);
    return 0;
  }
  if (trace)
    for (std::size_t i = 0; i < n.trace.size(); ++i) std::cout << i + 1 << ". " << describe(n.trace[i]) << '\n';
  for (const auto& f : n.forms) std::cout << "octopus " << triple(f.g, f.m, f.n) << '\n';
  return 0;
}

// ------------------------------------------------------------------ moduli

int moduli_synthesize(const Options& o, const std::string& qfile, const std::string& pfile,
                      const std::string& point_out) {
  const auto cfg = config_of(o);
  auto q = load_quiver(qfile);
  CotangentPoint p = CotangentPoint::trivial(LieGroup::from_name(o.group), 0);
  if (pfile.empty()) {
    std::mt19937_64 rng(o.seed);
    p = random_zero_level_point(q, LieGroup::from_name(o.group), rng);
  } else {
    p = point_from_json(q, read_json_file(pfile));
  }
  auto A = synthesize_solution(q, p, cfg.N);
  if (!point_out.empty()) write_json_file(point_out, point_to_json(q, p));
  print_json(field_to_json(q, A));
  return 0;
}

int moduli_phi(const Options& o, const std::string& qfile, const std::string& ffile, bool nf) {
  const auto cfg = config_of(o);
  auto q = load_quiver(qfile);
  auto p = moduli_coordinates(q, field_from_json(q, read_json_file(ffile)), tolerance(cfg, "moment"));
  if (nf) p = normal_form(q, p, 1e-6).reduced.point;
  print_json(point_to_json(q, p));
  return 0;
}

int moduli_residuals(const Options& o, const std::string& qfile, const std::string& ffile) {
  const auto cfg = config_of(o);
  auto q = load_quiver(qfile);
  auto A = field_from_json(q, read_json_file(ffile));
  const double lax = max_of(lax_residual(A)), kirchhoff = max_of(kirchhoff_residual(q, A));
  const double tol = tolerance(cfg, "moment");
  const bool ok = lax <= tol && kirchhoff <= tol;
  if (o.json) {
    print_json({{"lax", lax}, {"kirchhoff", kirchhoff}, {"tolerance", tol}, {"passed", ok}});
  } else {
    std::printf("lax        %.3e\nkirchhoff  %.3e\ntolerance  %.1e\n", lax, kirchhoff, tol);
  }
  return ok ? 0 : 3;
}

int moduli_dim(const Options& o, const std::string& qfile) {
  auto q = load_quiver(qfile);
  const LieGroup G = LieGroup::from_name(o.group);
  const long d =
      2 * (static_cast<long>(q.edge_count()) - static_cast<long>(q.interior_vertices().size())) * G.dim();
  if (o.json) {
    print_json({{"dimension", d}});
  } else {
    std::cout << d << '\n';
  }
  return 0;
}

// ------------------------------------------------------------------ reduce

int reduce_normal_form(const std::string& qfile, const std::string& pfile) {
  auto q = load_quiver(qfile);
  auto nf = normal_form(q, point_from_json(q, read_json_file(pfile)));
  Json pinned = Json::array();
  const auto mask = pinned_edges(q, nf.reduced.tree);
  for (std::size_t e = 0; e < mask.size(); ++e)
    if (mask[e]) pinned.push_back(q.edge_id(e));
  print_json({{"point", point_to_json(q, nf.reduced.point)},
              {"root", q.vertex_id(nf.reduced.tree.root)},
              {"pinned_edges", pinned},
              {"free_parameters", free_parameter_count(q, nf.reduced)}});
  return 0;
}

int reduce_glue(const std::vector<std::string>& files, const std::vector<std::string>& match) {
  auto q1 = load_quiver(files[0]), q2 = load_quiver(files[2]);
  auto p1 = point_from_json(q1, read_json_file(files[1]));
  auto p2 = point_from_json(q2, read_json_file(files[3]));
  auto m = match.empty() ? positional_match(q1, q2) : parse_match(match);
  auto g = glue_points(q1, p1, q2, p2, m);
  print_json({{"quiver", quiver_to_json(g.glued.quiver)}, {"point", point_to_json(g.glued.quiver, g.point)}});
  return 0;
}

int reduce_cap(const std::string& qfile, const std::string& pfile, const std::string& vertex) {
  auto q = load_quiver(qfile);
  auto r = reduce_boundary(q, point_from_json(q, read_json_file(pfile)), vertex);
  print_json({{"quiver", quiver_to_json(r.quiver)}, {"point", point_to_json(r.quiver, r.point)}});
  return 0;
}

// ------------------------------------------------------------------ tqft

int tqft_eval(const Options& o, const std::string& word) {
  CobWord w;
  if (word.size() > 5 && word.compare(word.size() - 5, 5, ".json") == 0) {
    w = word_from_json(read_json_file(word));
  } else {
    w = parse_word(word);
  }
  auto c = evaluate(w);
  if (o.json) {
    print_json({{"word", format_word(w)}, {"class", cob_class_to_json(c)}});
  } else {
    std::cout << (c == identity_class(1) ? "cylinder " : "") << describe(c) << '\n';
  }
  return 0;
}

int tqft_check_relations(const Options& o) {
  auto checks = check_relations(LieGroup::from_name(o.group));
  bool ok = true;
  Json out = Json::array();
  for (const auto& r : checks) {
    ok = ok && r.passed();
    if (o.json) {
      out.push_back({{"relation", r.relation.name},
                     {"lhs", format_word(r.relation.lhs)},
                     {"rhs", format_word(r.relation.rhs)},
                     {"class", describe(r.lhs)},
                     {"classes_equal", r.classes_equal},
                     {"lhs_dimension", r.lhs_dimension},
                     {"rhs_dimension", r.rhs_dimension},
                     {"passed", r.passed()}});
    } else {
      std::printf("%s  %-24s %s\n", r.passed() ? "PASS" : "FAIL", r.relation.name.c_str(), describe(r.lhs).c_str());
    }
  }
  if (o.json) print_json({{"relations", out}, {"passed", ok}});
  return ok ? 0 : 3;
}

int tqft_ham_dim(const Options& o, long g, long m, long n) {
  if (g < 0 || m < 0 || n < 0) throw UsageError("--genus, --in and --out must be non-negative");
  const long d = ham_dimension(g, m, n, LieGroup::from_name(o.group));
  if (o.json) {
    print_json({{"g", g}, {"m", m}, {"n", n}, {"dimension", d}});
  } else {
    std::cout << d << '\n';
  }
  return 0;
}

// ------------------------------------------------------------------ verify

Json report_json(const AcceptanceConfig& cfg, const std::vector<CriterionResult>& results) {
  Json tol = Json::object();
  for (const auto& [k, v] : default_tolerances()) tol[k] = tolerance(cfg, k);
  Json crit = Json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed();
    Json ms = Json::array();
    for (const auto& m : r.measurements)
      ms.push_back({{"key", m.key}, {"value", m.value}, {"bound", m.bound}, {"relation", m.upper ? "<=" : ">="},
                    {"passed", m.passed()}});
    Json j{{"id", r.id}, {"name", r.name}, {"passed", r.passed()}, {"measurements", ms}};
    if (!r.convergence.empty()) {
      Json rows = Json::array();
      for (const auto& row : r.convergence) rows.push_back({{"N", row.N}, {"error", row.error}, {"order", row.order}});
      j["convergence"] = std::move(rows);
    }
    if (!r.error.empty()) j["error"] = r.error;
    crit.push_back(std::move(j));
  }
  return {{"config", {{"group", cfg.group}, {"grid", cfg.N}, {"seed", cfg.seed}, {"tolerances", tol}}},
          {"criteria", crit},
          {"passed", all}};
}

int verify(const Options& o) {
  const auto cfg = config_of(o);
  const auto results = run_acceptance(cfg);
  bool all = true;
  for (const auto& r : results) all = all && r.passed();
  if (o.json) {
    print_json(report_json(cfg, results));
    return all ? 0 : 3;
  }
  const bool color = use_color();
  for (const auto& r : results) {
    const char* tag = r.passed() ? (color ? "\033[32mPASS\033[0m" : "PASS") : (color ? "\033[31mFAIL\033[0m" : "FAIL");
    std::printf("%s  %2d  %s\n", tag, r.id, r.name.c_str());
    for (const auto& m : r.measurements)
      std::printf("          %-28s %.3e %s %.3e\n", m.key.c_str(), m.value, m.upper ? "<=" : ">=", m.bound);
    if (!r.convergence.empty()) {
      std::printf("          %6s  %10s  %6s\n", "N", "error", "order");
      for (const auto& row : r.convergence) std::printf("          %6d  %10.3e  %6.2f\n", row.N, row.error, row.order);
    }
    if (!r.error.empty()) std::printf("          error: %s\n", r.error.c_str());
  }
  std::printf("%s\n", all ? "all criteria passed" : "some criteria failed");
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lax-Kirchhoff moduli spaces on quivers"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--group", o.group, "structure group")->check(CLI::IsMember({"u1", "su2", "so3"}));
  app.add_option("--grid", o.grid, "grid intervals N (even, >= 8)");
  app.add_option("--seed", o.seed, "random seed");
  app.add_flag("--json", o.json, "JSON output");
  app.add_option("--tol", o.tol, "tolerance override KEY=VAL")->take_all()->allow_extra_args(false);

  std::function<int()> action;
  std::string f1, f2, f3, point_out;
  std::vector<std::string> files, match;
  bool trace = false, nf = false;
  long genus = 0, in = 0, out = 0;

  auto* quiver = app.add_subcommand("quiver", "quiver utilities")->require_subcommand(1);
  auto* qv = quiver->add_subcommand("validate", "check a quiver file");
  qv->add_option("quiver", f1)->required();
  qv->callback([&] { action = [&] { return quiver_validate(o, f1); }; });
  auto* qi = quiver->add_subcommand("invariants", "(g,m,n) per component");
  qi->add_option("quiver", f1)->required();
  qi->callback([&] { action = [&] { return quiver_invariants(o, f1); }; });
  auto* qg = quiver->add_subcommand("glue", "glue out-boundary of the first to in-boundary of the second");
  qg->add_option("first", f1)->required();
  qg->add_option("second", f2)->required();
  qg->add_option("--match", match, "OUT=IN pairs; positional by default");
  qg->callback([&] { action = [&] { return quiver_glue(f1, f2, match); }; });
  auto* qn = quiver->add_subcommand("normalize", "octopus normal form");
  qn->add_option("quiver", f1)->required();
  qn->add_flag("--trace", trace, "print the moves");
  qn->callback([&] { action = [&] { return quiver_normalize(o, f1, trace); }; });

  auto* moduli = app.add_subcommand("moduli", "fields and moduli coordinates")->require_subcommand(1);
  auto* ms = moduli->add_subcommand("synthesize", "field through a point (random when omitted)");
  ms->add_option("quiver", f1)->required();
  ms->add_option("point", f2);
  ms->add_option("--point-out", point_out, "also write the point used");
  ms->callback([&] { action = [&] { return moduli_synthesize(o, f1, f2, point_out); }; });
  auto* mp = moduli->add_subcommand("phi", "moduli coordinates of a field");
  mp->add_option("quiver", f1)->required();
  mp->add_option("field", f2)->required();
  mp->add_flag("--normal-form", nf, "print the normal form instead");
  mp->callback([&] { action = [&] { return moduli_phi(o, f1, f2, nf); }; });
  auto* mr = moduli->add_subcommand("residuals", "Lax and Kirchhoff residuals");
  mr->add_option("quiver", f1)->required();
  mr->add_option("field", f2)->required();
  mr->callback([&] { action = [&] { return moduli_residuals(o, f1, f2); }; });
  auto* md = moduli->add_subcommand("dim", "dimension of the moduli space");
  md->add_option("quiver", f1)->required();
  md->callback([&] { action = [&] { return moduli_dim(o, f1); }; });

  auto* reduce = app.add_subcommand("reduce", "reduction by the vertex group")->require_subcommand(1);
  auto* rn = reduce->add_subcommand("normal-form", "tree normal form of a point");
  rn->add_option("quiver", f1)->required();
  rn->add_option("point", f2)->required();
  rn->callback([&] { action = [&] { return reduce_normal_form(f1, f2); }; });
  auto* rg = reduce->add_subcommand("glue", "glue two points: Q1 P1 Q2 P2");
  rg->add_option("files", files)->required()->expected(4);
  rg->add_option("--match", match, "OUT=IN pairs; positional by default");
  rg->callback([&] { action = [&] { return reduce_glue(files, match); }; });
  auto* rc = reduce->add_subcommand("cap", "reduce at a boundary vertex");
  rc->add_option("quiver", f1)->required();
  rc->add_option("point", f2)->required();
  rc->add_option("vertex", f3)->required();
  rc->callback([&] { action = [&] { return reduce_cap(f1, f2, f3); }; });

  auto* tqft = app.add_subcommand("tqft", "cobordism words")->require_subcommand(1);
  auto* te = tqft->add_subcommand("eval", "class of a word (text or .json file)");
  te->add_option("word", f1)->required();
  te->callback([&] { action = [&] { return tqft_eval(o, f1); }; });
  auto* tc = tqft->add_subcommand("check-relations", "the relations of Cob2");
  tc->callback([&] { action = [&] { return tqft_check_relations(o); }; });
  auto* th = tqft->add_subcommand("ham-dim", "dimension of the (g,m,n) component");
  th->add_option("--genus", genus)->required();
  th->add_option("--in", in)->required();
  th->add_option("--out", out)->required();
  th->callback([&] { action = [&] { return tqft_ham_dim(o, genus, in, out); }; });

  auto* ver = app.add_subcommand("verify", "run the acceptance suite");
  ver->callback([&] { action = [&] { return verify(o); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "lk: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "lk: " << e.what() << '\n';
    return exit_code(e.code());
  }
}
