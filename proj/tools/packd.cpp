// packd: subdivision-rule checks, finite circle packings and convergence experiments.
//
// Exit codes: 0 success, 1 error (JSON {error, message} on stderr),
// 2 when `check` finds a predicate that fails.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "packd/io.hpp"
#include "packd/render.hpp"

using namespace packd;

namespace {

struct Settings {
  double tol = PackOptions{}.tol;
  unsigned jobs = 1;
};

/// Defaults overridden by PACKD_TOL / PACKD_JOBS; flags are applied later.
Settings settings_from_env() {
  Settings s;
  if (const char* t = std::getenv("PACKD_TOL")) {
    try {
      s.tol = std::stod(t);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, std::string("PACKD_TOL is not a number: '") + t + "'");
    }
  }
  if (const char* j = std::getenv("PACKD_JOBS")) {
    try {
      s.jobs = static_cast<unsigned>(std::stoul(j));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, std::string("PACKD_JOBS is not an integer: '") + j + "'");
    }
  }
  return s;
}

std::vector<std::string> split_word(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::size_t polygon_index(const SubdivisionRule& r, const std::string& polygon) {
  return polygon.empty() ? 0 : r.type_index(polygon);
}

std::string default_polygon(const SubdivisionRule& r, const std::string& polygon) {
  return polygon.empty() ? r.polygons.front().name : polygon;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

int report_error(const std::string& code, std::string message) {
  if (message.rfind(code + ": ", 0) == 0) message.erase(0, code.size() + 2);
  std::cerr << Json{{"error", code}, {"message", message}}.dump() << '\n';
  return 1;
}

bool is_graph(const Json& j) {
  return j.is_object() && j.contains("faces") && j.contains("vertices") && j.at("vertices").is_array();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite subdivision rules and their circle packings"};
  app.require_subcommand(1);
  Settings env;
  try {
    env = settings_from_env();
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.code())), e.what());
  }

  std::string rule_path, polygon, out_path, svg_path, csv_path, report_path, word, chooser;
  int level = -1, j = 1, n_min = 1, n_max = 5, depth = 4;
  double tol = env.tol;
  unsigned jobs = env.jobs;
  bool skip_prereq = false;
  int check_level = kDefaultLevelBudget;

  auto* check = app.add_subcommand("check", "Decide simplicity, irreducibility and acylindricity");
  check->add_option("rule", rule_path, "Rule JSON")->required();
  check->add_option("--level", check_level, "Level budget for level-bounded checks");

  auto* subdivide = app.add_subcommand("subdivide", "Export the n-th subdivision graph");
  subdivide->add_option("rule", rule_path, "Rule JSON")->required();
  subdivide->add_option("--polygon", polygon, "Polygon type, or 'sphere'");
  subdivide->add_option("--level", level, "Subdivision level")->required();
  subdivide->add_option("--chooser", chooser, "Assignment indices per level, comma separated");
  subdivide->add_option("--out", out_path, "Graph JSON output (default stdout)");

  auto* packc = app.add_subcommand("pack", "Pack a graph file, or a rule at a level");
  packc->add_option("input", rule_path, "Graph JSON or rule JSON")->required();
  packc->add_option("--polygon", polygon, "Polygon type, or 'sphere' (rule input)");
  packc->add_option("--level", level, "Subdivision level (rule input)");
  packc->add_option("--tol", tol, "Radius solve tolerance");
  packc->add_option("--svg", svg_path, "Also write an SVG figure");
  packc->add_option("--out", out_path, "Packing JSON output (default stdout)");

  auto* converge = app.add_subcommand("converge", "Distances between nested finite packings");
  converge->add_option("rule", rule_path, "Rule JSON")->required();
  converge->add_option("--polygon", polygon, "Polygon type, or 'sphere'");
  converge->add_option("--j", j, "Compared sub-packing level");
  converge->add_option("--nmin", n_min, "First n");
  converge->add_option("--nmax", n_max, "Last n");
  converge->add_option("--csv", csv_path, "CSV output (default stdout)");
  converge->add_option("--report", report_path, "JSON report output");
  converge->add_option("--jobs", jobs, "Worker threads");
  converge->add_option("--tol", tol, "Radius solve tolerance");
  converge->add_flag("--no-prerequisites", skip_prereq, "Run even if the rule is not certified");

  auto* renorm = app.add_subcommand("renorm", "Renormalization distances of two seeded packings");
  renorm->add_option("rule", rule_path, "Rule JSON")->required();
  renorm->add_option("--polygon", polygon, "Polygon type");
  renorm->add_option("--word", word, "Periodic face word, comma separated")->required();
  renorm->add_option("--level", level, "Packing level")->required();
  renorm->add_option("--depth", depth, "Number of renormalizations");
  renorm->add_option("--csv", csv_path, "CSV output (default stdout)");
  renorm->add_option("--jobs", jobs, "Worker threads");
  renorm->add_option("--tol", tol, "Radius solve tolerance");
  renorm->add_flag("--no-prerequisites", skip_prereq, "Run even if the rule is not certified");

  auto* multiplier = app.add_subcommand("multiplier", "Scaling map of a periodic face word");
  multiplier->add_option("rule", rule_path, "Rule JSON")->required();
  multiplier->add_option("--polygon", polygon, "Polygon type");
  multiplier->add_option("--word", word, "Periodic face word, comma separated")->required();
  multiplier->add_option("--level", level, "Packing level")->required();
  multiplier->add_option("--tol", tol, "Radius solve tolerance");

  auto* jordan = app.add_subcommand("jordanize", "Rewrite a rule so every cell is a Jordan face");
  jordan->add_option("rule", rule_path, "Rule JSON")->required();
  jordan->add_option("--out", out_path, "Rule JSON output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("Usage", e.what());
  }

  try {
    PackOptions pack_opt;
    pack_opt.tol = tol;

    if (check->parsed()) {
      const SubdivisionRule r = load_rule(rule_path);
      Json verdicts = Json::array();
      bool fails = false;
      auto add = [&](const PredicateVerdict& v) {
        fails = fails || v.status == VerdictStatus::Fails;
        verdicts.push_back(verdict_to_json(v, r));
      };
      add(check_simple(r, check_level));
      const auto irreducible = check_irreducible(r);
      add(irreducible);
      if (irreducible.status != VerdictStatus::Fails) {
        add(decide_acylindrical(r, check_level));
      } else {
        verdicts.push_back({{"predicate", "acylindrical"}, {"status", "undefined"},
                            {"reason", "rule is not irreducible"}});
      }
      std::cout << Json{{"rule", rule_path}, {"verdicts", verdicts}}.dump(2) << '\n';
      return fails ? 2 : 0;
    }

    if (subdivide->parsed()) {
      const SubdivisionRule r = load_rule(rule_path);
      std::vector<std::size_t> choices;
      for (const auto& t : split_word(chooser)) choices.push_back(std::stoul(t));
      const Chooser ch = choice_word_chooser(choices);
      const std::string poly = default_polygon(r, polygon);
      const PlaneComplex c = poly == "sphere" ? iterate_sphere(r, level, ch) : iterate(r, poly, level, ch);
      emit(out_path, complex_to_json(c, &r).dump(1) + "\n");
      return 0;
    }

    if (packc->parsed()) {
      const Json input = read_json_file(rule_path);
      PlaneComplex c;
      if (is_graph(input)) {
        c = complex_from_json(input);
      } else {
        if (level < 0) throw Error(ErrorCode::LevelOutOfRange, "rule input needs --level");
        const SubdivisionRule r = validate_rule(rule_description_from_json(input));
        c = build_level(r, default_polygon(r, polygon), level);
      }
      const CirclePacking p = pack(c, pack_opt);
      if (!svg_path.empty()) write_text_file(svg_path, render_packing(p));
      emit(out_path, packing_to_json(p).dump(1) + "\n");
      return 0;
    }

    if (converge->parsed() || renorm->parsed()) {
      const SubdivisionRule r = load_rule(rule_path);
      ConvergeOptions opt;
      opt.pack = pack_opt;
      opt.jobs = jobs;
      opt.check_prerequisites = !skip_prereq;
      ConvergenceReport rep;
      if (converge->parsed()) {
        rep = converge_experiment(r, default_polygon(r, polygon), j, n_min, n_max, opt);
      } else {
        const std::size_t type = polygon_index(r, polygon);
        rep = renorm_contraction(r, type, resolve_word(r, type, split_word(word)), depth, level, opt);
      }
      emit(csv_path, report_csv(rep));
      if (!report_path.empty()) write_text_file(report_path, report_to_json(rep).dump(2) + "\n");
      return 0;
    }

    if (multiplier->parsed()) {
      const SubdivisionRule r = load_rule(rule_path);
      const std::size_t type = polygon_index(r, polygon);
      const auto rep = periodic_multiplier(r, type, resolve_word(r, type, split_word(word)), level, 1e-4, pack_opt);
      const auto& cls = rep.classification;
      std::cout << Json{{"class", to_string(cls.kind)},
                        {"mu_re", cls.multiplier.real()},
                        {"mu_im", cls.multiplier.imag()},
                        {"trace_sq", cls.trace_sq.real()},
                        {"trace_sq_im", cls.trace_sq.imag()},
                        {"mu_next_re", rep.mu_next.real()},
                        {"mu_next_im", rep.mu_next.imag()}}
                       .dump(2)
                << '\n';
      return 0;
    }

    if (jordan->parsed()) {
      const SubdivisionRule r = jordanize(load_rule(rule_path));
      emit(out_path, rule_description_to_json(r.source).dump(2) + "\n");
      return 0;
    }
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return report_error("Internal", e.what());
  }
  return 0;
}
