// Command-line front end: arbor <command> [--file doc.g] [--level n] [--format json|dot|text] ...

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arbor/dsl.hpp"
#include "arbor/error.hpp"
#include "arbor/mealy.hpp"
#include "arbor/permlab.hpp"
#include "arbor/towerlab.hpp"
#include "arbor/wordcalc.hpp"

namespace {

using nlohmann::json;
using namespace arbor;

constexpr const char* kVersion = "1.0.0";

enum Exit { ok = 0, check_failed = 1, usage = 2, budget = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string file;
  std::optional<unsigned> level;
  std::string format = "text";
  std::optional<std::uint64_t> budget;
  std::uint64_t seed = 1;
  bool timings = false;
};

struct Output {
  json inputs = json::object();
  json results = json::object();
  json timings = json::object();
  std::string text;
  std::string dot;
  int code = ok;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Runner {
 public:
  explicit Runner(const Globals& g) : g_(g) {
    if (!g_.file.empty()) env_ = Environment(parse_document(read_file(g_.file)), mealy());
  }

  MealyOptions mealy() const {
    MealyOptions m;
    if (g_.budget) m.state_budget = static_cast<std::size_t>(*g_.budget);
    return m;
  }

  unsigned level(unsigned fallback) const { return g_.level.value_or(fallback); }
  unsigned required_level() const {
    if (!g_.level) throw UsageError("this command needs --level");
    return *g_.level;
  }

  Environment& env() { return env_; }

  template <class F>
  auto timed(Output& out, const std::string& what, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    if (g_.timings) {
      out.timings[what] =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    return r;
  }

  PermSubgroup image(const std::string& group, unsigned n) {
    const auto& g = env_.group(group);
    return PermSubgroup::image(g.generators, n);
  }

  NormalizerOptions normalizer_options() const {
    NormalizerOptions o;
    if (g_.budget) o.candidate_budget = *g_.budget;
    return o;
  }

  const Globals& globals() const { return g_; }

 private:
  Globals g_;
  Environment env_;
};

std::string perm_text(const TruncatedIsometry& t) {
  // cycle notation on the level-n vertices
  std::vector<bool> seen(t.degree(), false);
  std::string s;
  for (Point p = 0; p < t.degree(); ++p) {
    if (seen[p] || t(p) == p) continue;
    s += "(";
    Point q = p;
    bool first = true;
    while (!seen[q]) {
      seen[q] = true;
      s += (first ? "" : " ") + Vertex::from_index(q, t.level(), t.arity()).str();
      first = false;
      q = t(q);
    }
    s += ")";
  }
  return s.empty() ? "()" : s;
}

std::string automaton_text(const FsAutomorphism& g) {
  std::string s = "arity " + std::to_string(g.arity()) + ", " + std::to_string(g.num_states()) + " states\n";
  for (StateId q = 0; q < g.num_states(); ++q) {
    s += (q == g.initial() ? "* " : "  ") + std::to_string(q) + ": (";
    for (unsigned x = 0; x < g.arity(); ++x) s += (x ? ", " : "") + std::to_string(g.next(q, static_cast<Letter>(x)));
    s += ")";
    const auto p = g.state_perm(q);
    if (!p.is_identity()) s += p.cycle_string();
    s += "\n";
  }
  return s;
}

std::string suite_text(const SuiteReport& r) {
  std::string s = r.suite + ": " + std::to_string(r.count(CheckStatus::pass)) + "/" + std::to_string(r.checks.size()) +
                  " pass\n";
  for (const auto& c : r.checks) {
    if (c.status == CheckStatus::pass) continue;
    s += "  " + status_name(c.status) + "  " + c.name;
    if (!c.detail.empty()) s += "  (" + c.detail + ")";
    s += "\n";
  }
  return s;
}

void verify(Runner& run, const std::string& suite, Output& out) {
  auto from_suite = [&](const SuiteReport& r) {
    out.results = r.to_json();
    out.text = suite_text(r);
    out.code = r.all_pass() ? ok : check_failed;
  };
  if (suite == "grigorchuk-identities") return from_suite(identity_suite("grigorchuk", run.level(3), run.mealy()));
  if (suite == "grigorchuk-prenormalizer") {
    return from_suite(identity_suite("grigorchuk-prenormalizer", run.level(3), run.mealy()));
  }
  if (suite == "gs-identities") return from_suite(identity_suite("gs", run.level(3), run.mealy()));
  if (suite == "rank-drop-gs") return from_suite(rank_drop_check(Family::gs, run.level(10)));
  if (suite == "rank-drop-grigorchuk") return from_suite(rank_drop_check(Family::grigorchuk, run.level(4)));
  if (suite == "normalizer-formula") {
    const auto r = normalizer_formula_oracle_check(run.level(3), 100'000, run.globals().seed);
    out.results = r.to_json();
    out.text = "normalizer formula, level " + std::to_string(r.level) + ": " + std::to_string(r.group_agreements) +
               "/" + std::to_string(r.pairs_tested) + " pairs agree\n";
    out.code = r.all_agree() ? ok : check_failed;
    return;
  }
  if (suite == "omega-formula") {
    const auto r = omega_formula_family_check(run.level(3));
    out.results = r.to_json();
    out.text = "omega formula, level " + std::to_string(r.level) + ": " + std::to_string(r.agreements) + "/" +
               std::to_string(r.normal_pairs) + " pairs agree; restricted to centralizing diagonal: " +
               std::to_string(r.corrected_agreements) + "/" + std::to_string(r.normal_pairs) + "\n";
    out.code = r.all_agree() ? ok : check_failed;
    return;
  }
  throw UsageError("unknown suite '" + suite +
                   "' (grigorchuk-identities, grigorchuk-prenormalizer, gs-identities, rank-drop-gs, "
                   "rank-drop-grigorchuk, normalizer-formula, omega-formula)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Computations with automorphisms of rooted trees and their groups"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--file", g.file, "DSL document with groups and elements");
  app.add_option("--level", g.level, "truncation level (or rank / depth bound for verify)");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "dot", "text"}));
  app.add_option("--budget", g.budget, "state, order or candidate budget");
  app.add_option("--seed", g.seed, "seed for sampled suites");
  app.add_flag("--timings", g.timings, "record timings_ms in JSON output");
  app.add_flag_callback(
      "--version", [] { throw CLI::CallForVersion(std::string("arbor ") + kVersion, 0); }, "print the version");

  std::string expr1;
  std::string expr2;
  std::string name;
  unsigned radius = 4;
  unsigned steps = 8;
  std::string ambient = "default";
  std::string render_kind;

  auto* c_eval = app.add_subcommand("eval", "minimized automaton of an expression");
  c_eval->add_option("expr", expr1)->required();
  auto* c_eq = app.add_subcommand("eq", "decide equality of two expressions");
  c_eq->add_option("lhs", expr1)->required();
  c_eq->add_option("rhs", expr2)->required();
  auto* c_order = app.add_subcommand("order", "order of an element, up to --budget (default 4096)");
  c_order->add_option("expr", expr1)->required();
  auto* c_portrait = app.add_subcommand("portrait", "activities down to --level");
  c_portrait->add_option("expr", expr1)->required();
  auto* c_truncate = app.add_subcommand("truncate", "action on level --level");
  c_truncate->add_option("expr", expr1)->required();
  auto* c_gorder = app.add_subcommand("group-order", "order of the level --level image of a group");
  c_gorder->add_option("group", name)->required();
  auto* c_norm = app.add_subcommand("normalizer", "normalizer of the level image in the wreath product");
  c_norm->add_option("group", name)->required();
  c_norm->add_option("--ambient", ambient, "full, cyclic or default (cyclic for prime arity)")
      ->check(CLI::IsMember({"full", "cyclic", "default"}));
  auto* c_tower = app.add_subcommand("tower", "iterated normalizers of the level image");
  c_tower->add_option("group", name)->required();
  c_tower->add_option("--steps", steps, "maximum number of steps");
  c_tower->add_option("--ambient", ambient, "full, cyclic or default (cyclic for prime arity)")
      ->check(CLI::IsMember({"full", "cyclic", "default"}));
  auto* c_ball = app.add_subcommand("ball", "growth of the word ball");
  c_ball->add_option("group", name)->required();
  c_ball->add_option("--radius", radius, "ball radius");
  auto* c_nucleus = app.add_subcommand("nucleus", "nucleus of a contracting group");
  c_nucleus->add_option("group", name)->required();
  auto* c_verify = app.add_subcommand("verify", "run an identity or oracle suite");
  c_verify->add_option("suite", name)->required();
  auto* c_render = app.add_subcommand("render", "DOT for an automaton, portrait or tower");
  c_render->add_option("kind", render_kind, "automaton, portrait or tower")
      ->required()
      ->check(CLI::IsMember({"automaton", "portrait", "tower"}));
  c_render->add_option("target", expr1, "expression, or group for tower")->required();
  c_render->add_option("--steps", steps, "maximum number of tower steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForVersion& e) {
    std::cout << e.what() << "\n";
    return ok;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  auto* cmd = app.get_subcommands().front();
  Output out;
  try {
    Runner run(g);
    out.inputs["file"] = g.file;
    if (g.level) out.inputs["level"] = *g.level;
    if (g.budget) out.inputs["budget"] = *g.budget;
    auto ambient_for = [&](unsigned arity, unsigned n) {
      if (ambient == "full") return PermSubgroup::full_wreath(arity, n);
      if (ambient == "cyclic") return PermSubgroup::cyclic_wreath(arity, n);
      return tower_ambient(arity, n);
    };
    auto tower_of = [&]() {
      const unsigned n = run.required_level();
      out.inputs["group"] = name;
      out.inputs["steps"] = steps;
      out.inputs["ambient"] = ambient;
      const auto img = run.image(name, n);
      return run.timed(out, "tower", [&] {
        return normalizer_tower(img, ambient_for(img.arity(), n), steps, run.normalizer_options());
      });
    };

    if (cmd == c_eval) {
      out.inputs["expr"] = expr1;
      const auto e = run.timed(out, "eval", [&] { return run.env().evaluate(expr1); });
      out.results = {{"automaton", to_json(e)}, {"states", e.num_states()}, {"trivial", is_trivial(e)}};
      out.text = automaton_text(e);
      out.dot = automaton_dot(e);
    } else if (cmd == c_eq) {
      out.inputs["lhs"] = expr1;
      out.inputs["rhs"] = expr2;
      const bool eq = run.timed(out, "eq", [&] {
        return equal(run.env().evaluate(expr1), run.env().evaluate(expr2), run.mealy());
      });
      out.results = {{"equal", eq}};
      out.text = std::string("equal: ") + (eq ? "true" : "false") + "\n";
      out.code = eq ? ok : check_failed;
    } else if (cmd == c_order) {
      out.inputs["expr"] = expr1;
      const std::uint64_t max = g.budget.value_or(4096);
      const auto e = run.env().evaluate(expr1);
      const auto o = run.timed(out, "order", [&] { return order_bounded(e, max, MealyOptions{}); });
      if (o) {
        out.results = {{"order", *o}};
        out.text = "order: " + std::to_string(*o) + "\n";
      } else {
        out.results = {{"order", nullptr}, {"exceeds", max}};
        out.text = "order: > " + std::to_string(max) + "\n";
        out.code = budget;
      }
    } else if (cmd == c_portrait) {
      out.inputs["expr"] = expr1;
      const unsigned n = run.required_level();
      const auto p = portrait(run.env().evaluate(expr1), n);
      json levels = json::array();
      std::size_t k = 0;
      for (unsigned l = 0; l < n; ++l) {
        json row = json::array();
        std::string line = std::to_string(l) + ":";
        for (std::uint64_t i = 0; i < ipow(p.arity, l); ++i, ++k) {
          row.push_back(p.activity[k].cycle_string());
          line += " " + p.activity[k].cycle_string();
        }
        levels.push_back(row);
        out.text += line + "\n";
      }
      out.results = {{"arity", p.arity}, {"depth", p.depth}, {"levels", levels}};
      out.dot = portrait_dot(p);
    } else if (cmd == c_truncate) {
      out.inputs["expr"] = expr1;
      const auto t = truncate(run.env().evaluate(expr1), run.required_level());
      out.results = {{"isometry", t.to_json()}, {"cycles", perm_text(t)}};
      out.text = perm_text(t) + "\n";
    } else if (cmd == c_gorder) {
      out.inputs["group"] = name;
      const unsigned n = run.required_level();
      const auto img = run.image(name, n);
      const auto o = run.timed(out, "group-order", [&] { return img.order(); });
      out.results = {{"order", o}};
      out.text = std::to_string(o) + "\n";
    } else if (cmd == c_norm) {
      out.inputs["group"] = name;
      out.inputs["ambient"] = ambient;
      const unsigned n = run.required_level();
      const auto img = run.image(name, n);
      const auto nm = run.timed(out, "normalizer", [&] {
        return ambient == "full" ? normalizer_in_wreath(img, run.normalizer_options())
                                 : normalizer_in(ambient_for(img.arity(), n), img, run.normalizer_options());
      });
      out.results = {{"group_order", img.order()}, {"normalizer_order", nm.order()},
                     {"index", nm.order() / img.order()}};
      out.text = "group order: " + std::to_string(img.order()) + "\nnormalizer order: " + std::to_string(nm.order()) +
                 "\n";
    } else if (cmd == c_tower) {
      const auto t = tower_of();
      out.results = t.to_json();
      for (const auto& s : t.steps) {
        out.text += std::to_string(s.order) + "  (quotient " + std::to_string(s.quotient_order) +
                    (s.elementary_abelian ? ", elementary abelian" : "") + ")\n";
      }
      out.text += t.stabilized ? "stabilized\n" : "not stabilized within the step bound\n";
      out.dot = tower_dot(t, name);
    } else if (cmd == c_ball) {
      out.inputs["group"] = name;
      out.inputs["radius"] = radius;
      const auto& grp = run.env().group(name);
      BallOptions bo;
      if (g.budget) bo.element_budget = static_cast<std::size_t>(*g.budget);
      const Ball b = run.timed(out, "ball", [&] { return Ball(symmetric_generators(grp), radius, bo); });
      json growth = json::array();
      for (unsigned r = 0; r <= radius; ++r) {
        growth.push_back(b.count_within(r));
        out.text += std::to_string(r) + ": " + std::to_string(b.count_within(r)) + "\n";
      }
      out.results = {{"growth", growth}};
    } else if (cmd == c_nucleus) {
      out.inputs["group"] = name;
      const auto nuc = run.timed(out, "nucleus", [&] { return compute_nucleus(run.env().group(name)); });
      json els = json::array();
      for (const auto& e : nuc.elements) els.push_back(to_json(e));
      out.results = {{"size", nuc.elements.size()}, {"rounds", nuc.rounds}, {"elements", els}};
      out.text = "nucleus of size " + std::to_string(nuc.elements.size()) + "\n";
    } else if (cmd == c_verify) {
      out.inputs["suite"] = name;
      run.timed(out, "verify", [&] {
        verify(run, name, out);
        return 0;
      });
    } else if (cmd == c_render) {
      out.inputs["kind"] = render_kind;
      out.inputs["target"] = expr1;
      if (render_kind == "automaton") {
        out.dot = automaton_dot(run.env().evaluate(expr1));
      } else if (render_kind == "portrait") {
        out.dot = portrait_dot(portrait(run.env().evaluate(expr1), run.required_level()));
      } else {
        name = expr1;
        out.dot = tower_dot(tower_of(), name);
      }
      if (g.format == "text") g.format = "dot";
    }
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return budget;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const arbor::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }

  if (g.format == "json") {
    const json report = {{"tool_version", kVersion},
                         {"command", cmd->get_name()},
                         {"inputs", out.inputs},
                         {"results", out.results},
                         {"timings_ms", out.timings}};
    std::cout << report.dump(2) << "\n";
  } else if (g.format == "dot") {
    if (out.dot.empty()) {
      std::cerr << "error: no DOT output for '" << cmd->get_name() << "'\n";
      return usage;
    }
    std::cout << out.dot;
  } else {
    std::cout << out.text;
  }
  return out.code;
}
