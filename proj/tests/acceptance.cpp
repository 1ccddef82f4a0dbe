// Prints one PASS/FAIL line per acceptance criterion.
//
//   acceptance [--only 1,4,...] [--expect-fail 2,3,...]
//
// Without --expect-fail the exit status is 0 iff every selected criterion
// passes. With it, the status is 0 iff the failing criteria are exactly the
// listed ones.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arbor/catalog.hpp"
#include "arbor/dsl.hpp"
#include "arbor/mealy.hpp"
#include "arbor/permlab.hpp"
#include "arbor/towerlab.hpp"
#include "arbor/wordcalc.hpp"
#include "dsl_gen.hpp"

using namespace arbor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

std::vector<FsAutomorphism> gens_of(const ExpandedGroup& g) {
  std::vector<FsAutomorphism> out;
  for (const auto& n : g.names()) out.push_back(g[n]);
  return out;
}

std::string join_ints(const std::vector<std::uint64_t>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

std::string failing(const SuiteReport& rep, const std::function<bool(const IdentityCheck&)>& keep) {
  std::string s;
  for (const auto& c : rep.checks) {
    if (keep(c) && c.status != CheckStatus::pass) s += (s.empty() ? "" : "; ") + c.name;
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome level4_orders() {
  const auto g = expand(builtin("grigorchuk"));
  const auto img = PermSubgroup::image(gens_of(g), 4);
  const auto w = PermSubgroup::full_wreath(2, 4);
  const auto n = normalizer_in_wreath(img);
  const auto go = img.order();
  const auto no = n.order();
  const auto wo = w.order();
  return {go == 4096 && no == 8192 && wo == 32768,
          "|G| = " + std::to_string(go) + ", |N| = " + std::to_string(no) + ", |W4| = " + std::to_string(wo),
          {}};
}

Outcome grigorchuk_identities() {
  const auto rep = identity_suite("grigorchuk", 3);
  Outcome o;
  o.pass = rep.all_pass();
  o.detail = std::to_string(rep.count(CheckStatus::pass)) + "/" + std::to_string(rep.checks.size()) + " pass";
  const auto bad = failing(rep, [](const IdentityCheck&) { return true; });
  if (!bad.empty()) o.detail += "; failing: " + bad;
  const auto g = expand(builtin("grigorchuk"));
  const auto p = ranked_generator(RankedGenerator::parse(Family::grigorchuk, "p"));
  const auto pa = commutator(p, g["a"]);
  const auto ac = compose(g["a"], g["c"]);
  o.notes.push_back("(ac)^8 = 1: " + std::string(is_trivial(power(ac, 8)) ? "true" : "false"));
  o.notes.push_back("[p,a] = 1: " + std::string(is_trivial(pa) ? "true" : "false"));
  o.notes.push_back("[p,a] = (ac)^4: " + std::string(equal(pa, power(ac, 4)) ? "true" : "false"));
  return o;
}

Outcome prenormalizer() {
  const auto rep = identity_suite("grigorchuk-prenormalizer", 3);
  auto in_scope = [](const IdentityCheck& c) {
    for (const char* s : {",a] =", ",b] =", ",c] =", ",d] ="}) {
      if (c.name.find(s) != std::string::npos) return true;
    }
    return false;
  };
  std::size_t total = 0;
  std::size_t passed = 0;
  for (const auto& c : rep.checks) {
    if (!in_scope(c)) continue;
    ++total;
    if (c.status == CheckStatus::pass) ++passed;
  }
  Outcome o;
  o.pass = total == 16 && passed == total;
  o.detail = std::to_string(passed) + "/" + std::to_string(total) + " pass";
  const auto bad = failing(rep, in_scope);
  if (!bad.empty()) o.detail += "; failing: " + bad;
  std::size_t extra = 0;
  std::size_t extra_pass = 0;
  for (const auto& c : rep.checks) {
    if (in_scope(c)) continue;
    ++extra;
    if (c.status == CheckStatus::pass) ++extra_pass;
  }
  o.notes.push_back("commutators with ∆^m p: " + std::to_string(extra_pass) + "/" + std::to_string(extra) + " trivial");
  return o;
}

Outcome gs_identities() {
  const auto rep = identity_suite("gs");
  Outcome o;
  o.pass = rep.all_pass();
  std::size_t inverse = 0;
  for (const auto& c : rep.checks) {
    if (c.orientation == "inverse") ++inverse;
  }
  o.detail = std::to_string(rep.count(CheckStatus::pass)) + "/" + std::to_string(rep.checks.size()) +
             " pass, orientation x = (0 1 2), " + std::to_string(inverse) + " hold only inverted";
  const auto bad = failing(rep, [](const IdentityCheck&) { return true; });
  if (!bad.empty()) o.detail += "; failing: " + bad;
  return o;
}

Outcome abelianization() {
  Outcome o;
  o.pass = true;
  const std::vector<std::uint64_t> want{3, 3};
  for (const auto& [name, level] : std::vector<std::pair<std::string, unsigned>>{
           {"gupta_sidki", 2}, {"gupta_sidki", 3}, {"fabrykowski_gupta", 2}}) {
    const auto inv = abelian_invariants(PermSubgroup::image(gens_of(expand(builtin(name))), level));
    o.pass = o.pass && inv == want;
    o.detail += (o.detail.empty() ? "" : ", ") + name + "@" + std::to_string(level) + " " + join_ints(inv);
  }
  return o;
}

Outcome indices() {
  const auto g = expand(builtin("grigorchuk"));
  const auto g5 = PermSubgroup::image(gens_of(g), 5);
  const auto b = normal_closure(g5, {truncate(g["b"], 5)});
  const auto ab = commutator(g["a"], g["b"]);
  const auto k = normal_closure(g5, {truncate(ab, 5)});
  const auto g4 = PermSubgroup::image(gens_of(g), 4);
  const auto k4 = normal_closure(g4, {truncate(ab, 4)});
  std::vector<TruncatedIsometry> kk;
  const auto id4 = TruncatedIsometry::identity(2, 4);
  for (const auto& x : k4.generators()) {
    const std::vector<TruncatedIsometry> left{x, id4};
    const std::vector<TruncatedIsometry> right{id4, x};
    kk.push_back(TruncatedIsometry::assemble(left, LetterPerm::identity(2)));
    kk.push_back(TruncatedIsometry::assemble(right, LetterPerm::identity(2)));
  }
  const PermSubgroup kxk(2, 5, kk);
  const auto ib = subgroup_index(g5, b);
  const auto ik = subgroup_index(g5, k);
  const bool normal = k.contains(kxk) && is_normal(k, kxk);
  const auto inv = normal ? quotient_abelian_invariants(k, kxk) : std::vector<std::uint64_t>{};
  return {ib == 8 && ik == 16 && normal && inv == std::vector<std::uint64_t>{4},
          "[G:B] = " + std::to_string(ib) + ", [G:K] = " + std::to_string(ik) + ", K/(KxK) " + join_ints(inv),
          {}};
}

Outcome normalizer_formula_oracle() {
  Outcome o;
  o.pass = true;
  for (unsigned level : {2u, 3u}) {
    const auto rep = normalizer_formula_oracle_check(level, 1'000'000);
    const bool ok = rep.exhaustive && rep.all_agree() && rep.quotient_agreements == rep.pairs_tested;
    o.pass = o.pass && ok;
    o.detail += (o.detail.empty() ? "" : ", ") + std::string("level ") + std::to_string(level) + ": " +
                std::to_string(rep.group_agreements) + "/" + std::to_string(rep.pairs_tested) + " groups, " +
                std::to_string(rep.quotient_agreements) + " quotients";
  }
  return o;
}

Outcome omega_formula() {
  Outcome o;
  o.pass = true;
  for (unsigned level : {2u, 3u}) {
    const auto rep = omega_formula_family_check(level);
    o.pass = o.pass && rep.all_agree();
    o.detail += (o.detail.empty() ? "" : ", ") + std::string("level ") + std::to_string(level) + ": " +
                std::to_string(rep.agreements) + "/" + std::to_string(rep.normal_pairs) + " agree";
    o.notes.push_back("level " + std::to_string(level) + " with centralizing diagonal: " +
                      std::to_string(rep.corrected_agreements) + "/" + std::to_string(rep.normal_pairs) + " agree");
    for (const auto& m : rep.mismatches) {
      o.notes.push_back("level " + std::to_string(level) + " pair (" + std::to_string(m.g_index) + ", " +
                        std::to_string(m.h_index) + "): formula " + std::to_string(m.check.formula_order) +
                        ", direct " + std::to_string(m.check.direct_order));
    }
  }
  return o;
}

Outcome contraction() {
  const auto g = expand(builtin("grigorchuk"));
  const auto plain = contraction_check(symmetric_generators(g), 8);
  const auto weighted = contraction_check(ranked_weighted_generators(Family::grigorchuk, 6, 3), 6);
  Outcome o;
  o.pass = plain.violations.empty() && weighted.violations.empty();
  o.detail = "plain radius 8: " + std::to_string(plain.ball_size) + " elements, " +
             std::to_string(plain.violations.size()) + " violations; weighted radius 6: " +
             std::to_string(weighted.ball_size) + " elements, " + std::to_string(weighted.violations.size()) +
             " violations";
  if (!weighted.violations.empty()) {
    const auto& v = weighted.violations.front();
    std::ostringstream ratio;
    ratio << weighted.max_ratio;
    o.notes.push_back("first weighted violation: " + v.witness + " at letter " + std::to_string(v.letter) +
                      ", max ratio " + ratio.str());
  }
  return o;
}

Outcome torsion() {
  const auto g = expand(builtin("grigorchuk"));
  const Ball ball(symmetric_generators(g), 6);
  std::uint64_t max_order = 0;
  std::size_t bad = 0;
  for (const auto& x : ball.elements()) {
    const auto k = order_bounded(x, 64);
    if (!k || (*k & (*k - 1)) != 0) {
      ++bad;
      continue;
    }
    max_order = std::max(max_order, *k);
  }
  return {bad == 0,
          std::to_string(ball.size()) + " elements, max order " + std::to_string(max_order) + ", " +
              std::to_string(bad) + " without 2-power order <= 64",
          {}};
}

Outcome dihedral_affine_cardioid() {
  const auto dp = expand(builtin("dihedral_pair"));
  const auto& t = dp["t"];
  const auto& d = dp["delta"];
  std::vector<std::string> bad;
  if (!equal(conjugate(t, d), invert(t))) bad.push_back("tau^delta");
  if (!is_trivial(power(d, 2))) bad.push_back("delta^2");
  for (std::int64_t x : {3, 5, 63}) {
    const auto s = DyadicScalar::exact(x);
    const auto lhs = truncate(conjugate(t, unitary(s).exact()), 6);
    if (lhs != tau_power(s).truncate(6)) bad.push_back("u_" + std::to_string(x));
  }
  const auto sigma = rigid_perm(LetterPerm::from_cycles(2, {{0, 1}}), 2);
  for (std::int64_t y : {0, 1, 2, 3, 5, 7, 11, -1, -6}) {
    if (!equal(conjugate(sigma, tau_power(DyadicScalar::exact(2 * y)).exact()), sigma)) {
      bad.push_back("sigma^tau^" + std::to_string(2 * y));
    }
  }
  for (unsigned n = 1; n <= 6; ++n) {
    const auto tn = truncate(t, n);
    Point v = 0;
    std::size_t len = 0;
    do {
      v = tn(v);
      ++len;
    } while (v != 0);
    if (len != tn.degree()) bad.push_back("cycle@" + std::to_string(n));
  }
  Outcome o;
  o.pass = bad.empty();
  o.detail = bad.empty() ? "all checks exact" : "failing:";
  for (const auto& b : bad) o.detail += " " + b;
  return o;
}

Outcome nucleus() {
  const auto g = expand(builtin("grigorchuk"));
  const auto ng = compute_nucleus(g);
  std::vector<FsAutomorphism> want{FsAutomorphism::identity(2)};
  for (const auto& n : {"a", "b", "c", "d"}) want.push_back(minimize(g[n]));
  bool ok = ng.elements.size() == want.size();
  for (const auto& w : want) ok = ok && ng.contains(w);
  const auto t = adding_machine();
  const auto nt = compute_nucleus(std::vector<FsAutomorphism>{t});
  const bool ok_t = nt.elements.size() == 3 && nt.contains(FsAutomorphism::identity(2)) && nt.contains(minimize(t)) &&
                    nt.contains(minimize(invert(t)));
  return {ok && ok_t,
          "grigorchuk: " + std::to_string(ng.elements.size()) + " states, adding machine: " +
              std::to_string(nt.elements.size()) + " states",
          {}};
}

Outcome rank_tables(const std::string& root) {
  Outcome o;
  o.pass = true;
  for (const auto& [family, file] : std::vector<std::pair<Family, std::string>>{
           {Family::gs, "rank_gs.txt"}, {Family::grigorchuk, "rank_grigorchuk.txt"}}) {
    const bool same = rank_table(family, 10, 4) == read_file(root + "/tests/golden/" + file);
    o.pass = o.pass && same;
    o.detail += (o.detail.empty() ? "" : ", ") + family_name(family) + (same ? " identical" : " differs");
  }
  return o;
}

Outcome dsl(const std::string& root) {
  std::mt19937_64 rng(20241015);
  std::size_t ok = 0;
  std::string first_bad;
  for (int i = 0; i < 1000; ++i) {
    const DslDocument doc = testgen::random_document(rng);
    try {
      if (parse_document(print(doc)) == doc) {
        ++ok;
        continue;
      }
    } catch (const Error&) {
    }
    if (first_bad.empty()) first_bad = print(doc);
  }
  std::size_t golden_ok = 0;
  const auto names = builtin_names();
  for (const auto& name : names) {
    const auto file = name == "finitary(2)" ? std::string("finitary2") : name;
    try {
      const auto doc = parse_document(read_file(root + "/groups/" + file + ".g"));
      if (doc.groups.size() == 1 && doc.groups[0] == builtin(name)) ++golden_ok;
    } catch (const std::exception&) {
    }
  }
  Outcome o;
  o.pass = ok == 1000 && golden_ok == names.size();
  o.detail = "round-trip " + std::to_string(ok) + "/1000, catalog files " + std::to_string(golden_ok) + "/" +
             std::to_string(names.size());
  if (!first_bad.empty()) o.notes.push_back("first failing document:\n" + first_bad);
  return o;
}

std::set<int> parse_set(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string only;
  std::string expect_fail;
  std::string root = ARBOR_SOURCE_DIR;
  app.add_option("--only", only, "Comma-separated criteria to run");
  app.add_option("--expect-fail", expect_fail, "Comma-separated criteria known to fail");
  app.add_option("--root", root, "Source tree with tests/golden and groups");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"level-4 orders 2^12 and 2^13", level4_orders},
      {"Grigorchuk identity suite", grigorchuk_identities},
      {"pre-normalizer commutators", prenormalizer},
      {"Gupta-Sidki identity suite", gs_identities},
      {"abelianization [3,3]", abelianization},
      {"indices at level 5", indices},
      {"normalizer formula vs brute force", normalizer_formula_oracle},
      {"Omega formula vs brute force", omega_formula},
      {"contraction bound", contraction},
      {"torsion spot-check", torsion},
      {"dihedral, affine and cardioid identities", dihedral_affine_cardioid},
      {"nuclei", nucleus},
      {"rank tables vs goldens", [&] { return rank_tables(root); }},
      {"DSL round-trip and catalog files", [&] { return dsl(root); }},
  };

  const auto selected = parse_set(only);
  const auto expected = parse_set(expect_fail);
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) failed.insert(id);
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << " ("
              << o.detail << ") [" << ms << " ms]\n";
    for (const auto& n : o.notes) std::cout << "    note: " << n << "\n";
    std::cout.flush();
  }

  if (expect_fail.empty()) return failed.empty() ? 0 : 1;
  std::set<int> expected_run;
  for (int id : expected) {
    if (selected.empty() || selected.count(id)) expected_run.insert(id);
  }
  if (failed != expected_run) {
    std::cout << "failing set differs from the expected one\n";
    return 1;
  }
  return 0;
}
