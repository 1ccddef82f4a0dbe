#include "arbor/towerlab.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "arbor/error.hpp"

namespace arbor {

namespace {

TruncatedIsometry pair_of(const TruncatedIsometry& x, const TruncatedIsometry& y) {
  std::vector<TruncatedIsometry> s{x, y};
  return TruncatedIsometry::assemble(s, LetterPerm::identity(2));
}

// (prod U)<sigma>(diag S) without the normality check
PermSubgroup realize_pair(const PermSubgroup& u, const PermSubgroup& s) {
  const unsigned n = s.level() + 1;
  const auto id = TruncatedIsometry::identity(2, s.level());
  std::vector<TruncatedIsometry> gens;
  for (const auto& x : u.generators()) gens.push_back(pair_of(x, id));
  gens.push_back(TruncatedIsometry::rigid(LetterPerm::from_cycles(2, {{0, 1}}), n));
  for (const auto& x : s.generators()) gens.push_back(pair_of(x, x));
  return PermSubgroup(2, n, std::move(gens));
}

}  // namespace

// ---------------------------------------------------------------------------
// Split forms

SplitForm::SplitForm(PermSubgroup u, PermSubgroup s) : u_(std::move(u)), s_(std::move(s)) {
  if (u_.arity() != 2 || s_.arity() != 2) throw ArityMismatch("split forms are binary");
  if (u_.level() != s_.level()) throw ArityMismatch("split form: U and S at different levels");
  if (!is_normal(s_, u_)) throw PreconditionFailed("split form: U is not normal in S");
}

PermSubgroup realize(const SplitForm& sf) { return realize_pair(sf.u(), sf.s()); }

NormalizerFormula normalizer_formula(const SplitForm& sf, const NormalizerOptions& opt) {
  auto v = omega(sf.s(), sf.u());
  auto t = intersection(normalizer_in_wreath(sf.u(), opt), normalizer_in_wreath(sf.s(), opt));
  const auto vu = v.order() / sf.u().order();
  const auto ts = t.order() / sf.s().order();
  return {SplitForm(std::move(v), std::move(t)), vu, ts};
}

std::vector<SplitForm> all_split_forms(unsigned level) {
  if (level == 0) throw PreconditionFailed("split forms need level >= 1");
  const auto subs = all_subgroups(PermSubgroup::full_wreath(2, level - 1));
  std::vector<SplitForm> out;
  for (const auto& s : subs) {
    for (const auto& u : subs) {
      if (u.order() <= s.order() && s.order() % u.order() == 0 && is_normal(s, u)) out.emplace_back(u, s);
    }
  }
  return out;
}

nlohmann::json FormulaOracleReport::to_json() const {
  nlohmann::json mm = nlohmann::json::array();
  for (const auto& m : mismatches) {
    mm.push_back({{"u", m.u_index},
                  {"s", m.s_index},
                  {"formula_order", m.formula_order},
                  {"direct_order", m.direct_order},
                  {"groups_agree", m.groups_agree},
                  {"quotient_agrees", m.quotient_agrees}});
  }
  return {{"level", level},
          {"subgroups", subgroups},
          {"pairs_total", pairs_total},
          {"pairs_tested", pairs_tested},
          {"exhaustive", exhaustive},
          {"group_agreements", group_agreements},
          {"quotient_agreements", quotient_agreements},
          {"mismatches", mm}};
}

FormulaOracleReport normalizer_formula_oracle_check(unsigned level, std::size_t exhaustive_bound, std::uint64_t seed) {
  if (level < 1) throw PreconditionFailed("oracle check needs level >= 1");
  FormulaOracleReport rep;
  rep.level = level;
  const auto subs = all_subgroups(PermSubgroup::full_wreath(2, level - 1));
  rep.subgroups = subs.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t si = 0; si < subs.size(); ++si) {
    for (std::size_t ui = 0; ui < subs.size(); ++ui) {
      const auto& s = subs[si];
      const auto& u = subs[ui];
      if (s.order() % u.order() == 0 && is_normal(s, u)) pairs.emplace_back(ui, si);
    }
  }
  rep.pairs_total = pairs.size();
  if (pairs.size() > exhaustive_bound) {
    rep.exhaustive = false;
    std::mt19937_64 rng(seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(exhaustive_bound);
    std::sort(pairs.begin(), pairs.end());
  }
  rep.pairs_tested = pairs.size();
  for (const auto& [ui, si] : pairs) {
    SplitForm sf(subs[ui], subs[si]);
    const auto r = realize(sf);
    const auto nf = normalizer_formula(sf);
    const auto formula = realize(nf.form);
    const auto direct = normalizer_in_wreath(r);
    const bool groups = formula.same_group(direct);
    const bool quotient = direct.order() / r.order() == nf.quotient_order();
    rep.group_agreements += groups;
    rep.quotient_agreements += quotient;
    if (!groups || !quotient) rep.mismatches.push_back({ui, si, formula.order(), direct.order(), groups, quotient});
  }
  return rep;
}

OmegaFormulaCheck omega_formula_check(const SplitForm& g, const SplitForm& h) {
  const auto rg = realize(g);
  const auto rh = realize(h);
  if (!is_normal(rg, rh)) throw PreconditionFailed("omega formula: H is not normal in G");
  const auto direct = omega(rg, rh);
  const auto first = intersection(g.u(), omega(g.s(), h.u()));
  const auto diag = omega(g.s(), h.s());
  const auto formula = realize_pair(first, diag);
  // diagonal part further restricted to elements centralizing U modulo V
  std::vector<TruncatedIsometry> central;
  for (const auto& x : diag.elements()) {
    const bool ok = std::all_of(g.u().generators().begin(), g.u().generators().end(), [&](const auto& u) {
      return h.u().contains(wreath_compose(wreath_compose(x.inverse(), u.inverse()), wreath_compose(x, u)));
    });
    if (ok) central.push_back(x);
  }
  const auto corrected = realize_pair(first, subgroup_from_elements(2, g.s().level(), central));
  return {formula.same_group(direct), formula.order(), direct.order(), corrected.same_group(direct),
          corrected.order()};
}

nlohmann::json OmegaFamilyReport::to_json() const {
  auto ms = nlohmann::json::array();
  for (const auto& m : mismatches) {
    ms.push_back({{"g", m.g_index},
                  {"h", m.h_index},
                  {"formula_order", m.check.formula_order},
                  {"direct_order", m.check.direct_order},
                  {"centralizing_order", m.check.corrected_order},
                  {"centralizing_agrees", m.check.corrected_agree}});
  }
  return {{"level", level},
          {"forms", forms},
          {"normal_pairs", normal_pairs},
          {"agreements", agreements},
          {"centralizing_agreements", corrected_agreements},
          {"mismatches", ms}};
}

OmegaFamilyReport omega_formula_family_check(unsigned level) {
  OmegaFamilyReport rep;
  rep.level = level;
  const auto forms = all_split_forms(level);
  rep.forms = forms.size();
  std::vector<PermSubgroup> real;
  for (const auto& f : forms) real.push_back(realize(f));
  for (std::size_t i = 0; i < forms.size(); ++i) {
    for (std::size_t j = 0; j < forms.size(); ++j) {
      if (real[i].order() % real[j].order() != 0 || !is_normal(real[i], real[j])) continue;
      ++rep.normal_pairs;
      const auto c = omega_formula_check(forms[i], forms[j]);
      rep.agreements += c.agree;
      rep.corrected_agreements += c.corrected_agree;
      if (!c.agree) rep.mismatches.push_back({i, j, c});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Layered towers

bool LayeredReport::all_agree() const {
  return std::all_of(steps.begin(), steps.end(), [](const LayeredStep& s) { return s.agree; });
}

nlohmann::json LayeredReport::to_json() const {
  nlohmann::json s = nlohmann::json::array();
  for (const auto& st : steps) {
    nlohmann::json j{{"index", st.index},
                     {"u_order", st.u_order},
                     {"s_order", st.s_order},
                     {"formula_order", st.formula_order},
                     {"agree", st.agree},
                     {"elementary_abelian", st.elementary_abelian}};
    j["direct_order"] = st.direct_order ? nlohmann::json(*st.direct_order) : nlohmann::json(nullptr);
    s.push_back(j);
  }
  nlohmann::json j{{"level", level}, {"steps", s}, {"stabilized", stabilized}};
  j["s2_equals_s1"] = s2_equals_s1 ? nlohmann::json(*s2_equals_s1) : nlohmann::json(nullptr);
  j["omega_u3_u1_equals_u3_l"] =
      omega_u3_u1_equals_u3_l ? nlohmann::json(*omega_u3_u1_equals_u3_l) : nlohmann::json(nullptr);
  return j;
}

LayeredReport layered_tower_tables(const PermSubgroup& l, unsigned steps, const NormalizerOptions& opt) {
  if (l.arity() != 2) throw ArityMismatch("layered towers are binary");
  LayeredReport rep;
  rep.level = l.level() + 1;
  rep.forms.emplace_back(l, l);
  std::vector<PermSubgroup> terms{realize(rep.forms[0])};
  const auto direct = normalizer_tower(terms[0], PermSubgroup::full_wreath(2, rep.level), steps, opt);
  for (unsigned i = 1; i <= steps; ++i) {
    auto nf = normalizer_formula(rep.forms.back(), opt);
    auto next = realize(nf.form);
    LayeredStep st;
    st.index = i;
    st.u_order = nf.form.u().order();
    st.s_order = nf.form.s().order();
    st.formula_order = next.order();
    if (i < direct.terms.size()) {
      st.direct_order = direct.terms[i].order();
      st.agree = next.same_group(direct.terms[i]);
    } else {
      // the direct tower stopped: the formula must have stopped too
      st.agree = next.same_group(direct.terms.back());
    }
    st.elementary_abelian = is_elementary_abelian_quotient(next, terms.back());
    const bool same = next.order() == terms.back().order();
    rep.steps.push_back(st);
    rep.forms.push_back(std::move(nf.form));
    terms.push_back(std::move(next));
    if (same) {
      rep.stabilized = true;
      break;
    }
  }
  if (rep.forms.size() > 2) rep.s2_equals_s1 = rep.forms[2].s().same_group(rep.forms[1].s());
  if (rep.forms.size() > 3) {
    const auto& u3 = rep.forms[3].u();
    try {
      rep.omega_u3_u1_equals_u3_l = omega(u3, rep.forms[1].u()).same_group(omega(u3, l));
    } catch (const PreconditionFailed&) {
      rep.omega_u3_u1_equals_u3_l = false;
    }
  }
  return rep;
}

PermSubgroup tower_ambient(unsigned arity, unsigned level) {
  bool prime = arity >= 2;
  for (unsigned p = 2; p * p <= arity; ++p) {
    if (arity % p == 0) prime = false;
  }
  return prime ? PermSubgroup::cyclic_wreath(arity, level) : PermSubgroup::full_wreath(arity, level);
}

std::string tower_dot(const TowerReport& report, const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n  rankdir=BT;\n  node [shape=box];\n";
  for (std::size_t i = 0; i < report.terms.size(); ++i) {
    os << "  n" << i << " [label=\"N" << i << "\\norder " << report.terms[i].order() << "\"];\n";
  }
  for (std::size_t i = 0; i < report.steps.size(); ++i) {
    const auto& st = report.steps[i];
    os << "  n" << i << " -> n" << i + 1 << " [label=\"" << st.quotient_order
       << (st.elementary_abelian ? " (el. ab.)" : "") << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Ranked generators

Family parse_family(const std::string& name) {
  if (name == "gs" || name == "gupta_sidki") return Family::gs;
  if (name == "grigorchuk") return Family::grigorchuk;
  throw UnknownName("unknown ranked family '" + name + "' (expected gs or grigorchuk)");
}

std::string family_name(Family f) { return f == Family::gs ? "gs" : "grigorchuk"; }

namespace {

const char* op_symbol(Op op) {
  switch (op) {
    case Op::diag:
      return "∆";
    case Op::deri:
      return "∂";
    case Op::proj:
      return "π";
  }
  return "?";
}

std::uint64_t base_rank(Family f, const std::string& base) {
  if (f == Family::gs && base == "x") return 1;
  if (f == Family::grigorchuk) {
    if (base == "p") return 1;
    if (base == "q") return 2;
    if (base == "r") return 3;
  }
  throw UnknownName("unknown ranked base '" + base + "' for family " + family_name(f));
}

// rank(op Y) given rank(Y)
std::uint64_t op_rank(Family f, Op op, std::uint64_t r) {
  if (f == Family::gs) {
    switch (op) {
      case Op::diag:
        return 3 * r - 2;
      case Op::deri:
        return 3 * r - 1;
      case Op::proj:
        return 3 * r;
    }
  }
  if (op == Op::deri) throw PreconditionFailed("the grigorchuk family has no ∂ prefix");
  return op == Op::proj ? 2 * r : 2 * r - 1;
}

}  // namespace

std::uint64_t RankedGenerator::rank() const {
  std::uint64_t r = base_rank(family, base);
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) r = op_rank(family, *it, r);
  return r;
}

std::string RankedGenerator::str() const {
  std::string s;
  for (auto op : prefix) s += op_symbol(op);
  return s + base;
}

RankedGenerator RankedGenerator::parse(Family family, const std::string& text) {
  RankedGenerator g;
  g.family = family;
  std::size_t i = 0;
  auto starts = [&](const char* sym) { return text.compare(i, std::char_traits<char>::length(sym), sym) == 0; };
  while (i < text.size()) {
    if (starts("∆")) {
      g.prefix.push_back(Op::diag);
      i += 3;
    } else if (starts("∂")) {
      g.prefix.push_back(Op::deri);
      i += 3;
    } else if (starts("π")) {
      g.prefix.push_back(Op::proj);
      i += 2;
    } else if (text[i] == 'D' && i + 1 < text.size()) {
      g.prefix.push_back(Op::diag);
      ++i;
    } else if (text[i] == 'd' && i + 1 < text.size()) {
      g.prefix.push_back(Op::deri);
      ++i;
    } else if (text[i] == 'P' && i + 1 < text.size()) {
      g.prefix.push_back(Op::proj);
      ++i;
    } else {
      break;
    }
  }
  g.base = text.substr(i);
  base_rank(family, g.base);
  g.rank();  // rejects prefixes the family does not have
  return g;
}

namespace {

FsAutomorphism apply_op(Op op, const FsAutomorphism& g) {
  switch (op) {
    case Op::diag:
      return delta(g);
    case Op::deri:
      return deri(g);
    case Op::proj:
      return proj(g);
  }
  return g;
}

FsAutomorphism base_element(Family f, const std::string& base) {
  if (f == Family::gs) {
    if (base != "x") throw UnknownName("unknown gs base '" + base + "'");
    return rigid_perm(LetterPerm::from_cycles(3, {{0, 1, 2}}), 3);
  }
  static const ExpandedGroup g = expand(builtin("grigorchuk"));
  const auto& a = g["a"];
  const auto& d = g["d"];
  if (base == "p") return proj(compose(compose(a, d), compose(a, d)));
  if (base == "q") return proj(compose(a, d));
  if (base == "r") return proj(a);
  throw UnknownName("unknown grigorchuk base '" + base + "'");
}

}  // namespace

FsAutomorphism ranked_generator(const RankedGenerator& g) {
  auto x = base_element(g.family, g.base);
  for (auto it = g.prefix.rbegin(); it != g.prefix.rend(); ++it) x = apply_op(*it, x);
  return minimize(x);
}

std::vector<RankedGenerator> enumerate_ranked(Family family, unsigned max_rank, unsigned max_prefix) {
  const std::vector<std::string> bases = family == Family::gs ? std::vector<std::string>{"x"}
                                                              : std::vector<std::string>{"r", "q", "p"};
  const std::vector<Op> ops =
      family == Family::gs ? std::vector<Op>{Op::diag, Op::deri, Op::proj} : std::vector<Op>{Op::diag, Op::proj};
  std::vector<RankedGenerator> all;
  for (const auto& base : bases) {
    std::vector<std::vector<Op>> layer{{}};
    for (unsigned len = 0; len <= max_prefix; ++len) {
      std::vector<std::vector<Op>> next;
      for (const auto& z : layer) {
        RankedGenerator g{family, z, base};
        if (g.rank() <= max_rank) all.push_back(g);
        if (len < max_prefix) {
          for (auto op : ops) {
            auto w = z;
            w.insert(w.begin(), op);
            next.push_back(std::move(w));
          }
        }
      }
      layer = std::move(next);
    }
  }
  std::map<std::string, std::size_t> base_pos;
  for (std::size_t i = 0; i < bases.size(); ++i) base_pos[bases[i]] = i;
  std::stable_sort(all.begin(), all.end(), [&](const RankedGenerator& x, const RankedGenerator& y) {
    return std::tuple(x.rank(), base_pos[x.base], x.prefix.size()) <
           std::tuple(y.rank(), base_pos[y.base], y.prefix.size());
  });
  return all;
}

std::string rank_table(Family family, unsigned max_rank, unsigned max_prefix) {
  const auto all = enumerate_ranked(family, max_rank, max_prefix);
  std::ostringstream os;
  for (unsigned k = 1; k <= max_rank; ++k) {
    os << "rank " << k << ":";
    for (const auto& g : all) {
      if (g.rank() == k) os << ' ' << g.str();
    }
    os << '\n';
  }
  return os.str();
}

std::vector<WeightedGenerator> ranked_weighted_generators(Family family, unsigned max_weight, unsigned max_prefix) {
  const auto group = expand(builtin(family == Family::gs ? "gupta_sidki" : "grigorchuk"));
  auto out = symmetric_generators(group);
  if (max_weight < 2) return out;
  for (const auto& g : enumerate_ranked(family, max_weight - 1, max_prefix)) {
    const auto e = ranked_generator(g);
    const auto w = static_cast<unsigned>(g.rank() + 1);
    out.push_back({g.str(), e, w});
    const auto inv = minimize(invert(e));
    if (!(inv == e)) out.push_back({g.str() + "^-1", inv, w});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Identity catalogues

std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::unreduced:
      return "unreduced";
    case CheckStatus::budget:
      return "budget";
  }
  return "?";
}

std::size_t SuiteReport::count(CheckStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [&](const IdentityCheck& c) { return c.status == s; }));
}

const IdentityCheck* SuiteReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j{{"name", c.name}, {"status", status_name(c.status)}, {"orientation", c.orientation}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    cs.push_back(j);
  }
  return {{"suite", suite},
          {"checks", cs},
          {"summary",
           {{"total", checks.size()},
            {"pass", count(CheckStatus::pass)},
            {"fail", count(CheckStatus::fail)},
            {"unreduced", count(CheckStatus::unreduced)},
            {"budget", count(CheckStatus::budget)}}}};
}

std::vector<std::string> identity_suite_names() { return {"grigorchuk", "grigorchuk-prenormalizer", "gs"}; }

IdentityCheck check_identity(const std::string& name, const FsAutomorphism& lhs, const FsAutomorphism& rhs,
                             const MealyOptions& opt) {
  IdentityCheck c;
  c.name = name;
  try {
    const bool stated = equal(lhs, rhs, opt);
    const bool inverse = equal(lhs, invert(rhs), opt);
    if (stated && inverse) {
      c.orientation = "both";
    } else if (stated) {
      c.orientation = "stated";
    } else if (inverse) {
      c.orientation = "inverse";
    } else {
      c.orientation = "neither";
    }
    c.status = (stated || inverse) ? CheckStatus::pass : CheckStatus::fail;
  } catch (const BudgetExceeded& e) {
    c.status = CheckStatus::budget;
    c.orientation = "n/a";
    c.detail = e.what();
  }
  return c;
}

namespace {

std::string repeat(const std::string& s, unsigned n) {
  std::string out;
  for (unsigned i = 0; i < n; ++i) out += s;
  return out;
}

const std::string kDiag = "∆";
const std::string kDeri = "∂";
const std::string kProj = "π";

FsAutomorphism ranked(Family f, const std::string& text) { return ranked_generator(RankedGenerator::parse(f, text)); }

void grigorchuk_suite(SuiteReport& rep, unsigned depth, const MealyOptions& opt) {
  const auto g = expand(builtin("grigorchuk"));
  const auto one = FsAutomorphism::identity(2);
  const auto& a = g["a"];
  const auto& c = g["c"];
  const auto p = ranked(Family::grigorchuk, "p");
  const auto q = ranked(Family::grigorchuk, "q");
  const auto r = ranked(Family::grigorchuk, "r");
  rep.checks.push_back(check_identity("[p,q] = 1", commutator(p, q, opt), one, opt));
  rep.checks.push_back(check_identity("[p,r] = 1", commutator(p, r, opt), one, opt));
  rep.checks.push_back(check_identity("[q,r] = p", commutator(q, r, opt), p, opt));
  rep.checks.push_back(check_identity("[p,a] = (ac)^8", commutator(p, a, opt), power(compose(a, c), 8, opt), opt));
  std::vector<std::string> layer{""};
  for (unsigned len = 0; len <= depth; ++len) {
    std::vector<std::string> next;
    for (const auto& z : layer) {
      const auto dz = ranked(Family::grigorchuk, kDiag + z + "p");
      const auto pz = ranked(Family::grigorchuk, kProj + z + "p");
      rep.checks.push_back(check_identity("[" + kDiag + z + "p,a] = 1", commutator(dz, a, opt), one, opt));
      rep.checks.push_back(check_identity("[" + kProj + z + "p,a] = " + kDiag + z + "p", commutator(pz, a, opt), dz, opt));
      next.push_back(kDiag + z);
      next.push_back(kProj + z);
    }
    layer = std::move(next);
  }
}

void prenormalizer_suite(SuiteReport& rep, unsigned depth, const MealyOptions& opt) {
  const auto g = expand(builtin("grigorchuk"));
  const auto one = FsAutomorphism::identity(2);
  for (unsigned n = 0; n <= depth; ++n) {
    const std::string u = kProj + repeat(kDiag, n) + "p";
    const auto x = ranked(Family::grigorchuk, u);
    const std::string expected = repeat(kDiag, n + 1) + "p";
    rep.checks.push_back(
        check_identity("[" + u + ",a] = " + expected, commutator(x, g["a"], opt), ranked(Family::grigorchuk, expected), opt));
    for (const char* s : {"b", "c", "d"}) {
      rep.checks.push_back(check_identity("[" + u + "," + s + "] = 1", commutator(x, g[s], opt), one, opt));
    }
    for (unsigned m = 0; m <= depth; ++m) {
      const std::string v = repeat(kDiag, m) + "p";
      rep.checks.push_back(
          check_identity("[" + u + "," + v + "] = 1", commutator(x, ranked(Family::grigorchuk, v), opt), one, opt));
    }
  }
}

void gs_suite(SuiteReport& rep, const MealyOptions& opt) {
  const auto gs = expand(builtin("gupta_sidki"));
  const auto kl = expand(builtin("gs_klein"));
  const auto one = FsAutomorphism::identity(3);
  const auto& x = gs["x"];
  const auto& gamma = gs["g"];
  const FsAutomorphism tau[3] = {kl["tau1"], kl["tau2"], kl["tau3"]};
  const std::string tn[3] = {"τ1", "τ2", "τ3"};
  rep.checks.push_back(check_identity("x^3 = 1", power(x, 3, opt), one, opt));
  rep.checks.push_back(check_identity("γ^3 = 1", power(gamma, 3, opt), one, opt));
  for (int i = 0; i < 3; ++i) {
    rep.checks.push_back(check_identity(tn[i] + "^2 = 1", power(tau[i], 2, opt), one, opt));
    for (int j = i + 1; j < 3; ++j) {
      rep.checks.push_back(check_identity("[" + tn[i] + "," + tn[j] + "] = 1", commutator(tau[i], tau[j], opt), one, opt));
    }
  }
  rep.checks.push_back(check_identity(tn[0] + tn[1] + " = " + tn[2], compose(tau[0], tau[1], opt), tau[2], opt));
  for (unsigned n = 0; n <= 4; ++n) {
    const std::string e = repeat(kDiag, n) + "x";
    const auto dx = ranked(Family::gs, e);
    const int sign = n % 2 == 0 ? 1 : -1;
    const int exps[3] = {-1, sign, -sign};
    for (int i = 0; i < 3; ++i) {
      const std::string rhs = exps[i] == 1 ? e : "(" + e + ")^-1";
      rep.checks.push_back(check_identity("(" + e + ")^" + tn[i] + " = " + rhs, conjugate(dx, tau[i], opt),
                                          power(dx, exps[i], opt), opt));
    }
  }
  rep.checks.push_back(check_identity("γ^" + tn[0] + " = γ", conjugate(gamma, tau[0], opt), gamma, opt));
  rep.checks.push_back(
      check_identity("γ^" + tn[1] + " = γ^-1", conjugate(gamma, tau[1], opt), invert(gamma), opt));
  rep.checks.push_back(
      check_identity("γ^" + tn[2] + " = γ^-1", conjugate(gamma, tau[2], opt), invert(gamma), opt));
  for (unsigned n = 0; n <= 2; ++n) {
    const std::string phi_name = kDeri + repeat(kDiag, 2 * n + 1) + "x";
    const auto phi = ranked(Family::gs, phi_name);
    for (int i = 0; i < 2; ++i) {
      rep.checks.push_back(
          check_identity("[" + phi_name + "," + tn[i] + "] = 1", commutator(phi, tau[i], opt), one, opt));
    }
    const std::string target = repeat(kDiag, 2 * n + 2) + "x";
    rep.checks.push_back(check_identity("[x," + phi_name + "] = " + target, commutator(x, phi, opt),
                                        ranked(Family::gs, target), opt));
    rep.checks.push_back(check_identity("[γ," + phi_name + "] = 1", commutator(gamma, phi, opt), one, opt));
    for (unsigned m = 1; m <= 4; ++m) {
      const std::string u = repeat(kDiag, m) + "x";
      rep.checks.push_back(
          check_identity("[" + u + "," + phi_name + "] = 1", commutator(ranked(Family::gs, u), phi, opt), one, opt));
    }
  }
}

}  // namespace

SuiteReport identity_suite(const std::string& name, unsigned prefix_depth, const MealyOptions& opt) {
  SuiteReport rep;
  rep.suite = name;
  if (name == "grigorchuk") {
    grigorchuk_suite(rep, prefix_depth, opt);
  } else if (name == "grigorchuk-prenormalizer") {
    prenormalizer_suite(rep, prefix_depth, opt);
  } else if (name == "gs") {
    gs_suite(rep, opt);
  } else {
    throw UnknownName("unknown identity suite '" + name + "'");
  }
  std::stable_sort(rep.checks.begin(), rep.checks.end(),
                   [](const IdentityCheck& x, const IdentityCheck& y) { return x.name < y.name; });
  return rep;
}

// ---------------------------------------------------------------------------
// Rank reduction of commutators

namespace {

// One factor of a product: a catalog letter or a ranked generator, to a power.
struct Atom {
  bool ranked = false;
  std::string name;  // letter, or ranked base
  std::vector<Op> prefix;
  int exp = 1;

  bool same_key(const Atom& o) const { return ranked == o.ranked && name == o.name && prefix == o.prefix; }
};

using Expr = std::vector<Atom>;

// element of the first-level wreath decomposition: coordinates, then root permutation
struct WExpr {
  LetterPerm perm;
  std::vector<Expr> coord;
};

class Reducer {
 public:
  explicit Reducer(Family f)
      : family_(f),
        arity_(f == Family::gs ? 3 : 2),
        group_(expand(builtin(f == Family::gs ? "gupta_sidki" : "grigorchuk"))),
        ball_(symmetric_generators(group_), f == Family::gs ? 5 : 8) {}

  Family family() const { return family_; }
  const ExpandedGroup& group() const { return group_; }

  Atom atom_of(const RankedGenerator& g) const { return {true, g.base, g.prefix, 1}; }
  Atom letter(const std::string& s) const {
    if (family_ == Family::gs && s == "x") return {true, "x", {}, 1};
    return {false, s, {}, 1};
  }

  std::uint64_t rank(const Expr& e) const {
    std::uint64_t r = 0;
    for (const auto& a : e) {
      if (a.ranked) r = std::max(r, RankedGenerator{family_, a.prefix, a.name}.rank());
    }
    return r;
  }

  std::string str(const Expr& e) const {
    if (e.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i) s += "·";
      const auto& a = e[i];
      s += a.ranked ? RankedGenerator{family_, a.prefix, a.name}.str() : a.name;
      if (a.exp != 1) s += "^" + std::to_string(a.exp);
    }
    return s;
  }

  FsAutomorphism eval(const Expr& e) {
    auto g = FsAutomorphism::identity(arity_);
    for (const auto& a : e) g = compose(g, power(eval_atom(a), a.exp));
    return minimize(g);
  }

  FsAutomorphism eval_atom(const Atom& a) {
    const std::string key = (a.ranked ? "R" : "L") + RankedGenerator{family_, a.prefix, a.name}.str();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto g = a.ranked ? ranked_generator(RankedGenerator{family_, a.prefix, a.name}) : group_[a.name];
    cache_.emplace(key, g);
    return g;
  }

  std::optional<Expr> reduce_comm(const Atom& u, const Atom& v, unsigned depth = 0) {
    if (depth > 24) return std::nullopt;
    if (!u.ranked && !v.ranked) return normalize({inverse(u), inverse(v), u, v});
    std::optional<Expr> best;
    auto w = mul(mul(inv(lift(u)), inv(lift(v))), mul(lift(u), lift(v)));
    if (w.perm.is_identity()) {
      std::vector<Expr> coords;
      bool ok = true;
      for (auto& c : w.coord) {
        auto r = reduce_expr(c, depth + 1);
        if (!r) {
          ok = false;
          break;
        }
        coords.push_back(std::move(*r));
      }
      if (ok) best = recompose(coords, depth + 1);
    }
    if (depth == 0) {
      // exact coordinate decomposition of the commutator itself
      auto d = decompose(commutator(eval({u}), eval({v})), kDecomposeDepth);
      if (d && (!best || rank(*d) < rank(*best))) best = std::move(d);
    }
    return best;
  }

  /// g = diag(g0) proj(g0^-1 g1) in the binary case, diag(g0) deri(A) proj(AB) with
  /// (1, A, B) = diag(g0)^-1 g in the ternary case; a root activity is split off first.
  std::optional<Expr> decompose(const FsAutomorphism& g, unsigned depth) {
    if (is_trivial(g)) return Expr{};
    if (auto m = lookup(g)) return m;
    if (depth == 0) return std::nullopt;
    if (!g.root_perm().is_identity()) {
      Atom fix = family_ == Family::gs ? Atom{true, "x", {}, 1} : letter("a");
      const auto f = eval_atom(fix);
      if (!(g.root_perm() == f.root_perm())) fix.exp = -1;
      auto h = decompose(compose(g, power(f, -fix.exp)), depth);
      if (!h) return std::nullopt;
      h->push_back(fix);
      return normalize(*h);
    }
    std::vector<FsAutomorphism> c;
    for (unsigned i = 0; i < arity_; ++i) c.push_back(section(g, static_cast<Letter>(i)));
    Expr out;
    auto head = decompose(c[0], depth - 1);
    if (!head) return std::nullopt;
    if (!head->empty()) {
      auto d = apply(Op::diag, *head);
      if (!d) return std::nullopt;
      out = std::move(*d);
    }
    const auto c0i = invert(c[0]);
    auto append = [&](Op op, const FsAutomorphism& y) -> bool {
      auto e = decompose(y, depth - 1);
      if (!e) return false;
      if (e->empty()) return true;
      auto m = apply(op, *e);
      if (!m) return false;
      out.insert(out.end(), m->begin(), m->end());
      return true;
    };
    if (arity_ == 2) {
      if (!append(Op::proj, compose(c0i, c[1]))) return std::nullopt;
    } else {
      const auto a = compose(c0i, c[1]);
      if (!append(Op::deri, a) || !append(Op::proj, compose(a, compose(c0i, c[2])))) return std::nullopt;
    }
    return normalize(out);
  }

 private:
  static constexpr unsigned kDecomposeDepth = 6;

  int atom_order(const Atom& a) {
    if (a.ranked) {
      if (a.name == "q") return 4;
      return a.name == "x" ? 3 : 2;
    }
    const std::string key = "o" + a.name;
    auto it = orders_.find(key);
    if (it != orders_.end()) return it->second;
    const auto o = order_bounded(group_[a.name], 64);
    const int n = o ? static_cast<int>(*o) : 0;
    orders_.emplace(key, n);
    return n;
  }

  Atom inverse(Atom a) const {
    a.exp = -a.exp;
    return a;
  }

  Expr inverse(const Expr& e) const {
    Expr out;
    for (auto it = e.rbegin(); it != e.rend(); ++it) out.push_back(inverse(*it));
    return out;
  }

  // exponent into (-n/2, n/2]; zero means drop; (Zq)^2 becomes Zp
  std::optional<Atom> canon(Atom a) {
    const int n = atom_order(a);
    if (n > 0) {
      a.exp = ((a.exp % n) + n) % n;
      if (2 * a.exp > n) a.exp -= n;
    }
    if (a.exp == 0) return std::nullopt;
    if (a.ranked && a.name == "q" && (a.exp == 2 || a.exp == -2)) {
      a.name = "p";
      a.exp = 1;
    }
    return a;
  }

  Expr normalize(const Expr& e) {
    Expr out;
    std::vector<Atom> work(e.rbegin(), e.rend());
    while (!work.empty()) {
      Atom a = work.back();
      work.pop_back();
      if (!out.empty() && out.back().same_key(a)) {
        a.exp += out.back().exp;
        out.pop_back();
      }
      auto c = canon(a);
      if (!c) continue;
      if (!out.empty() && out.back().same_key(*c)) {
        work.push_back(*c);
        continue;
      }
      out.push_back(*c);
    }
    return out;
  }

  WExpr identity_w() const { return {LetterPerm::identity(arity_), std::vector<Expr>(arity_)}; }

  WExpr mul(const WExpr& g, const WExpr& h) const {
    WExpr r{g.perm.then(h.perm), std::vector<Expr>(arity_)};
    for (unsigned i = 0; i < arity_; ++i) {
      r.coord[i] = g.coord[i];
      const auto& b = h.coord[g.perm(static_cast<Letter>(i))];
      r.coord[i].insert(r.coord[i].end(), b.begin(), b.end());
    }
    return r;
  }

  WExpr inv(const WExpr& g) const {
    const auto pi = g.perm.inverse();
    WExpr r{pi, std::vector<Expr>(arity_)};
    for (unsigned i = 0; i < arity_; ++i) r.coord[i] = inverse(g.coord[pi(static_cast<Letter>(i))]);
    return r;
  }

  WExpr lift_unit(const Atom& a) const {
    WExpr w = identity_w();
    Atom unit = a;
    unit.exp = 1;
    if (a.ranked && !a.prefix.empty()) {
      Atom inner = unit;
      inner.prefix.erase(inner.prefix.begin());
      switch (a.prefix.front()) {
        case Op::diag:
          for (auto& c : w.coord) c = {inner};
          break;
        case Op::deri:
          w.coord[arity_ - 2] = {inner};
          w.coord[arity_ - 1] = {inverse(inner)};
          break;
        case Op::proj:
          w.coord[arity_ - 1] = {inner};
          break;
      }
      return w;
    }
    if (a.ranked && a.name == "x") {
      w.perm = LetterPerm::from_cycles(3, {{0, 1, 2}});
      return w;
    }
    if (a.ranked) {
      // p = proj(adad), q = proj(ad), r = proj(a)
      const Atom la = letter("a");
      const Atom ld = letter("d");
      if (a.name == "p") w.coord[1] = {la, ld, la, ld};
      if (a.name == "q") w.coord[1] = {la, ld};
      if (a.name == "r") w.coord[1] = {la};
      return w;
    }
    const auto* def = group_.presentation.find(a.name);
    w.perm = def->root.arity() == arity_ ? def->root : LetterPerm::identity(arity_);
    if (def->kind == GeneratorDef::Kind::tuple) {
      for (unsigned i = 0; i < arity_; ++i) {
        for (const auto& f : def->sections[i]) {
          Atom b = letter(f.name);
          b.exp = static_cast<int>(f.exponent);
          w.coord[i].push_back(b);
        }
      }
    }
    return w;
  }

  WExpr lift(const Atom& a) const {
    const auto unit = lift_unit(a);
    WExpr w = identity_w();
    const WExpr step = a.exp >= 0 ? unit : inv(unit);
    for (int i = 0; i < std::abs(a.exp); ++i) w = mul(w, step);
    return w;
  }

  bool is_inverse_pair(const Atom& x, const Atom& y) {
    if (!x.same_key(y)) return false;
    auto c = canon(Atom{x.ranked, x.name, x.prefix, x.exp + y.exp});
    return !c.has_value();
  }

  std::optional<Expr> reduce_expr(const Expr& e, unsigned depth) {
    Expr cur = normalize(e);
    unsigned rewrites = 0;
    for (std::size_t i = 0; i + 3 < cur.size() && rewrites < 32;) {
      if (is_inverse_pair(cur[i], cur[i + 2]) && is_inverse_pair(cur[i + 1], cur[i + 3]) &&
          (cur[i + 2].ranked || cur[i + 3].ranked)) {
        auto c = reduce_comm(cur[i + 2], cur[i + 3], depth);
        if (!c) return std::nullopt;
        Expr next(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(i));
        next.insert(next.end(), c->begin(), c->end());
        next.insert(next.end(), cur.begin() + static_cast<std::ptrdiff_t>(i + 4), cur.end());
        cur = normalize(next);
        ++rewrites;
        i = 0;
        continue;
      }
      ++i;
    }
    return cur;
  }

  // op applied to a product, factor by factor
  std::optional<Expr> apply(Op op, const Expr& e) {
    Expr out;
    Expr run;
    auto flush = [&]() -> bool {
      if (run.empty()) return true;
      auto m = apply_letters(op, run);
      run.clear();
      if (!m) return false;
      out.insert(out.end(), m->begin(), m->end());
      return true;
    };
    for (const auto& a : e) {
      if (a.ranked) {
        if (!flush()) return std::nullopt;
        Atom b = a;
        b.prefix.insert(b.prefix.begin(), op);
        if (family_ == Family::grigorchuk && op == Op::deri) return std::nullopt;
        out.push_back(b);
      } else {
        run.push_back(a);
      }
    }
    if (!flush()) return std::nullopt;
    return normalize(out);
  }

  // op(w) for a word in catalog letters: a catalog element, a base, or letterwise
  std::optional<Expr> apply_letters(Op op, const Expr& w) {
    const auto target = minimize(apply_op(op, eval(w)));
    if (is_trivial(target)) return Expr{};
    if (auto m = lookup(target)) return m;
    Expr out;
    for (const auto& a : w) {
      Atom unit = a;
      unit.exp = 1;
      auto m = lookup(minimize(apply_op(op, eval_atom(unit))));
      if (!m) return std::nullopt;
      for (int i = 0; i < std::abs(a.exp); ++i) {
        const Expr piece = a.exp > 0 ? *m : inverse(*m);
        out.insert(out.end(), piece.begin(), piece.end());
      }
    }
    return out;
  }

  std::optional<Expr> lookup(const FsAutomorphism& g) {
    if (auto i = ball_.index_of(g)) {
      Expr out;
      for (const auto& [name, e] : ball_.witness(*i).letters) {
        const bool inv_letter = name.size() > 3 && name.compare(name.size() - 3, 3, "^-1") == 0;
        Atom a = letter(inv_letter ? name.substr(0, name.size() - 3) : name);
        a.exp = inv_letter ? -e : e;
        out.push_back(a);
      }
      return normalize(out);
    }
    const std::vector<std::string> bases =
        family_ == Family::gs ? std::vector<std::string>{"x"} : std::vector<std::string>{"p", "q", "r"};
    for (const auto& b : bases) {
      const Atom a{true, b, {}, 1};
      for (int e : {1, -1}) {
        if (equal(g, power(eval_atom(a), e))) return Expr{Atom{true, b, {}, e}};
      }
    }
    return std::nullopt;
  }

  std::optional<Expr> recompose(const std::vector<Expr>& c, unsigned depth) {
    auto same = [&](const Expr& x, const Expr& y) { return equal(eval(x), eval(y)); };
    auto concat = [](Expr x, const Expr& y) {
      x.insert(x.end(), y.begin(), y.end());
      return x;
    };
    const bool all_empty = std::all_of(c.begin(), c.end(), [&](const Expr& x) { return is_trivial(eval(x)); });
    if (all_empty) return Expr{};
    Expr out;
    const bool head_trivial = is_trivial(eval(c[0]));
    bool diag = !head_trivial;
    if (diag) {
      bool all_same = true;
      for (unsigned i = 1; i < arity_; ++i) all_same = all_same && same(c[0], c[i]);
      auto d = apply(Op::diag, c[0]);
      if (!d) return std::nullopt;
      if (all_same) return d;
      out = *d;
    }
    std::vector<Expr> rest(arity_);
    for (unsigned i = 1; i < arity_; ++i) {
      auto r = reduce_expr(diag ? concat(inverse(c[0]), c[i]) : c[i], depth);
      if (!r) return std::nullopt;
      rest[i] = std::move(*r);
    }
    if (arity_ == 2) {
      auto p = apply(Op::proj, rest[1]);
      if (!p) return std::nullopt;
      return normalize(concat(out, *p));
    }
    // (1, A, B) = deri(A) proj(AB)
    const Expr& a = rest[1];
    if (!is_trivial(eval(a))) {
      auto d = apply(Op::deri, a);
      if (!d) return std::nullopt;
      out = concat(out, *d);
    }
    auto ab = reduce_expr(concat(a, rest[2]), depth);
    if (!ab) return std::nullopt;
    auto p = apply(Op::proj, *ab);
    if (!p) return std::nullopt;
    return normalize(concat(out, *p));
  }

  Family family_;
  unsigned arity_;
  ExpandedGroup group_;
  Ball ball_;
  std::map<std::string, FsAutomorphism> cache_;
  std::map<std::string, int> orders_;
};

}  // namespace

SuiteReport rank_drop_check(Family family, unsigned max_rank, unsigned max_prefix) {
  SuiteReport rep;
  rep.suite = "rank-drop/" + family_name(family);
  Reducer red(family);
  const auto ranked_gens = enumerate_ranked(family, max_rank, max_prefix);
  std::vector<std::string> letters;
  for (const auto& n : red.group().names()) {
    if (!(family == Family::gs && n == "x")) letters.push_back(n);
  }
  auto run = [&](const Atom& u, const Atom& v, const std::string& un, const std::string& vn, std::uint64_t bound) {
    IdentityCheck c;
    c.name = "[" + un + "," + vn + "]";
    c.orientation = "n/a";
    try {
      const auto direct = commutator(red.eval_atom(u), red.eval_atom(v));
      auto r = red.reduce_comm(u, v);
      if (!r) {
        c.status = CheckStatus::unreduced;
        c.detail = "no catalogued reduction applies";
      } else if (!equal(red.eval(*r), direct)) {
        c.status = CheckStatus::fail;
        c.detail = "reduction " + red.str(*r) + " differs from the commutator";
      } else {
        const auto rk = red.rank(*r);
        c.detail = "= " + red.str(*r) + ", rank " + std::to_string(rk) + " <= " + std::to_string(bound);
        if (rk <= bound) {
          c.status = CheckStatus::pass;
        } else {
          c.status = CheckStatus::unreduced;
          c.detail = "= " + red.str(*r) + " (exact), rank " + std::to_string(rk) + " exceeds the bound " +
                     std::to_string(bound);
        }
      }
    } catch (const BudgetExceeded& e) {
      c.status = CheckStatus::budget;
      c.detail = e.what();
    }
    rep.checks.push_back(std::move(c));
  };
  for (std::size_t i = 0; i < ranked_gens.size(); ++i) {
    const auto& u = ranked_gens[i];
    for (std::size_t j = i + 1; j < ranked_gens.size(); ++j) {
      const auto& v = ranked_gens[j];
      run(red.atom_of(u), red.atom_of(v), u.str(), v.str(), std::max(u.rank(), v.rank()) - 1);
    }
    for (const auto& s : letters) {
      run(red.atom_of(u), red.letter(s), u.str(), s == "g" ? "γ" : s, u.rank() - 1);
    }
  }
  std::stable_sort(rep.checks.begin(), rep.checks.end(),
                   [](const IdentityCheck& x, const IdentityCheck& y) { return x.name < y.name; });
  return rep;
}

}  // namespace arbor
