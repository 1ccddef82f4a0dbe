#include <doctest.h>

#include <fstream>
#include <sstream>

#include "arbor/catalog.hpp"
#include "arbor/error.hpp"
#include "arbor/towerlab.hpp"

using namespace arbor;

namespace {

TruncatedIsometry sigma_at(unsigned level) {
  return TruncatedIsometry::rigid(LetterPerm::from_cycles(2, {{0, 1}}), level);
}

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(ARBOR_SOURCE_DIR) + "/tests/golden/" + name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("towerlab") {
  TEST_CASE("realize") {
    const auto one1 = PermSubgroup::trivial(2, 1);
    CHECK(realize(SplitForm(one1, one1)).order() == 2);
    const auto w1 = PermSubgroup::full_wreath(2, 1);
    CHECK(realize(SplitForm(one1, w1)).order() == 4);
    CHECK(realize(SplitForm(w1, w1)).same_group(PermSubgroup::full_wreath(2, 2)));
    CHECK(realize(SplitForm(one1, w1)).contains(sigma_at(2)));
  }

  TEST_CASE("split form preconditions") {
    const auto w2 = PermSubgroup::full_wreath(2, 2);
    const PermSubgroup half(2, 2, {sigma_at(2)});
    CHECK_THROWS_AS(SplitForm(half, w2), PreconditionFailed);
    CHECK_THROWS_AS(SplitForm(PermSubgroup::trivial(2, 1), w2), ArityMismatch);
    CHECK_THROWS_AS(SplitForm(PermSubgroup::trivial(3, 1), PermSubgroup::full_wreath(3, 1)), ArityMismatch);
  }

  TEST_CASE("normalizer formula examples") {
    const auto one1 = PermSubgroup::trivial(2, 1);
    const auto w1 = PermSubgroup::full_wreath(2, 1);
    const auto full = normalizer_formula(SplitForm(w1, w1));
    CHECK(full.form.u().same_group(w1));
    CHECK(full.form.s().same_group(w1));
    CHECK(realize(full.form).order() == 8);
    const auto f = normalizer_formula(SplitForm(one1, w1));
    CHECK(f.form.u().same_group(w1));
    CHECK(f.form.s().same_group(w1));
    const auto r = realize(SplitForm(one1, w1));
    CHECK(normalizer_in_wreath(r).same_group(realize(f.form)));
    CHECK(f.quotient_order() * r.order() == normalizer_in_wreath(r).order());
  }

  TEST_CASE("normalizer formula against brute force") {
    const auto l2 = normalizer_formula_oracle_check(2, 1000);
    CHECK(l2.exhaustive);
    CHECK(l2.all_agree());
    CHECK(l2.pairs_tested == l2.pairs_total);
    CHECK(l2.quotient_agreements == l2.pairs_tested);
    const auto j = l2.to_json();
    CHECK(j.at("level") == 2);
    // geometrically decomposable special case U = S = K
    for (const auto& k : all_subgroups(PermSubgroup::full_wreath(2, 2))) {
      if (!is_normal(k, k)) continue;
      const SplitForm sf(k, k);
      const auto n = normalizer_formula(sf);
      CHECK(n.form.s().same_group(normalizer_in_wreath(k)));
      CHECK(realize(n.form).same_group(normalizer_in_wreath(realize(sf))));
    }
  }

  TEST_CASE("omega formula") {
    const auto forms = all_split_forms(2);
    CHECK_FALSE(forms.empty());
    for (const auto& f : forms) {
      const auto c = omega_formula_check(f, f);
      CHECK(c.agree);
      CHECK(c.formula_order == realize(f).order());
    }
    const auto l2 = omega_formula_family_check(2);
    CHECK(l2.all_agree());
    CHECK(l2.corrected_agreements == l2.normal_pairs);
    // a non-normal pair: H = <sigma> inside G = W_2
    const auto one1 = PermSubgroup::trivial(2, 1);
    const auto w1 = PermSubgroup::full_wreath(2, 1);
    CHECK_THROWS_AS(omega_formula_check(SplitForm(one1, one1), SplitForm(w1, w1)), PreconditionFailed);
  }

  TEST_CASE("layered towers") {
    const auto w = layered_tower_tables(PermSubgroup::full_wreath(2, 2), 4);
    CHECK(w.stabilized);
    CHECK(w.all_agree());
    for (unsigned level = 2; level <= 4; ++level) {
      const auto dp = expand(builtin("dihedral_pair"));
      const auto l = PermSubgroup::image(dp.generators, level - 1);
      const auto rep = layered_tower_tables(l, 6);
      CAPTURE(level);
      CHECK(rep.all_agree());
      if (rep.s2_equals_s1) CHECK(*rep.s2_equals_s1);
      if (rep.omega_u3_u1_equals_u3_l) CHECK(*rep.omega_u3_u1_equals_u3_l);
    }
    const auto am = layered_tower_tables(PermSubgroup::image({adding_machine()}, 3), 6);
    CHECK(am.all_agree());
    const auto card = layered_tower_tables(PermSubgroup::image(cardioid_generators(3), 3), 4);
    CHECK(card.all_agree());
    CHECK(card.to_json().contains("steps"));
  }

  TEST_CASE("tower ambients") {
    CHECK(tower_ambient(2, 3).order() == 128);
    CHECK(tower_ambient(3, 2).order() == 81);
    CHECK(tower_ambient(4, 1).order() == 24);
    const auto rep = normalizer_tower(PermSubgroup::image(expand(builtin("dihedral_pair")).generators, 3), 10);
    const auto dot = tower_dot(rep);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("128") != std::string::npos);
  }

  TEST_CASE("ranks") {
    using F = Family;
    CHECK(RankedGenerator::parse(F::gs, "x").rank() == 1);
    CHECK(RankedGenerator::parse(F::gs, "∂∆x").rank() == 2);
    CHECK(RankedGenerator::parse(F::gs, "πx").rank() == 3);
    CHECK(RankedGenerator::parse(F::gs, "∆∆∂x").rank() == 10);
    CHECK(RankedGenerator::parse(F::gs, "dDx") == RankedGenerator::parse(F::gs, "∂∆x"));
    CHECK(RankedGenerator::parse(F::grigorchuk, "p").rank() == 1);
    CHECK(RankedGenerator::parse(F::grigorchuk, "q").rank() == 2);
    CHECK(RankedGenerator::parse(F::grigorchuk, "r").rank() == 3);
    CHECK(RankedGenerator::parse(F::grigorchuk, "πq").rank() == 4);
    CHECK(RankedGenerator::parse(F::grigorchuk, "PPp").rank() == 4);
    CHECK(RankedGenerator::parse(F::grigorchuk, "∆πp").str() == "∆πp");
    CHECK_THROWS(RankedGenerator::parse(F::grigorchuk, "∂p"));
    CHECK_THROWS(RankedGenerator::parse(F::gs, "p"));
    CHECK(parse_family("gupta_sidki") == F::gs);
    CHECK_THROWS_AS(parse_family("nope"), UnknownName);
  }

  TEST_CASE("ranked generators as automata") {
    const auto g = expand(builtin("grigorchuk"));
    const auto p = ranked_generator(RankedGenerator::parse(Family::grigorchuk, "p"));
    const auto adad = power(compose(g["a"], g["d"]), 2);
    CHECK(equal(p, proj(adad)));
    CHECK(equal(ranked_generator(RankedGenerator::parse(Family::grigorchuk, "∆πp")), delta(proj(p))));
    const auto gs = expand(builtin("gupta_sidki"));
    CHECK(equal(ranked_generator(RankedGenerator::parse(Family::gs, "∂x")), deri(gs["x"])));
  }

  TEST_CASE("rank tables") {
    const auto gs1 = enumerate_ranked(Family::gs, 1, 2);
    REQUIRE(gs1.size() == 3);
    CHECK(gs1[0].str() == "x");
    CHECK(gs1[1].str() == "∆x");
    const auto g4 = enumerate_ranked(Family::grigorchuk, 4, 4);
    std::vector<std::string> rank4;
    for (const auto& r : g4) {
      if (r.rank() == 4) rank4.push_back(r.str());
    }
    REQUIRE(rank4.size() >= 2);
    CHECK(rank4[0] == "πq");
    CHECK(rank4[1] == "ππp");
    CHECK(rank_table(Family::gs, 10, 4) == read_golden("rank_gs.txt"));
    CHECK(rank_table(Family::grigorchuk, 10, 4) == read_golden("rank_grigorchuk.txt"));
  }

  TEST_CASE("identity suites") {
    const auto gs = identity_suite("gs");
    CHECK(gs.all_pass());
    REQUIRE(gs.find("(∆x)^τ2 = (∆x)^-1"));
    CHECK(gs.find("(∆x)^τ2 = (∆x)^-1")->status == CheckStatus::pass);

    const auto gr = identity_suite("grigorchuk", 2);
    CHECK(gr.count(CheckStatus::fail) == 1);
    REQUIRE(gr.find("[p,a] = (ac)^8"));
    CHECK(gr.find("[p,a] = (ac)^8")->status == CheckStatus::fail);
    CHECK(gr.find("[q,r] = p")->status == CheckStatus::pass);
    CHECK(gr.find("[∆∆πp,a] = 1")->status == CheckStatus::pass);
    CHECK(gr.find("[π∆πp,a] = ∆∆πp")->status == CheckStatus::pass);

    const auto pre = identity_suite("grigorchuk-prenormalizer", 1);
    CHECK(pre.find("[πp,a] = ∆p")->status == CheckStatus::pass);
    CHECK(pre.find("[π∆p,a] = ∆∆p")->status == CheckStatus::pass);
    CHECK(pre.find("[πp,b] = 1")->status == CheckStatus::pass);
    CHECK(pre.find("[π∆p,b] = 1")->status == CheckStatus::fail);

    const auto j = gs.to_json();
    CHECK(j.at("suite") == "gs");
    CHECK(j.at("checks").size() == gs.checks.size());
    CHECK_THROWS_AS(identity_suite("nope"), UnknownName);
  }

  TEST_CASE("rank drop") {
    const auto gs = rank_drop_check(Family::gs, 10, 3);
    CHECK(gs.count(CheckStatus::fail) == 0);
    CHECK(gs.count(CheckStatus::pass) == 272);
    CHECK(gs.checks.size() == 276);
    const auto gr = rank_drop_check(Family::grigorchuk, 2, 2);
    CHECK(gr.count(CheckStatus::fail) == 0);
    CHECK(gr.count(CheckStatus::pass) > 0);
    const auto* pq = gr.find("[p,q]");
    REQUIRE(pq);
    CHECK(pq->status == CheckStatus::pass);
  }

  TEST_CASE("weighted generators") {
    const auto gens = ranked_weighted_generators(Family::grigorchuk, 3, 1);
    bool has_p = false;
    for (const auto& g : gens) {
      if (g.name == "p") {
        has_p = true;
        CHECK(g.weight == 2);
      }
      CHECK(g.weight <= 3);
    }
    CHECK(has_p);
    // p@1 = adad has norm 4 > (2 + 1) / 2
    const auto rep = contraction_check(gens, 2);
    CHECK_FALSE(rep.violations.empty());
  }
}
