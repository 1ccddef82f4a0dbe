#include <doctest.h>

#include <algorithm>
#include <set>

#include "arbor/catalog.hpp"
#include "arbor/error.hpp"
#include "arbor/permlab.hpp"

using namespace arbor;

namespace {

std::vector<FsAutomorphism> gens_of(const ExpandedGroup& g) { return g.generators; }

const ExpandedGroup& grig() {
  static const ExpandedGroup g = expand(builtin("grigorchuk"));
  return g;
}

// Normalizer by checking every ambient element.
std::uint64_t brute_normalizer_order(const PermSubgroup& ambient, const PermSubgroup& g) {
  std::uint64_t n = 0;
  for (const auto& w : ambient.elements()) {
    bool ok = true;
    for (const auto& x : g.generators()) {
      if (!g.contains(wreath_compose(wreath_compose(w.inverse(), x), w))) {
        ok = false;
        break;
      }
    }
    n += ok;
  }
  return n;
}

}  // namespace

TEST_SUITE("permlab") {
  TEST_CASE("orders of small groups") {
    CHECK(PermSubgroup::trivial(2, 3).order() == 1);
    CHECK(PermSubgroup::full_wreath(2, 4).order() == 32768);
    CHECK(PermSubgroup::full_wreath(3, 2).order() == 1296);
    CHECK(PermSubgroup::cyclic_wreath(3, 2).order() == 81);
    CHECK(PermSubgroup::cyclic_wreath(3, 3).order() == 1594323);
    const auto g4 = PermSubgroup::image(gens_of(grig()), 4);
    CHECK(g4.order() == 4096);
    CHECK(PermSubgroup::image(gens_of(grig()), 3).order() == 128);
    CHECK(group_order(PermSubgroup::image(gens_of(grig()), 5)) == 4194304);
  }

  TEST_CASE("stabilizer chain agrees with the bfs closure") {
    const std::vector<PermSubgroup> groups{
        PermSubgroup::image(gens_of(grig()), 3),
        PermSubgroup::image(gens_of(grig()), 4),
        PermSubgroup::image(gens_of(expand(builtin("gupta_sidki"))), 2),
        PermSubgroup::image(gens_of(expand(builtin("dihedral_pair"))), 4),
        PermSubgroup::image({adding_machine()}, 5),
        PermSubgroup::full_wreath(3, 2),
    };
    for (const auto& g : groups) {
      const auto elems = closure_bfs(g);
      CHECK(elems.size() == g.order());
      auto sorted = elems;
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == g.elements());
      for (std::size_t i = 0; i < elems.size(); i += 7) CHECK(g.contains(elems[i]));
    }
    const auto g4 = PermSubgroup::image(gens_of(grig()), 4);
    std::size_t out4 = 0;
    for (const auto& w : PermSubgroup::full_wreath(2, 4).elements()) out4 += !g4.contains(w);
    CHECK(out4 == 32768 - 4096);
  }

  TEST_CASE("normalizers") {
    const auto g4 = PermSubgroup::image(gens_of(grig()), 4);
    const auto n4 = normalizer_in_wreath(g4);
    CHECK(n4.order() == 8192);
    CHECK(n4.contains(g4));
    CHECK(is_normal(n4, g4));
    const auto w3 = PermSubgroup::full_wreath(2, 3);
    CHECK(normalizer_in_wreath(w3).order() == 128);
    const auto t2 = PermSubgroup::image({adding_machine()}, 2);
    CHECK(t2.order() == 4);
    CHECK(normalizer_in_wreath(t2).order() == 8);
    CHECK(brute_normalizer_order(PermSubgroup::full_wreath(2, 2), t2) == 8);
    const auto d3 = PermSubgroup::image(gens_of(expand(builtin("dihedral_pair"))), 3);
    CHECK(normalizer_in_wreath(d3).order() == brute_normalizer_order(w3, d3));
    const auto gs3 = PermSubgroup::image(gens_of(expand(builtin("gupta_sidki"))), 3);
    CHECK(normalizer_in(PermSubgroup::cyclic_wreath(3, 3), gs3).order() == 6561);
    CHECK_THROWS_AS(normalizer_in_wreath(gs3), BudgetExceeded);
  }

  TEST_CASE("pruned search agrees with filtering") {
    NormalizerOptions tiny;
    tiny.filter_cap = 16;
    for (const auto& g : {PermSubgroup::image(gens_of(grig()), 3),
                          PermSubgroup::image(gens_of(expand(builtin("dihedral_pair"))), 3),
                          PermSubgroup::image({adding_machine()}, 3)}) {
      CHECK(normalizer_in_wreath(g, tiny).same_group(normalizer_in_wreath(g)));
    }
  }

  TEST_CASE("omega") {
    const auto w2 = PermSubgroup::full_wreath(2, 2);
    CHECK(omega(w2, w2).same_group(w2));
    const auto c4 = PermSubgroup::image({adding_machine()}, 2);
    CHECK(omega(c4, PermSubgroup::trivial(2, 2)).order() == 2);
    // omega(W2, Z(W2)) by a direct filter over the 8 elements
    PermSubgroup zc = PermSubgroup::trivial(2, 2);
    for (const auto& x : w2.elements()) {
      bool central = true;
      for (const auto& y : w2.generators()) central = central && wreath_compose(x, y) == wreath_compose(y, x);
      if (central) zc = zc.with(x);
    }
    CHECK(zc.order() == 2);
    std::vector<TruncatedIsometry> direct;
    for (const auto& v : w2.elements()) {
      bool ok = zc.contains(wreath_compose(v, v));
      for (const auto& g : w2.elements()) {
        const auto c = wreath_compose(wreath_compose(g.inverse(), v.inverse()), wreath_compose(g, v));
        ok = ok && zc.contains(c);
      }
      if (ok) direct.push_back(v);
    }
    const auto om = omega(w2, zc);
    CHECK(om.order() == direct.size());
    for (const auto& v : direct) CHECK(om.contains(v));
    const auto half = PermSubgroup(2, 2, {truncate(rigid_perm(LetterPerm::from_cycles(2, {{0, 1}}), 2), 2)});
    CHECK_THROWS_AS(omega(w2, half), PreconditionFailed);
  }

  TEST_CASE("abelianization and series") {
    const auto gs = expand(builtin("gupta_sidki"));
    for (unsigned n = 2; n <= 3; ++n) {
      CHECK(abelian_invariants(PermSubgroup::image(gs.generators, n)) == std::vector<std::uint64_t>{3, 3});
    }
    const auto fg = expand(builtin("fabrykowski_gupta"));
    CHECK(abelian_invariants(PermSubgroup::image(fg.generators, 2)) == std::vector<std::uint64_t>{3, 3});
    const auto c = PermSubgroup::image({adding_machine()}, 4);
    CHECK(abelian_invariants(c) == std::vector<std::uint64_t>{16});
    const auto ds = derived_series(c);
    CHECK(ds.back().order() == 1);
    CHECK(derived_subgroup(c).order() == 1);
    const auto w3 = PermSubgroup::full_wreath(2, 3);
    const auto lcs = lower_central_series(w3);
    CHECK(lcs.front().order() == 128);
    CHECK(lcs.back().order() == 1);
    for (std::size_t i = 1; i < lcs.size(); ++i) CHECK(lcs[i - 1].contains(lcs[i]));
    CHECK(abelian_invariants(PermSubgroup::image(gens_of(grig()), 4)) == std::vector<std::uint64_t>{2, 2, 2});
  }

  TEST_CASE("normal subgroups of the level-5 image") {
    const auto& g = grig();
    const auto g5 = PermSubgroup::image(g.generators, 5);
    const auto b = normal_closure(g5, {truncate(g["b"], 5)});
    const auto k = normal_closure(g5, {truncate(commutator(g["a"], g["b"]), 5)});
    CHECK(subgroup_index(g5, b) == 8);
    CHECK(subgroup_index(g5, k) == 16);
    const auto st4 = level_stabilizer(g5, 4);
    for (const char* s : {"b", "c", "d"}) CHECK(normal_closure(g5, {truncate(g[s], 5)}).contains(st4));
    const auto g4 = PermSubgroup::image(g.generators, 4);
    std::vector<PermSubgroup> closures;
    for (const char* s : {"b", "c", "d"}) closures.push_back(normal_closure(g4, {truncate(g[s], 4)}));
    CHECK_FALSE(closures[0].same_group(closures[1]));
    CHECK_FALSE(closures[0].same_group(closures[2]));
    CHECK_FALSE(closures[1].same_group(closures[2]));
    CHECK_THROWS_AS(subgroup_index(b, g5), PreconditionFailed);
  }

  TEST_CASE("transitivity and rigid stabilizers") {
    const auto g4 = PermSubgroup::image(gens_of(grig()), 4);
    for (unsigned k = 0; k <= 4; ++k) CHECK(is_level_transitive(g4, k));
    CHECK_FALSE(is_level_transitive(PermSubgroup(2, 4, {truncate(grig()["b"], 4)}), 1));
    const auto w3 = PermSubgroup::full_wreath(2, 3);
    CHECK(rist(w3, Vertex::parse("0")).order() == 8);
    CHECK(rist(w3, Vertex::parse("01")).order() == 2);
    CHECK(level_stabilizer(w3, 1).order() == 64);
    CHECK(restrict_to(w3, 2).order() == 8);
    CHECK(intersection(level_stabilizer(w3, 1), rist(w3, Vertex::parse("1"))).order() == 8);
    CHECK(join(rist(w3, Vertex::parse("0")), rist(w3, Vertex::parse("1"))).order() == 64);
  }

  TEST_CASE("normalizer towers") {
    const auto w4 = PermSubgroup::full_wreath(2, 4);
    const auto tw = normalizer_tower(w4, 5);
    CHECK(tw.steps.empty());
    CHECK(tw.stabilized);
    const auto g4 = PermSubgroup::image(gens_of(grig()), 4);
    const auto t4 = normalizer_tower(g4, 1);
    REQUIRE(t4.steps.size() == 1);
    CHECK(t4.steps[0].order == 8192);
    CHECK(t4.steps[0].quotient_order == 2);
    const auto d3 = PermSubgroup::image(gens_of(expand(builtin("dihedral_pair"))), 3);
    const auto td = normalizer_tower(d3, 10);
    CHECK(td.stabilized);
    CHECK(td.steps.back().order == 128);
    for (const auto& s : td.steps) CHECK(s.elementary_abelian);
    const auto j = td.to_json();
    CHECK(j.at("level") == 3);
    CHECK(j.at("stabilized") == true);
    CHECK(j.at("steps").size() == td.steps.size());
  }

  TEST_CASE("subgroup lattice") {
    const auto w2 = PermSubgroup::full_wreath(2, 2);
    const auto subs = all_subgroups(w2);
    // D4 has ten subgroups
    CHECK(subs.size() == 10);
    std::size_t normal = 0;
    for (const auto& s : subs) normal += is_normal(w2, s);
    CHECK(normal == 6);
  }
}
