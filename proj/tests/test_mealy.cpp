#include <doctest.h>

#include <random>

#include "arbor/catalog.hpp"
#include "arbor/error.hpp"
#include "arbor/mealy.hpp"
#include "arbor/towerlab.hpp"

using namespace arbor;

namespace {

const ExpandedGroup& grig() {
  static const ExpandedGroup g = expand(builtin("grigorchuk"));
  return g;
}

FsAutomorphism random_word(std::mt19937_64& rng, const ExpandedGroup& g, int len) {
  const auto names = g.names();
  auto out = FsAutomorphism::identity(g.presentation.arity);
  std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
  for (int i = 0; i < len; ++i) {
    const auto& x = g[names[pick(rng)]];
    out = compose(out, rng() % 2 ? x : invert(x));
  }
  return out;
}

}  // namespace

TEST_SUITE("mealy") {
  TEST_CASE("identity and rigid permutations") {
    const auto one = FsAutomorphism::identity(2);
    CHECK(is_trivial(one));
    CHECK(minimize(one).num_states() == 1);
    const auto a = grig()["a"];
    CHECK(a.num_states() == 2);
    CHECK(truncate(a, 2).perm() == std::vector<Point>{2, 3, 0, 1});
    CHECK(a == minimize(rigid_perm(LetterPerm::from_cycles(2, {{0, 1}}), 2)));
  }

  TEST_CASE("grigorchuk generators") {
    const auto& g = grig();
    CHECK(g["c"].num_states() == 5);
    for (const char* n : {"a", "b", "c", "d"}) CHECK(is_trivial(power(g[n], 2)));
    CHECK(equal(compose(g["c"], g["d"]), g["b"]));
    CHECK(is_trivial(compose(compose(g["b"], g["c"]), g["d"])));
    CHECK(equal(section(g["b"], 0), g["a"]));
    CHECK(equal(section(g["b"], 1), g["c"]));
    CHECK(is_trivial(section(g["d"], 0)));
    CHECK(order_bounded(compose(g["a"], g["d"]), 100) == 4);
    CHECK(order_bounded(compose(g["a"], g["b"]), 100) == 16);
    CHECK(order_bounded(compose(g["a"], g["c"]), 100) == 8);
  }

  TEST_CASE("section and embed laws") {
    const auto& g = grig();
    const auto v = Vertex::parse("101");
    for (const char* n : {"a", "b", "c"}) {
      const auto e = embed(v, g[n]);
      CHECK(equal(section(e, v), g[n]));
      CHECK(is_trivial(section(e, Vertex::parse("100"))));
      CHECK(is_trivial(section(e, Vertex::parse("0"))));
      const auto moved = std::string(n) == "a" ? Vertex::parse("1011") : Vertex::parse("1010");
      CHECK(act(e, Vertex::parse("1010")) == moved);
    }
    CHECK(equal(proj(g["a"]), embed(Vertex::parse("1"), g["a"])));
    CHECK(equal(section(delta(g["b"]), 0), g["b"]));
    CHECK(equal(section(delta(g["b"]), 1), g["b"]));
    const auto x = rigid_perm(LetterPerm::from_cycles(3, {{0, 1, 2}}), 3);
    const auto dx = deri(x);
    CHECK(is_trivial(section(dx, 0)));
    CHECK(equal(section(dx, 1), x));
    CHECK(equal(section(dx, 2), invert(x)));
    CHECK_THROWS_AS(embed(Vertex::parse("2"), g["a"]), ArityMismatch);
  }

  TEST_CASE("group laws on random words") {
    std::mt19937_64 rng(11);
    const auto& g = grig();
    for (int i = 0; i < 60; ++i) {
      const auto f = random_word(rng, g, 5);
      const auto h = random_word(rng, g, 4);
      const auto k = random_word(rng, g, 3);
      CHECK(equal(compose(compose(f, h), k), compose(f, compose(h, k))));
      CHECK(is_trivial(compose(f, invert(f))));
      CHECK(equal(conjugate(f, h), compose(compose(invert(h), f), h)));
      CHECK(equal(commutator(f, h), compose(compose(invert(f), invert(h)), compose(f, h))));
      CHECK(equal(power(f, -3), invert(power(f, 3))));
      CHECK(truncate(compose(f, h), 5) == wreath_compose(truncate(f, 5), truncate(h, 5)));
      // (fh)@x = f@x h@(x^f)
      for (Letter x = 0; x < 2; ++x) {
        const Letter y = f.root_perm()(x);
        CHECK(equal(section(compose(f, h), x), compose(section(f, x), section(h, y))));
      }
      CHECK(minimize(compose_raw(f, h)) == compose(f, h));
      CHECK(fs_from_json(to_json(f)) == f);
    }
  }

  TEST_CASE("ranked tower generators") {
    const auto p = ranked_generator(RankedGenerator::parse(Family::grigorchuk, "p"));
    const auto q = ranked_generator(RankedGenerator::parse(Family::grigorchuk, "q"));
    const auto r = ranked_generator(RankedGenerator::parse(Family::grigorchuk, "r"));
    CHECK(is_trivial(commutator(p, q)));
    CHECK(is_trivial(commutator(p, r)));
    CHECK(equal(commutator(q, r), p));
    const auto& g = grig();
    const auto ac = compose(g["a"], g["c"]);
    CHECK(equal(commutator(p, g["a"]), power(ac, 4)));
    CHECK(is_trivial(power(ac, 8)));
  }

  TEST_CASE("adding machine") {
    const auto t = adding_machine();
    CHECK(t.num_states() == 2);
    CHECK(order_bounded(t, 1000) == std::nullopt);
    CHECK(equal(section(power(t, 2), 0), t));
    CHECK(equal(section(power(t, 2), 1), t));
    CHECK(act(t, Vertex::parse("111")) == Vertex::parse("000"));
    CHECK(act(t, Vertex::parse("011")) == Vertex::parse("111"));
    for (unsigned n = 1; n <= 8; ++n) {
      const auto tn = truncate(t, n);
      auto v = TruncatedIsometry::identity(2, n);
      for (std::size_t k = 0; k < tn.degree(); ++k) v = wreath_compose(v, tn);
      CHECK(v.is_identity());
    }
  }

  TEST_CASE("portraits and dot output") {
    const auto& g = grig();
    const auto pt = portrait(g["b"], 3);
    CHECK(pt.activity.size() == 7);
    CHECK(pt.at(Vertex::parse("")).is_identity());
    CHECK_FALSE(pt.at(Vertex::parse("0")).is_identity());
    CHECK(pt.at(Vertex::parse("1")).is_identity());
    CHECK_FALSE(pt.at(Vertex::parse("10")).is_identity());
    CHECK(automaton_dot(g["b"]) == automaton_dot(g["b"]));
    CHECK(automaton_dot(g["b"]).find("digraph") != std::string::npos);
    CHECK(portrait_dot(pt).find("digraph") != std::string::npos);
  }

  TEST_CASE("errors") {
    const auto x = rigid_perm(LetterPerm::from_cycles(3, {{0, 1, 2}}), 3);
    CHECK_THROWS_AS(compose(grig()["a"], x), ArityMismatch);
    CHECK_THROWS_AS(order_bounded(x, 0), PreconditionFailed);
    MealyOptions tiny;
    tiny.state_budget = 3;
    CHECK_THROWS_AS(compose(grig()["b"], grig()["c"], tiny), BudgetExceeded);
  }
}
