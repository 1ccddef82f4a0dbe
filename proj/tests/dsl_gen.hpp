#pragma once

// Random well-formed DSL documents for round-trip tests.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "arbor/dsl.hpp"

namespace testgen {

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline arbor::LetterPerm random_perm(std::mt19937_64& rng, unsigned arity, bool allow_identity) {
  std::vector<arbor::Letter> img(arity);
  for (unsigned i = 0; i < arity; ++i) img[i] = static_cast<arbor::Letter>(i);
  do {
    std::shuffle(img.begin(), img.end(), rng);
  } while (!allow_identity && arbor::LetterPerm(img).is_identity());
  return arbor::LetterPerm(img);
}

inline arbor::Word random_word(std::mt19937_64& rng, const std::vector<std::string>& names) {
  arbor::Word w;
  const std::size_t len = pick(rng, 3);
  static const std::int64_t exps[] = {1, 1, -1, 2, -3};
  for (std::size_t i = 0; i < len; ++i) w.push_back({names[pick(rng, names.size())], exps[pick(rng, 5)]});
  return w;
}

inline arbor::GroupPresentation random_group(std::mt19937_64& rng, const std::string& name, const std::string& tag) {
  arbor::GroupPresentation g;
  g.name = name;
  g.arity = 2 + static_cast<unsigned>(pick(rng, 3));
  const std::size_t count = 1 + pick(rng, 4);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)) + tag);
  for (const auto& n : names) {
    arbor::GeneratorDef def;
    def.name = n;
    switch (pick(rng, 4)) {
      case 0:
        def.kind = arbor::GeneratorDef::Kind::rigid;
        def.root = random_perm(rng, g.arity, false);
        break;
      case 1:
        def.kind = arbor::GeneratorDef::Kind::identity;
        break;
      default:
        def.kind = arbor::GeneratorDef::Kind::tuple;
        def.root = random_perm(rng, g.arity, true);
        for (unsigned x = 0; x < g.arity; ++x) def.sections.push_back(random_word(rng, names));
    }
    g.generators.push_back(def);
  }
  return g;
}

struct Scope {
  unsigned arity;
  std::vector<std::string> names;
};

inline arbor::Expr random_expr(std::mt19937_64& rng, const Scope& scope, int depth) {
  using arbor::Expr;
  const std::size_t choice = depth <= 0 ? pick(rng, 2) : pick(rng, 11);
  switch (choice) {
    case 0:
      return Expr::ref(scope.names[pick(rng, scope.names.size())]);
    case 1:
      return pick(rng, 4) == 0 ? Expr::identity() : Expr::ref(scope.names[pick(rng, scope.names.size())]);
    case 2: {
      std::vector<Expr> f;
      const std::size_t n = 2 + pick(rng, 3);
      for (std::size_t i = 0; i < n; ++i) f.push_back(random_expr(rng, scope, depth - 1));
      return Expr::product(std::move(f));
    }
    case 3: {
      static const std::int64_t exps[] = {-3, -1, 0, 1, 2, 5, 12};
      return Expr::pow(random_expr(rng, scope, depth - 1), exps[pick(rng, 7)]);
    }
    case 4:
      return Expr::conj(random_expr(rng, scope, depth - 1), Expr::ref(scope.names[pick(rng, scope.names.size())]));
    case 5:
      return Expr::conj(random_expr(rng, scope, depth - 1), random_expr(rng, scope, depth - 1));
    case 6:
      return Expr::comm(random_expr(rng, scope, depth - 1), random_expr(rng, scope, depth - 1));
    case 7:
      return Expr::unary(Expr::Kind::delta, random_expr(rng, scope, depth - 1));
    case 8:
      return Expr::unary(Expr::Kind::deri, random_expr(rng, scope, depth - 1));
    case 9:
      return Expr::unary(Expr::Kind::proj, random_expr(rng, scope, depth - 1));
    default: {
      std::vector<arbor::Letter> v(pick(rng, 4));
      for (auto& x : v) x = static_cast<arbor::Letter>(pick(rng, scope.arity));
      return Expr::embed(arbor::Vertex(v), random_expr(rng, scope, depth - 1));
    }
  }
}

/// One to three groups with distinct generator names, then elements that each
/// stay within one group's names (qualified or not) and earlier elements of
/// the same arity.
inline arbor::DslDocument random_document(std::mt19937_64& rng) {
  arbor::DslDocument doc;
  const std::size_t groups = 1 + pick(rng, 3);
  for (std::size_t i = 0; i < groups; ++i) {
    doc.groups.push_back(random_group(rng, "G" + std::to_string(i), std::to_string(i)));
  }
  std::vector<std::pair<std::string, unsigned>> elems;
  const std::size_t count = pick(rng, 5);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& g = doc.groups[pick(rng, doc.groups.size())];
    Scope scope{g.arity, {}};
    for (const auto& def : g.generators) {
      scope.names.push_back(pick(rng, 3) == 0 ? g.name + "." + def.name : def.name);
    }
    for (const auto& [n, a] : elems) {
      if (a == g.arity) scope.names.push_back(n);
    }
    const std::string name = "e" + std::to_string(i);
    doc.elems.push_back({name, random_expr(rng, scope, static_cast<int>(pick(rng, 4)))});
    elems.emplace_back(name, g.arity);
  }
  return doc;
}

}  // namespace testgen
