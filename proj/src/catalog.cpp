#include "arbor/catalog.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "arbor/error.hpp"

namespace arbor {

// ---------------------------------------------------------------------------
// Presentations

const GeneratorDef* GroupPresentation::find(const std::string& gen) const {
  for (const auto& g : generators) {
    if (g.name == gen) return &g;
  }
  return nullptr;
}

const FsAutomorphism& ExpandedGroup::operator[](const std::string& gen) const {
  for (std::size_t i = 0; i < presentation.generators.size(); ++i) {
    if (presentation.generators[i].name == gen) return generators[i];
  }
  throw UnknownName("group " + presentation.name + " has no generator '" + gen + "'");
}

std::vector<std::string> ExpandedGroup::names() const {
  std::vector<std::string> out;
  for (const auto& g : presentation.generators) out.push_back(g.name);
  return out;
}

void validate(const GroupPresentation& p) {
  if (p.arity < 2 || p.arity > kMaxArity) throw PreconditionFailed("arity out of range in group " + p.name);
  for (std::size_t i = 0; i < p.generators.size(); ++i) {
    const auto& g = p.generators[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (p.generators[j].name == g.name) throw PreconditionFailed("generator '" + g.name + "' defined twice");
    }
    if (g.kind != GeneratorDef::Kind::identity && g.root.arity() != p.arity) {
      throw ArityMismatch("generator '" + g.name + "': permutation arity differs from " + std::to_string(p.arity));
    }
    if (g.kind == GeneratorDef::Kind::tuple) {
      if (g.sections.size() != p.arity) {
        throw ArityMismatch("generator '" + g.name + "' has " + std::to_string(g.sections.size()) +
                            " sections on an alphabet of size " + std::to_string(p.arity));
      }
      for (const auto& w : g.sections) {
        for (const auto& f : w) {
          if (!p.find(f.name)) throw UnknownName("generator '" + g.name + "' refers to unknown '" + f.name + "'");
        }
      }
    }
  }
}

namespace {

// letters of a free word: generator index and sign
using FreeLetter = std::pair<std::uint32_t, int>;
using FreeWord = std::vector<FreeLetter>;

struct FreeWordHash {
  std::size_t operator()(const FreeWord& w) const {
    std::size_t h = w.size();
    for (auto [g, e] : w) h = h * 1000003u + g * 2u + (e > 0 ? 1u : 0u);
    return h;
  }
};

void push_reduced(FreeWord& w, FreeLetter l) {
  if (!w.empty() && w.back().first == l.first && w.back().second == -l.second) {
    w.pop_back();
  } else {
    w.push_back(l);
  }
}

FreeWord inverse_word(const FreeWord& w) {
  FreeWord out;
  for (auto it = w.rbegin(); it != w.rend(); ++it) push_reduced(out, {it->first, -it->second});
  return out;
}

}  // namespace

ExpandedGroup expand(const GroupPresentation& p, std::size_t word_budget) {
  validate(p);
  const unsigned d = p.arity;
  const std::size_t ngen = p.generators.size();
  std::map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < ngen; ++i) index[p.generators[i].name] = static_cast<std::uint32_t>(i);

  std::vector<LetterPerm> perm(ngen, LetterPerm::identity(d));
  std::vector<std::vector<FreeWord>> secs(ngen, std::vector<FreeWord>(d));
  for (std::size_t i = 0; i < ngen; ++i) {
    const auto& g = p.generators[i];
    if (g.kind != GeneratorDef::Kind::identity) perm[i] = g.root;
    if (g.kind != GeneratorDef::Kind::tuple) continue;
    for (unsigned x = 0; x < d; ++x) {
      FreeWord w;
      for (const auto& f : g.sections[x]) {
        const std::uint32_t gi = index.at(f.name);
        const int sign = f.exponent < 0 ? -1 : 1;
        for (std::int64_t k = 0; k < (f.exponent < 0 ? -f.exponent : f.exponent); ++k) push_reduced(w, {gi, sign});
      }
      secs[i][x] = std::move(w);
    }
  }

  // perm and section of a single letter
  auto letter_out = [&](FreeLetter l, Letter x) -> Letter {
    return l.second > 0 ? perm[l.first](x) : perm[l.first].inverse()(x);
  };
  auto letter_section = [&](FreeLetter l, Letter x) -> FreeWord {
    if (l.second > 0) return secs[l.first][x];
    return inverse_word(secs[l.first][perm[l.first].inverse()(x)]);
  };

  std::unordered_map<FreeWord, StateId, FreeWordHash> ids;
  std::vector<FreeWord> words;
  auto intern = [&](const FreeWord& w) {
    auto [it, fresh] = ids.try_emplace(w, static_cast<StateId>(words.size()));
    if (fresh) {
      words.push_back(w);
      if (words.size() > word_budget) {
        throw BudgetExceeded("recursion of group " + p.name + " did not close within " +
                             std::to_string(word_budget) + " section words");
      }
    }
    return it->second;
  };
  std::vector<StateId> roots;
  for (std::uint32_t i = 0; i < ngen; ++i) roots.push_back(intern({{i, 1}}));

  std::vector<Letter> table_perm;
  std::vector<StateId> table_next;
  for (std::size_t k = 0; k < words.size(); ++k) {
    const FreeWord w = words[k];
    for (unsigned x0 = 0; x0 < d; ++x0) {
      auto x = static_cast<Letter>(x0);
      FreeWord s;
      for (auto l : w) {
        for (auto part : letter_section(l, x)) push_reduced(s, part);
        x = letter_out(l, x);
      }
      table_perm.push_back(x);
      table_next.push_back(intern(s));
    }
  }
  auto machine = FsAutomorphism::from_tables(d, std::move(table_perm), std::move(table_next), 0);
  ExpandedGroup out{p, {}};
  for (auto r : roots) out.generators.push_back(minimize(machine.with_initial(r)));
  return out;
}

namespace {

Word parse_word(const std::string& text) {
  Word w;
  if (text == "1") return w;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto star = text.find('*', pos);
    if (star == std::string::npos) star = text.size();
    std::string part = text.substr(pos, star - pos);
    auto caret = part.find('^');
    WordFactor f;
    f.name = part.substr(0, caret);
    if (caret != std::string::npos) f.exponent = std::stoll(part.substr(caret + 1));
    w.push_back(f);
    pos = star + 1;
  }
  return w;
}

GeneratorDef rigid_def(std::string name, unsigned d, std::vector<std::vector<unsigned>> cycles) {
  return {std::move(name), GeneratorDef::Kind::rigid, LetterPerm::from_cycles(d, cycles), {}};
}

GeneratorDef tuple_def(std::string name, unsigned d, const std::vector<std::string>& words,
                       std::vector<std::vector<unsigned>> cycles = {}) {
  GeneratorDef g{std::move(name), GeneratorDef::Kind::tuple, LetterPerm::from_cycles(d, cycles), {}};
  for (const auto& w : words) g.sections.push_back(parse_word(w));
  return g;
}

GroupPresentation finitary(unsigned depth) {
  if (depth < 1 || depth > 8) throw PreconditionFailed("finitary depth must lie in [1, 8]");
  GroupPresentation p{"finitary" + std::to_string(depth), 2, {}};
  p.generators.push_back(rigid_def("s", 2, {{0, 1}}));
  for (unsigned k = 1; k < depth; ++k) {
    for (std::uint64_t i = 0; i < ipow(2, k); ++i) {
      const auto v = Vertex::from_index(i, k, 2);
      const std::string tail = v.str().substr(1);
      std::vector<std::string> words{"1", "1"};
      words[v[0]] = "s" + tail;
      p.generators.push_back(tuple_def("s" + v.str(), 2, words));
    }
  }
  return p;
}

}  // namespace

GroupPresentation builtin(const std::string& name) {
  if (name == "grigorchuk") {
    return {name, 2,
            {rigid_def("a", 2, {{0, 1}}), tuple_def("b", 2, {"a", "c"}), tuple_def("c", 2, {"a", "d"}),
             tuple_def("d", 2, {"1", "b"})}};
  }
  if (name == "gupta_sidki") {
    return {name, 3, {rigid_def("x", 3, {{0, 1, 2}}), tuple_def("g", 3, {"g", "x", "x^-1"})}};
  }
  if (name == "fabrykowski_gupta") {
    return {name, 3, {rigid_def("x", 3, {{0, 1, 2}}), tuple_def("g", 3, {"g", "x", "1"})}};
  }
  if (name == "bg") {
    return {name, 3, {rigid_def("x", 3, {{0, 1, 2}}), tuple_def("g", 3, {"g", "x", "x"})}};
  }
  if (name == "adding_machine") {
    return {name, 2, {tuple_def("t", 2, {"1", "t"}, {{0, 1}})}};
  }
  if (name == "dihedral_pair") {
    return {name, 2, {tuple_def("t", 2, {"1", "t"}, {{0, 1}}), tuple_def("delta", 2, {"delta", "delta"}, {{0, 1}})}};
  }
  if (name == "gs_klein") {
    return {name, 3,
            {tuple_def("tau1", 3, {"tau1", "tau1", "tau1"}, {{1, 2}}), tuple_def("tau2", 3, {"tau3", "tau3", "tau3"}),
             tuple_def("tau3", 3, {"tau2", "tau2", "tau2"}, {{1, 2}})}};
  }
  if (name == "bg_klein") {
    return {name, 3,
            {tuple_def("tau1", 3, {"tau1", "tau1", "tau1"}, {{1, 2}}), tuple_def("tau2", 3, {"tau1", "tau1", "tau1"}),
             rigid_def("tau3", 3, {{1, 2}})}};
  }
  const std::string prefix = "finitary(";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size() + 1 && name.back() == ')') {
    const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - 1);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return finitary(static_cast<unsigned>(std::stoul(digits)));
    }
  }
  throw UnknownName("no catalog group named '" + name + "'");
}

std::vector<std::string> builtin_names() {
  return {"grigorchuk", "gupta_sidki", "fabrykowski_gupta", "bg",        "adding_machine",
          "dihedral_pair", "gs_klein", "bg_klein",          "finitary(2)"};
}

// ---------------------------------------------------------------------------
// Dyadic scalars

namespace {

std::uint64_t mask(unsigned precision) {
  return precision >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << precision) - 1;
}

unsigned combined(unsigned a, unsigned b) { return std::min(a, b); }

}  // namespace

DyadicScalar DyadicScalar::exact(std::int64_t value) {
  DyadicScalar s;
  s.exact_ = value;
  s.residue_ = static_cast<std::uint64_t>(value) & mask(kMaxPrecision);
  s.precision_ = kExact;
  return s;
}

DyadicScalar DyadicScalar::truncated(std::int64_t value, unsigned precision) {
  if (precision < 1 || precision > kMaxPrecision) {
    throw PreconditionFailed("dyadic precision must lie in [1, " + std::to_string(kMaxPrecision) + "]");
  }
  DyadicScalar s;
  s.residue_ = static_cast<std::uint64_t>(value) & mask(precision);
  s.precision_ = precision;
  return s;
}

std::int64_t DyadicScalar::value() const {
  if (!is_exact()) throw PrecisionExhausted("dyadic scalar is only known modulo 2^" + std::to_string(precision_));
  return exact_;
}

std::uint64_t DyadicScalar::residue() const { return residue_; }

DyadicScalar DyadicScalar::operator+(const DyadicScalar& o) const {
  if (is_exact() && o.is_exact()) return exact(exact_ + o.exact_);
  const unsigned p = combined(precision_, o.precision_);
  return truncated(static_cast<std::int64_t>((residue_ + o.residue_) & mask(p)), p);
}

DyadicScalar DyadicScalar::operator-() const {
  if (is_exact()) return exact(-exact_);
  return truncated(static_cast<std::int64_t>((~residue_ + 1) & mask(precision_)), precision_);
}

DyadicScalar DyadicScalar::operator-(const DyadicScalar& o) const { return *this + (-o); }

DyadicScalar DyadicScalar::operator*(const DyadicScalar& o) const {
  if (is_exact() && o.is_exact()) return exact(exact_ * o.exact_);
  const unsigned p = combined(precision_, o.precision_);
  return truncated(static_cast<std::int64_t>((residue_ * o.residue_) & mask(p)), p);
}

DyadicScalar DyadicScalar::halve() const {
  if (is_unit()) throw PreconditionFailed("cannot halve an odd dyadic scalar");
  if (is_exact()) return exact(exact_ / 2);
  if (precision_ == 1) throw PrecisionExhausted("halving exhausts the last bit of precision");
  return truncated(static_cast<std::int64_t>(residue_ >> 1), precision_ - 1);
}

// ---------------------------------------------------------------------------
// Dyadic isometries

TruncatedIsometry DyadicIsometry::truncate(unsigned level) const {
  if (!is_exact() && level > valid_depth) {
    throw PrecisionExhausted("element is only determined to depth " + std::to_string(valid_depth) +
                             ", requested " + std::to_string(level));
  }
  return arbor::truncate(automaton, level);
}

const FsAutomorphism& DyadicIsometry::exact() const {
  if (!is_exact()) throw PrecisionExhausted("element is only determined to depth " + std::to_string(valid_depth));
  return automaton;
}

namespace {

// Generic builder: states keyed by K, rule(key) -> (swap, key at 0, key at 1).
template <class Key, class Rule>
FsAutomorphism build_binary(const Key& start, Rule rule, std::size_t budget = 1'000'000) {
  std::map<Key, StateId> ids;
  std::vector<Key> keys;
  auto intern = [&](const Key& k) {
    auto [it, fresh] = ids.try_emplace(k, static_cast<StateId>(keys.size()));
    if (fresh) {
      keys.push_back(k);
      if (keys.size() > budget) throw BudgetExceeded("dyadic automaton exceeds the state budget");
    }
    return it->second;
  };
  intern(start);
  std::vector<Letter> perm;
  std::vector<StateId> next;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Key k = keys[i];
    auto [swap, k0, k1] = rule(k);
    perm.push_back(swap ? 1 : 0);
    perm.push_back(swap ? 0 : 1);
    StateId n0 = intern(k0);
    StateId n1 = intern(k1);
    next.push_back(n0);
    next.push_back(n1);
  }
  return minimize(FsAutomorphism::from_tables(2, std::move(perm), std::move(next), 0));
}

}  // namespace

FsAutomorphism adding_machine() { return tau_power(DyadicScalar::exact(1)).automaton; }

DyadicIsometry tau_power(const DyadicScalar& x) {
  if (x.is_exact()) {
    auto rule = [](std::int64_t y) {
      if (y % 2 == 0) return std::tuple{false, y / 2, y / 2};
      return std::tuple{true, (y - 1) / 2, (y + 1) / 2};
    };
    return {build_binary(x.value(), rule), DyadicScalar::kExact};
  }
  // key: (y mod 2^k, k); k = 0 is an undetermined placeholder acting trivially
  using Key = std::pair<std::uint64_t, unsigned>;
  auto rule = [](Key key) {
    auto [y, k] = key;
    if (k == 0) return std::tuple{false, key, key};
    const auto m = mask(k - 1);
    if (y % 2 == 0) return std::tuple{false, Key{(y >> 1) & m, k - 1}, Key{(y >> 1) & m, k - 1}};
    return std::tuple{true, Key{(y >> 1) & m, k - 1}, Key{((y >> 1) + 1) & m, k - 1}};
  };
  return {build_binary(Key{x.residue(), x.precision()}, rule), x.precision()};
}

DyadicIsometry unitary(const DyadicScalar& x) {
  if (!x.is_unit()) throw PreconditionFailed("u_x needs a 2-adic unit, got an even scalar");
  if (x.is_exact()) {
    const std::int64_t h = (x.value() - 1) / 2;
    // state u_x tau^y
    auto rule = [h](std::int64_t y) {
      return std::tuple{(y & 1) != 0, y >> 1, h + ((y + 1) >> 1)};
    };
    return {build_binary(std::int64_t{0}, rule), DyadicScalar::kExact};
  }
  const std::uint64_t h = x.residue() >> 1;
  using Key = std::pair<std::uint64_t, unsigned>;
  auto rule = [h](Key key) {
    auto [y, k] = key;
    if (k == 0) return std::tuple{false, key, key};
    const auto m = mask(k - 1);
    return std::tuple{(y & 1) != 0, Key{(y >> 1) & m, k - 1}, Key{(h + ((y + 1) >> 1)) & m, k - 1}};
  };
  return {build_binary(Key{0, x.precision()}, rule), x.precision()};
}

std::vector<FsAutomorphism> cardioid_generators(unsigned depth) {
  std::vector<FsAutomorphism> out{adding_machine()};
  const auto sigma = rigid_perm(LetterPerm::from_cycles(2, {{0, 1}}), 2);
  for (unsigned n = 0; n <= depth; ++n) out.push_back(embed(Vertex(std::vector<Letter>(n, 0)), sigma));
  return out;
}

}  // namespace arbor
