#include "arbor/mealy.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "arbor/error.hpp"

namespace arbor {

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

struct VecHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const {
    std::size_t h = v.size();
    for (auto x : v) h = mix(h, x);
    return h;
  }
};

void same_arity(const FsAutomorphism& g, const FsAutomorphism& h, const char* what) {
  if (g.arity() != h.arity()) {
    throw ArityMismatch(std::string(what) + ": arities " + std::to_string(g.arity()) + " and " +
                        std::to_string(h.arity()));
  }
}

std::uint64_t pair_key(StateId a, StateId b) { return (std::uint64_t{a} << 32) | b; }

void check_budget(std::size_t n, const MealyOptions& opt, const char* what) {
  if (n > opt.state_budget) {
    throw BudgetExceeded(std::string(what) + ": more than " + std::to_string(opt.state_budget) +
                         " reachable states");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FsAutomorphism

FsAutomorphism::FsAutomorphism() : arity_(2), perm_{0, 1}, next_{0, 0}, initial_(0) {}

FsAutomorphism::FsAutomorphism(unsigned arity, const std::vector<LetterPerm>& perms,
                               const std::vector<std::vector<StateId>>& next, StateId initial)
    : arity_(arity), initial_(initial) {
  if (arity < 2 || arity > kMaxArity) throw PreconditionFailed("arity out of range");
  if (perms.size() != next.size() || perms.empty()) {
    throw PreconditionFailed("automaton needs one permutation and one transition row per state");
  }
  const auto n = perms.size();
  if (initial >= n) throw PreconditionFailed("initial state out of range");
  for (std::size_t s = 0; s < n; ++s) {
    if (perms[s].arity() != arity) throw ArityMismatch("state permutation of wrong arity");
    if (next[s].size() != arity) throw ArityMismatch("transition row of wrong length");
    for (unsigned x = 0; x < arity; ++x) {
      if (next[s][x] >= n) throw PreconditionFailed("transition target out of range");
      perm_.push_back(perms[s](static_cast<Letter>(x)));
      next_.push_back(next[s][x]);
    }
  }
}

FsAutomorphism FsAutomorphism::identity(unsigned arity) {
  if (arity < 2 || arity > kMaxArity) throw PreconditionFailed("arity out of range");
  std::vector<Letter> p(arity);
  std::iota(p.begin(), p.end(), Letter{0});
  return from_tables(arity, std::move(p), std::vector<StateId>(arity, 0), 0);
}

FsAutomorphism FsAutomorphism::from_tables(unsigned arity, std::vector<Letter> perm, std::vector<StateId> next,
                                           StateId initial) {
  FsAutomorphism g;
  g.arity_ = arity;
  g.perm_ = std::move(perm);
  g.next_ = std::move(next);
  g.initial_ = initial;
  return g;
}

FsAutomorphism FsAutomorphism::from_sections(const std::vector<FsAutomorphism>& sections, const LetterPerm& root) {
  const unsigned d = root.arity();
  if (sections.size() != d) throw ArityMismatch("need one section per letter");
  std::vector<Letter> perm;
  std::vector<StateId> next;
  std::vector<StateId> entry(d);
  StateId offset = 0;
  for (unsigned x = 0; x < d; ++x) {
    const auto& s = sections[x];
    if (s.arity() != d) throw ArityMismatch("section of wrong arity");
    entry[x] = offset + s.initial();
    perm.insert(perm.end(), s.perm_.begin(), s.perm_.end());
    for (StateId t : s.next_) next.push_back(t + offset);
    offset += static_cast<StateId>(s.num_states());
  }
  for (unsigned x = 0; x < d; ++x) {
    perm.push_back(root(static_cast<Letter>(x)));
    next.push_back(entry[x]);
  }
  return from_tables(d, std::move(perm), std::move(next), offset);
}

LetterPerm FsAutomorphism::state_perm(StateId s) const {
  auto first = perm_.begin() + static_cast<std::ptrdiff_t>(std::size_t{s} * arity_);
  return LetterPerm(std::vector<Letter>(first, first + arity_));
}

bool FsAutomorphism::state_is_active(StateId s) const {
  for (unsigned x = 0; x < arity_; ++x) {
    if (out(s, static_cast<Letter>(x)) != x) return true;
  }
  return false;
}

FsAutomorphism FsAutomorphism::with_initial(StateId s) const {
  if (s >= num_states()) throw PreconditionFailed("state out of range");
  FsAutomorphism g = *this;
  g.initial_ = s;
  return g;
}

std::size_t FsHash::operator()(const FsAutomorphism& g) const {
  std::size_t h = mix(g.arity(), g.initial());
  for (auto p : g.perm_table()) h = mix(h, p);
  for (auto t : g.next_table()) h = mix(h, t);
  return h;
}

const LetterPerm& Portrait::at(const Vertex& v) const {
  if (v.level() >= depth) throw PreconditionFailed("vertex below the portrait depth");
  const std::uint64_t offset = (ipow(arity, static_cast<unsigned>(v.level())) - 1) / (arity - 1);
  return activity[offset + v.index(arity)];
}

// ---------------------------------------------------------------------------
// Construction

FsAutomorphism rigid_perm(const LetterPerm& p, unsigned arity) {
  if (p.arity() != arity) throw ArityMismatch("rigid permutation of arity " + std::to_string(p.arity()) +
                                              " on an alphabet of size " + std::to_string(arity));
  std::vector<FsAutomorphism> secs(arity, FsAutomorphism::identity(arity));
  return minimize(FsAutomorphism::from_sections(secs, p));
}

FsAutomorphism section(const FsAutomorphism& g, const Vertex& v) {
  if (!v.valid_for(g.arity())) throw ArityMismatch("vertex " + v.str() + " not over the alphabet");
  StateId s = g.initial();
  for (Letter x : v.letters()) s = g.next(s, x);
  return minimize(g.with_initial(s));
}

FsAutomorphism section(const FsAutomorphism& g, Letter x) { return section(g, Vertex({x})); }

FsAutomorphism embed(const Vertex& v, const FsAutomorphism& g) {
  const unsigned d = g.arity();
  if (!v.valid_for(d)) throw ArityMismatch("vertex " + v.str() + " not over the alphabet");
  FsAutomorphism cur = g;
  const auto one = FsAutomorphism::identity(d);
  for (std::size_t i = v.level(); i-- > 0;) {
    std::vector<FsAutomorphism> secs(d, one);
    secs[v[i]] = cur;
    cur = FsAutomorphism::from_sections(secs, LetterPerm::identity(d));
  }
  return minimize(cur);
}

FsAutomorphism delta(const FsAutomorphism& g) {
  std::vector<FsAutomorphism> secs(g.arity(), g);
  return minimize(FsAutomorphism::from_sections(secs, LetterPerm::identity(g.arity())));
}

FsAutomorphism deri(const FsAutomorphism& g) {
  const unsigned d = g.arity();
  std::vector<FsAutomorphism> secs(d, FsAutomorphism::identity(d));
  secs[d - 2] = g;
  secs[d - 1] = invert(g);
  return minimize(FsAutomorphism::from_sections(secs, LetterPerm::identity(d)));
}

FsAutomorphism proj(const FsAutomorphism& g) {
  return embed(Vertex({static_cast<Letter>(g.arity() - 1)}), g);
}

// ---------------------------------------------------------------------------
// Group operations

FsAutomorphism compose_raw(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt) {
  same_arity(g, h, "compose");
  const unsigned d = g.arity();
  std::unordered_map<std::uint64_t, StateId> index;
  std::vector<std::pair<StateId, StateId>> states;
  auto intern = [&](StateId i, StateId j) {
    auto [it, fresh] = index.try_emplace(pair_key(i, j), static_cast<StateId>(states.size()));
    if (fresh) {
      states.emplace_back(i, j);
      check_budget(states.size(), opt, "compose");
    }
    return it->second;
  };
  intern(g.initial(), h.initial());
  std::vector<Letter> perm;
  std::vector<StateId> next;
  for (std::size_t k = 0; k < states.size(); ++k) {
    auto [i, j] = states[k];
    for (unsigned x = 0; x < d; ++x) {
      const Letter y = g.out(i, static_cast<Letter>(x));
      perm.push_back(h.out(j, y));
      next.push_back(intern(g.next(i, static_cast<Letter>(x)), h.next(j, y)));
    }
  }
  return FsAutomorphism::from_tables(d, std::move(perm), std::move(next), 0);
}

FsAutomorphism compose(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt) {
  return minimize(compose_raw(g, h, opt));
}

FsAutomorphism invert(const FsAutomorphism& g) {
  const unsigned d = g.arity();
  const std::size_t n = g.num_states();
  std::vector<Letter> perm(n * d);
  std::vector<StateId> next(n * d);
  for (StateId s = 0; s < n; ++s) {
    for (unsigned x = 0; x < d; ++x) {
      const Letter y = g.out(s, static_cast<Letter>(x));
      perm[std::size_t{s} * d + y] = static_cast<Letter>(x);
      next[std::size_t{s} * d + y] = g.next(s, static_cast<Letter>(x));
    }
  }
  return FsAutomorphism::from_tables(d, std::move(perm), std::move(next), g.initial());
}

FsAutomorphism power(const FsAutomorphism& g, std::int64_t n, const MealyOptions& opt) {
  FsAutomorphism base = n < 0 ? invert(g) : g;
  std::uint64_t e = n < 0 ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
  FsAutomorphism result = FsAutomorphism::identity(g.arity());
  base = minimize(base);
  while (e > 0) {
    if (e & 1) result = compose(result, base, opt);
    e >>= 1;
    if (e > 0) base = compose(base, base, opt);
  }
  return result;
}

FsAutomorphism conjugate(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt) {
  return compose(compose(invert(h), g, opt), h, opt);
}

FsAutomorphism commutator(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt) {
  return compose(compose(invert(g), invert(h), opt), compose(g, h, opt), opt);
}

// ---------------------------------------------------------------------------
// Decisions

bool is_trivial(const FsAutomorphism& g, const MealyOptions& opt) {
  std::vector<bool> seen(g.num_states(), false);
  std::vector<StateId> stack{g.initial()};
  seen[g.initial()] = true;
  std::size_t visited = 0;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    check_budget(++visited, opt, "is_trivial");
    if (g.state_is_active(s)) return false;
    for (unsigned x = 0; x < g.arity(); ++x) {
      StateId t = g.next(s, static_cast<Letter>(x));
      if (!seen[t]) {
        seen[t] = true;
        stack.push_back(t);
      }
    }
  }
  return true;
}

bool equal(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt) {
  same_arity(g, h, "equal");
  std::unordered_map<std::uint64_t, bool> seen;
  std::vector<std::pair<StateId, StateId>> stack{{g.initial(), h.initial()}};
  seen.emplace(pair_key(g.initial(), h.initial()), true);
  while (!stack.empty()) {
    auto [i, j] = stack.back();
    stack.pop_back();
    for (unsigned x = 0; x < g.arity(); ++x) {
      if (g.out(i, static_cast<Letter>(x)) != h.out(j, static_cast<Letter>(x))) return false;
    }
    for (unsigned x = 0; x < g.arity(); ++x) {
      StateId a = g.next(i, static_cast<Letter>(x));
      StateId b = h.next(j, static_cast<Letter>(x));
      if (seen.emplace(pair_key(a, b), true).second) {
        check_budget(seen.size(), opt, "equal");
        stack.emplace_back(a, b);
      }
    }
  }
  return true;
}

FsAutomorphism minimize(const FsAutomorphism& g) {
  const unsigned d = g.arity();
  // reachable states in BFS order
  std::vector<StateId> order;
  std::vector<std::int64_t> local(g.num_states(), -1);
  order.push_back(g.initial());
  local[g.initial()] = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (unsigned x = 0; x < d; ++x) {
      StateId t = g.next(order[k], static_cast<Letter>(x));
      if (local[t] < 0) {
        local[t] = static_cast<std::int64_t>(order.size());
        order.push_back(t);
      }
    }
  }
  const std::size_t n = order.size();

  // Moore refinement: start from the output rows, split by successor classes
  std::vector<std::uint32_t> cls(n);
  std::size_t num_classes = 0;
  {
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> ids;
    std::vector<std::uint32_t> key(d);
    for (std::size_t k = 0; k < n; ++k) {
      for (unsigned x = 0; x < d; ++x) key[x] = g.out(order[k], static_cast<Letter>(x));
      cls[k] = ids.try_emplace(key, static_cast<std::uint32_t>(ids.size())).first->second;
    }
    num_classes = ids.size();
  }
  for (;;) {
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> ids;
    std::vector<std::uint32_t> refined(n);
    std::vector<std::uint32_t> key(d + 1);
    for (std::size_t k = 0; k < n; ++k) {
      key[0] = cls[k];
      for (unsigned x = 0; x < d; ++x) {
        key[x + 1] = cls[static_cast<std::size_t>(local[g.next(order[k], static_cast<Letter>(x))])];
      }
      refined[k] = ids.try_emplace(key, static_cast<std::uint32_t>(ids.size())).first->second;
    }
    cls.swap(refined);
    if (ids.size() == num_classes) break;
    num_classes = ids.size();
  }

  // canonical numbering by BFS over classes from the initial state
  std::vector<std::size_t> rep(num_classes, n);
  for (std::size_t k = n; k-- > 0;) rep[cls[k]] = k;
  std::vector<std::int64_t> canon(num_classes, -1);
  std::vector<std::uint32_t> queue{cls[0]};
  canon[cls[0]] = 0;
  std::vector<Letter> perm;
  std::vector<StateId> next;
  perm.reserve(num_classes * d);
  next.reserve(num_classes * d);
  for (std::size_t k = 0; k < queue.size(); ++k) {
    const StateId s = order[rep[queue[k]]];
    for (unsigned x = 0; x < d; ++x) {
      const auto c = cls[static_cast<std::size_t>(local[g.next(s, static_cast<Letter>(x))])];
      if (canon[c] < 0) {
        canon[c] = static_cast<std::int64_t>(queue.size());
        queue.push_back(c);
      }
      perm.push_back(g.out(s, static_cast<Letter>(x)));
      next.push_back(static_cast<StateId>(canon[c]));
    }
  }
  return FsAutomorphism::from_tables(d, std::move(perm), std::move(next), 0);
}

// ---------------------------------------------------------------------------
// Finite views

namespace {

void fill_truncation(const FsAutomorphism& g, StateId s, unsigned remaining, std::uint64_t in, std::uint64_t out,
                     std::vector<Point>& perm) {
  if (remaining == 0) {
    perm[in] = static_cast<Point>(out);
    return;
  }
  const unsigned d = g.arity();
  for (unsigned x = 0; x < d; ++x) {
    fill_truncation(g, g.next(s, static_cast<Letter>(x)), remaining - 1, in * d + x,
                    out * d + g.out(s, static_cast<Letter>(x)), perm);
  }
}

}  // namespace

TruncatedIsometry truncate(const FsAutomorphism& g, unsigned level) {
  std::vector<Point> perm(ipow(g.arity(), level));
  fill_truncation(g, g.initial(), level, 0, 0, perm);
  return TruncatedIsometry::unchecked(g.arity(), level, std::move(perm));
}

Portrait portrait(const FsAutomorphism& g, unsigned depth) {
  Portrait p;
  p.arity = g.arity();
  p.depth = depth;
  std::vector<StateId> layer{g.initial()};
  for (unsigned k = 0; k < depth; ++k) {
    std::vector<StateId> below;
    below.reserve(layer.size() * g.arity());
    for (StateId s : layer) {
      p.activity.push_back(g.state_perm(s));
      for (unsigned x = 0; x < g.arity(); ++x) below.push_back(g.next(s, static_cast<Letter>(x)));
    }
    layer.swap(below);
  }
  return p;
}

Vertex act(const FsAutomorphism& g, const Vertex& v) {
  if (!v.valid_for(g.arity())) throw ArityMismatch("vertex " + v.str() + " not over the alphabet");
  std::vector<Letter> w;
  w.reserve(v.level());
  StateId s = g.initial();
  for (Letter x : v.letters()) {
    w.push_back(g.out(s, x));
    s = g.next(s, x);
  }
  return Vertex(std::move(w));
}

std::optional<std::uint64_t> order_bounded(const FsAutomorphism& g, std::uint64_t max, const MealyOptions& opt) {
  if (max < 1) throw PreconditionFailed("order bound must be at least 1");
  FsAutomorphism base = minimize(g);
  FsAutomorphism p = base;
  for (std::uint64_t k = 1; k <= max; ++k) {
    if (is_trivial(p, opt)) return k;
    if (k < max) p = compose(p, base, opt);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const FsAutomorphism& g) {
  const auto m = minimize(g);
  nlohmann::json states = nlohmann::json::array();
  for (StateId s = 0; s < m.num_states(); ++s) {
    std::vector<unsigned> perm;
    std::vector<StateId> next;
    for (unsigned x = 0; x < m.arity(); ++x) {
      perm.push_back(m.out(s, static_cast<Letter>(x)));
      next.push_back(m.next(s, static_cast<Letter>(x)));
    }
    states.push_back({{"perm", perm}, {"next", next}});
  }
  return {{"arity", m.arity()}, {"initial", m.initial()}, {"states", states}};
}

FsAutomorphism fs_from_json(const nlohmann::json& j) {
  const auto d = j.at("arity").get<unsigned>();
  std::vector<LetterPerm> perms;
  std::vector<std::vector<StateId>> next;
  for (const auto& s : j.at("states")) {
    auto im = s.at("perm").get<std::vector<unsigned>>();
    std::vector<Letter> letters(im.begin(), im.end());
    if (im.size() != d) throw ArityMismatch("state permutation of wrong arity");
    perms.emplace_back(std::move(letters));
    next.push_back(s.at("next").get<std::vector<StateId>>());
  }
  return FsAutomorphism(d, perms, next, j.at("initial").get<StateId>());
}

std::string automaton_dot(const FsAutomorphism& g, const std::string& name) {
  const auto m = minimize(g);
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (StateId s = 0; s < m.num_states(); ++s) {
    os << "  s" << s << " [label=\"s" << s << "\\n" << m.state_perm(s).cycle_string() << "\""
       << (s == m.initial() ? ", shape=doublecircle" : "") << "];\n";
  }
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (unsigned x = 0; x < m.arity(); ++x) {
      os << "  s" << s << " -> s" << m.next(s, static_cast<Letter>(x)) << " [label=\"" << x << "|"
         << unsigned{m.out(s, static_cast<Letter>(x))} << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string portrait_dot(const Portrait& p, const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n  node [shape=box];\n";
  std::size_t idx = 0;
  for (unsigned k = 0; k < p.depth; ++k) {
    const std::uint64_t width = ipow(p.arity, k);
    for (std::uint64_t i = 0; i < width; ++i, ++idx) {
      const auto v = Vertex::from_index(i, k, p.arity);
      const std::string id = "v" + (k == 0 ? std::string("_") : v.str());
      os << "  " << id << " [label=\"" << (k == 0 ? std::string("root") : v.str()) << "\\n"
         << p.activity[idx].cycle_string() << "\"];\n";
      if (k > 0) {
        Vertex parent(std::vector<Letter>(v.letters().begin(), v.letters().end() - 1));
        os << "  v" << (k == 1 ? std::string("_") : parent.str()) << " -> " << id << ";\n";
      }
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace arbor
