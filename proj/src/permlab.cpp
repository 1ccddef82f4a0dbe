#include "arbor/permlab.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "arbor/error.hpp"

namespace arbor {

namespace {

Perm identity_perm(std::size_t n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), Point{0});
  return p;
}

bool is_identity(const Perm& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != i) return false;
  }
  return true;
}

// first a, then b
Perm mul(const Perm& a, const Perm& b) {
  Perm r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = b[a[i]];
  return r;
}

Perm inv(const Perm& a) {
  Perm r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[a[i]] = static_cast<Point>(i);
  return r;
}

Perm pow(const Perm& a, std::uint64_t e) {
  Perm result = identity_perm(a.size());
  Perm base = a;
  while (e) {
    if (e & 1) result = mul(result, base);
    e >>= 1;
    if (e) base = mul(base, base);
  }
  return result;
}

Perm comm(const Perm& a, const Perm& b) { return mul(mul(inv(a), inv(b)), mul(a, b)); }

Perm conj(const Perm& a, const Perm& b) { return mul(mul(inv(b), a), b); }

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) throw BudgetExceeded("group order does not fit in 64 bits");
  return a * b;
}

std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

TruncatedIsometry wrap(unsigned arity, unsigned level, Perm p) {
  return TruncatedIsometry::unchecked(arity, level, std::move(p));
}

}  // namespace

// ---------------------------------------------------------------------------
// StabChain

StabChain::StabChain(std::size_t degree, std::vector<Point> base_prefix)
    : degree_(degree), prefix_(std::move(base_prefix)) {
  for (Point b : prefix_) {
    if (b >= degree_) throw PreconditionFailed("base point out of range");
    Level lv;
    lv.beta = b;
    lv.where.assign(degree_, -1);
    lv.orbit.push_back(b);
    lv.where[b] = 0;
    lv.transversal.push_back(identity_perm(degree_));
    lv.checked.push_back(0);
    levels_.push_back(std::move(lv));
    base_.push_back(b);
  }
}

std::pair<Perm, std::size_t> StabChain::sift(Perm h, std::size_t start) const {
  for (std::size_t i = start; i < levels_.size(); ++i) {
    const auto& lv = levels_[i];
    const auto w = lv.where[h[lv.beta]];
    if (w < 0) return {std::move(h), i};
    h = mul(h, inv(lv.transversal[static_cast<std::size_t>(w)]));
  }
  return {std::move(h), levels_.size()};
}

void StabChain::extend_orbit(Level& lv) {
  for (std::size_t i = 0; i < lv.orbit.size(); ++i) {
    for (const auto& s : lv.gens) {
      const Point img = s[lv.orbit[i]];
      if (lv.where[img] < 0) {
        lv.where[img] = static_cast<std::int64_t>(lv.orbit.size());
        lv.orbit.push_back(img);
        lv.transversal.push_back(mul(lv.transversal[i], s));
        lv.checked.push_back(0);
      }
    }
  }
}

void StabChain::place(const Perm& residue, std::size_t level) {
  if (level == levels_.size()) {
    Level lv;
    lv.beta = 0;
    while (residue[lv.beta] == lv.beta) ++lv.beta;
    lv.where.assign(degree_, -1);
    lv.orbit.push_back(lv.beta);
    lv.where[lv.beta] = 0;
    lv.transversal.push_back(identity_perm(degree_));
    lv.checked.push_back(0);
    base_.push_back(lv.beta);
    levels_.push_back(std::move(lv));
  }
  levels_[level].own.push_back(residue);
  for (std::size_t i = 0; i <= level; ++i) {
    levels_[i].gens.push_back(residue);
    extend_orbit(levels_[i]);
  }
}

bool StabChain::schreier_pass() {
  for (std::size_t i = levels_.size(); i-- > 0;) {
    auto& lv = levels_[i];
    for (std::size_t p = 0; p < lv.orbit.size(); ++p) {
      while (lv.checked[p] < lv.gens.size()) {
        const auto& s = lv.gens[lv.checked[p]++];
        const Point img = s[lv.orbit[p]];
        Perm sg = mul(mul(lv.transversal[p], s), inv(lv.transversal[static_cast<std::size_t>(lv.where[img])]));
        auto [h, j] = sift(std::move(sg), i + 1);
        if (!is_identity(h)) {
          place(h, j);
          return true;
        }
      }
    }
  }
  return false;
}

void StabChain::insert(const Perm& g) {
  if (g.size() != degree_) throw ArityMismatch("permutation of wrong degree");
  auto [h, j] = sift(g, 0);
  if (is_identity(h)) return;
  place(h, j);
  while (schreier_pass()) {
  }
}

bool StabChain::contains(const Perm& g) const {
  if (g.size() != degree_) return false;
  auto [h, j] = sift(g, 0);
  return is_identity(h);
}

std::uint64_t StabChain::order() const {
  std::uint64_t n = 1;
  for (const auto& lv : levels_) n = checked_mul(n, lv.orbit.size());
  return n;
}

std::vector<Perm> StabChain::stabilizer_generators(std::size_t k) const {
  if (k >= levels_.size()) return {};
  return levels_[k].gens;
}

void StabChain::for_each(const std::function<bool(const Perm&)>& f) const {
  bool go_on = true;
  std::function<void(std::size_t, const Perm&)> rec = [&](std::size_t i, const Perm& acc) {
    if (!go_on) return;
    if (i == 0) {
      go_on = f(acc);
      return;
    }
    for (const auto& t : levels_[i - 1].transversal) {
      rec(i - 1, mul(acc, t));
      if (!go_on) return;
    }
  };
  rec(levels_.size(), identity_perm(degree_));
}

// ---------------------------------------------------------------------------
// PermSubgroup

PermSubgroup::PermSubgroup(unsigned arity, unsigned level, std::vector<TruncatedIsometry> generators)
    : arity_(arity), level_(level), cache_(std::make_shared<Cache>()) {
  if (arity < 2 || arity > kMaxArity) throw PreconditionFailed("arity out of range");
  for (auto& g : generators) {
    check_shape(g);
    if (!g.is_identity()) gens_.push_back(std::move(g));
  }
}

void PermSubgroup::check_shape(const TruncatedIsometry& g) const {
  if (g.arity() != arity_ || g.level() != level_) {
    throw ArityMismatch("element at arity " + std::to_string(g.arity()) + ", level " + std::to_string(g.level()) +
                        " in a subgroup at arity " + std::to_string(arity_) + ", level " + std::to_string(level_));
  }
}

PermSubgroup PermSubgroup::trivial(unsigned arity, unsigned level) { return PermSubgroup(arity, level); }

namespace {

std::vector<TruncatedIsometry> spine_generators(unsigned arity, unsigned level, const std::vector<LetterPerm>& top) {
  std::vector<TruncatedIsometry> gens;
  for (unsigned k = 0; k < level; ++k) {
    for (const auto& p : top) {
      gens.push_back(truncate(embed(Vertex(std::vector<Letter>(k, 0)), rigid_perm(p, arity)), level));
    }
  }
  return gens;
}

}  // namespace

PermSubgroup PermSubgroup::full_wreath(unsigned arity, unsigned level) {
  std::vector<unsigned> cycle(arity);
  std::iota(cycle.begin(), cycle.end(), 0u);
  std::vector<LetterPerm> top{LetterPerm::from_cycles(arity, {cycle})};
  if (arity > 2) top.push_back(LetterPerm::from_cycles(arity, {{0, 1}}));
  return PermSubgroup(arity, level, spine_generators(arity, level, top));
}

PermSubgroup PermSubgroup::cyclic_wreath(unsigned arity, unsigned level) {
  std::vector<unsigned> cycle(arity);
  std::iota(cycle.begin(), cycle.end(), 0u);
  return PermSubgroup(arity, level, spine_generators(arity, level, {LetterPerm::from_cycles(arity, {cycle})}));
}

PermSubgroup PermSubgroup::image(const std::vector<FsAutomorphism>& gens, unsigned level) {
  if (gens.empty()) throw PreconditionFailed("image needs at least one generator");
  std::vector<TruncatedIsometry> t;
  for (const auto& g : gens) t.push_back(truncate(g, level));
  return PermSubgroup(gens[0].arity(), level, std::move(t));
}

const StabChain& PermSubgroup::chain() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->chain) {
    auto c = std::make_unique<StabChain>(degree());
    for (const auto& g : gens_) c->insert(g.perm());
    cache_->chain = std::move(c);
  }
  return *cache_->chain;
}

std::uint64_t PermSubgroup::order() const { return chain().order(); }

bool PermSubgroup::contains(const TruncatedIsometry& g) const {
  check_shape(g);
  return chain().contains(g.perm());
}

bool PermSubgroup::contains(const PermSubgroup& h) const {
  if (h.arity_ != arity_ || h.level_ != level_) throw ArityMismatch("subgroups of different ambient");
  return std::all_of(h.gens_.begin(), h.gens_.end(), [&](const TruncatedIsometry& g) { return contains(g); });
}

std::vector<TruncatedIsometry> PermSubgroup::elements(std::uint64_t budget) const {
  const auto n = order();
  if (n > budget) {
    throw BudgetExceeded("group of order " + std::to_string(n) + " exceeds the enumeration budget of " +
                         std::to_string(budget));
  }
  std::vector<TruncatedIsometry> out;
  out.reserve(n);
  chain().for_each([&](const Perm& p) {
    out.push_back(wrap(arity_, level_, p));
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

PermSubgroup PermSubgroup::with(const TruncatedIsometry& g) const {
  auto gens = gens_;
  gens.push_back(g);
  return PermSubgroup(arity_, level_, std::move(gens));
}

bool PermSubgroup::same_group(const PermSubgroup& other) const {
  return arity_ == other.arity_ && level_ == other.level_ && order() == other.order() && contains(other);
}

// ---------------------------------------------------------------------------
// Elementary computations

std::vector<TruncatedIsometry> closure_bfs(const PermSubgroup& g, std::uint64_t budget) {
  std::set<Perm> seen;
  std::vector<Perm> queue{identity_perm(g.degree())};
  seen.insert(queue[0]);
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (const auto& s : g.generators()) {
      Perm n = mul(queue[i], s.perm());
      if (seen.insert(n).second) {
        if (seen.size() > budget) throw BudgetExceeded("closure exceeds " + std::to_string(budget) + " elements");
        queue.push_back(std::move(n));
      }
    }
  }
  std::vector<TruncatedIsometry> out;
  for (const auto& p : seen) out.push_back(wrap(g.arity(), g.level(), p));
  return out;
}

std::uint64_t group_order(const PermSubgroup& g) { return g.order(); }

PermSubgroup subgroup_from_elements(unsigned arity, unsigned level, const std::vector<TruncatedIsometry>& elements) {
  StabChain c(ipow(arity, level));
  std::vector<TruncatedIsometry> gens;
  for (const auto& e : elements) {
    if (!c.contains(e.perm())) {
      c.insert(e.perm());
      gens.push_back(e);
    }
  }
  return PermSubgroup(arity, level, std::move(gens));
}

PermSubgroup normal_closure(const PermSubgroup& g, const std::vector<TruncatedIsometry>& h) {
  StabChain c(g.degree());
  std::vector<Perm> gens;
  auto add = [&](const Perm& p) {
    if (!c.contains(p)) {
      c.insert(p);
      gens.push_back(p);
    }
  };
  for (const auto& x : h) add(x.perm());
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (const auto& s : g.generators()) add(conj(gens[i], s.perm()));
  }
  std::vector<TruncatedIsometry> out;
  for (auto& p : gens) out.push_back(wrap(g.arity(), g.level(), std::move(p)));
  return PermSubgroup(g.arity(), g.level(), std::move(out));
}

bool is_normal(const PermSubgroup& g, const PermSubgroup& n) {
  if (!g.contains(n)) return false;
  for (const auto& x : n.generators()) {
    for (const auto& s : g.generators()) {
      if (!n.chain().contains(conj(x.perm(), s.perm()))) return false;
    }
  }
  return true;
}

namespace {

std::vector<TruncatedIsometry> generator_commutators(const PermSubgroup& a, const PermSubgroup& b) {
  std::vector<TruncatedIsometry> out;
  for (const auto& x : a.generators()) {
    for (const auto& y : b.generators()) out.push_back(wrap(a.arity(), a.level(), comm(x.perm(), y.perm())));
  }
  return out;
}

}  // namespace

PermSubgroup join(const PermSubgroup& a, const PermSubgroup& b) {
  auto gens = a.generators();
  gens.insert(gens.end(), b.generators().begin(), b.generators().end());
  return PermSubgroup(a.arity(), a.level(), std::move(gens));
}

PermSubgroup commutator_subgroup(const PermSubgroup& a, const PermSubgroup& b) {
  return normal_closure(join(a, b), generator_commutators(a, b));
}

PermSubgroup derived_subgroup(const PermSubgroup& g) { return normal_closure(g, generator_commutators(g, g)); }

std::vector<PermSubgroup> derived_series(const PermSubgroup& g) {
  std::vector<PermSubgroup> out{g};
  for (;;) {
    auto d = derived_subgroup(out.back());
    if (d.order() == out.back().order()) break;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<PermSubgroup> lower_central_series(const PermSubgroup& g) {
  std::vector<PermSubgroup> out{g};
  for (;;) {
    auto next = normal_closure(g, generator_commutators(out.back(), g));
    if (next.order() == out.back().order()) break;
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<std::uint64_t> quotient_abelian_invariants(const PermSubgroup& g, const PermSubgroup& n) {
  if (!is_normal(g, n)) throw PreconditionFailed("quotient by a subgroup that is not normal");
  for (const auto& c : generator_commutators(g, g)) {
    if (!n.contains(c)) throw PreconditionFailed("quotient is not abelian");
  }
  const std::uint64_t m = g.order() / n.order();
  std::vector<std::uint64_t> out;
  for (auto [p, e] : factorize(m)) {
    const std::uint64_t q = m / ipow(p, e);
    // s[k] = |A_p^(p^k)|, read off from <N, g_i^(q p^k)>
    std::vector<std::uint64_t> s;
    std::uint64_t pk = 1;
    for (;;) {
      auto sub = n;
      for (const auto& x : g.generators()) sub = sub.with(wrap(g.arity(), g.level(), pow(x.perm(), q * pk)));
      s.push_back(sub.order() / n.order());
      if (s.back() == 1) break;
      pk *= p;
    }
    // r[k] = number of cyclic factors of order > p^k
    std::vector<unsigned> r;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      unsigned c = 0;
      for (std::uint64_t t = s[k] / s[k + 1]; t > 1; t /= p) ++c;
      r.push_back(c);
    }
    r.push_back(0);
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
      for (unsigned i = 0; i < r[k] - r[k + 1]; ++i) out.push_back(ipow(p, static_cast<unsigned>(k + 1)));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> abelian_invariants(const PermSubgroup& g) {
  return quotient_abelian_invariants(g, derived_subgroup(g));
}

PermSubgroup omega(const PermSubgroup& g, const PermSubgroup& k) {
  if (!is_normal(g, k)) throw PreconditionFailed("omega(G, K) needs K normal in G");
  StabChain result(g.degree());
  std::vector<TruncatedIsometry> gens;
  for (const auto& x : k.generators()) {
    if (!result.contains(x.perm())) {
      result.insert(x.perm());
      gens.push_back(x);
    }
  }
  const auto& kc = k.chain();
  g.chain().for_each([&](const Perm& v) {
    if (result.contains(v)) return true;
    if (!kc.contains(mul(v, v))) return true;
    for (const auto& s : g.generators()) {
      if (!kc.contains(comm(s.perm(), v))) return true;
    }
    result.insert(v);
    gens.push_back(wrap(g.arity(), g.level(), v));
    return true;
  });
  return PermSubgroup(g.arity(), g.level(), std::move(gens));
}

// ---------------------------------------------------------------------------
// Normalizers

namespace {

bool normalizes(const Perm& w, const PermSubgroup& g) {
  const auto& c = g.chain();
  for (const auto& s : g.generators()) {
    if (!c.contains(conj(s.perm(), w))) return false;
  }
  return true;
}

// lift a level-(n-1) element with trivial activity on the last level
Perm lift_plain(const Perm& m, unsigned arity) {
  Perm p(m.size() * arity);
  for (std::size_t v = 0; v < m.size(); ++v) {
    for (unsigned x = 0; x < arity; ++x) p[v * arity + x] = static_cast<Point>(m[v] * arity + x);
  }
  return p;
}

}  // namespace

PermSubgroup normalizer_in(const PermSubgroup& ambient, const PermSubgroup& g, const NormalizerOptions& opt) {
  if (ambient.arity() != g.arity() || ambient.level() != g.level()) throw ArityMismatch("normalizer: shapes differ");
  StabChain result(g.degree());
  std::vector<TruncatedIsometry> gens;
  auto keep = [&](const Perm& w) {
    if (result.contains(w) || !normalizes(w, g)) return;
    result.insert(w);
    gens.push_back(wrap(g.arity(), g.level(), w));
  };
  const auto n = ambient.order();
  if (n <= opt.filter_cap) {
    ambient.chain().for_each([&](const Perm& w) {
      keep(w);
      return true;
    });
  } else {
    if (g.level() == 0) return g;
    // Pruned search over the wreath recursion: a normalizing element restricts
    // to one normalizing the level-(n-1) image, and the liftable restrictions
    // form a subgroup, so each coset of the lifts found so far is decided once.
    const unsigned up = g.level() - 1;
    const auto upper = normalizer_in(restrict_to(ambient, up), restrict_to(g, up), opt);
    const auto kernel = level_stabilizer(ambient, up);
    if (kernel.order() > opt.candidate_budget) {
      throw BudgetExceeded("normalizer search: level kernel of order " + std::to_string(kernel.order()) +
                           " exceeds the candidate budget " + std::to_string(opt.candidate_budget));
    }
    std::vector<Perm> kernel_elems;
    kernel.chain().for_each([&](const Perm& k) {
      kernel_elems.push_back(k);
      return true;
    });
    std::uint64_t tested = 0;
    auto spend = [&](std::uint64_t n) {
      tested += n;
      if (tested > opt.candidate_budget) {
        throw BudgetExceeded("normalizer search exceeds the candidate budget " + std::to_string(opt.candidate_budget));
      }
    };
    spend(kernel_elems.size());
    for (const auto& k : kernel_elems) keep(k);
    StabChain lifted(upper.degree());
    std::vector<Perm> dead;
    const auto& ac = ambient.chain();
    upper.chain().for_each([&](const Perm& m) {
      if (lifted.contains(m)) return true;
      for (const auto& f : dead) {
        if (lifted.contains(mul(inv(f), m))) return true;
      }
      const Perm l = lift_plain(m, g.arity());
      if (!ac.contains(l)) {
        throw PreconditionFailed("ambient is not closed under plain lifts; normalizer search unsupported");
      }
      spend(kernel_elems.size());
      for (const auto& k : kernel_elems) {
        const Perm w = mul(l, k);
        if (normalizes(w, g)) {
          keep(w);
          lifted.insert(m);
          return true;
        }
      }
      dead.push_back(m);
      return true;
    });
  }
  auto out = PermSubgroup(g.arity(), g.level(), std::move(gens));
  for (const auto& x : g.generators()) {
    if (ambient.contains(x) && !out.contains(x)) throw std::logic_error("normalizer lost an element of the group");
  }
  for (const auto& w : out.generators()) {
    if (!normalizes(w.perm(), g)) throw std::logic_error("normalizer generator does not normalize");
  }
  return out;
}

PermSubgroup normalizer_in_wreath(const PermSubgroup& g, const NormalizerOptions& opt) {
  return normalizer_in(PermSubgroup::full_wreath(g.arity(), g.level()), g, opt);
}

nlohmann::json TowerReport::to_json() const {
  nlohmann::json s = nlohmann::json::array();
  for (const auto& st : steps) {
    s.push_back({{"order", st.order}, {"quotient_order", st.quotient_order}, {"elementary_abelian", st.elementary_abelian}});
  }
  return {{"level", level}, {"steps", s}, {"stabilized", stabilized}};
}

TowerReport normalizer_tower(const PermSubgroup& g, const PermSubgroup& ambient, unsigned max_steps,
                             const NormalizerOptions& opt) {
  TowerReport rep;
  rep.level = g.level();
  rep.terms.push_back(g);
  for (unsigned i = 0; i <= max_steps; ++i) {
    const auto& cur = rep.terms.back();
    auto next = normalizer_in(ambient, cur, opt);
    if (next.order() == cur.order()) {
      rep.stabilized = true;
      break;
    }
    if (i == max_steps) break;
    rep.steps.push_back({next.order(), next.order() / cur.order(), is_elementary_abelian_quotient(next, cur)});
    rep.terms.push_back(std::move(next));
  }
  return rep;
}

TowerReport normalizer_tower(const PermSubgroup& g, unsigned max_steps, const NormalizerOptions& opt) {
  return normalizer_tower(g, PermSubgroup::full_wreath(g.arity(), g.level()), max_steps, opt);
}

// ---------------------------------------------------------------------------
// Subgroup structure

std::uint64_t subgroup_index(const PermSubgroup& g, const PermSubgroup& h) {
  if (!g.contains(h)) throw PreconditionFailed("index of a subgroup that is not contained in the group");
  return g.order() / h.order();
}

PermSubgroup intersection(const PermSubgroup& a, const PermSubgroup& b, std::uint64_t budget) {
  const bool a_small = a.order() <= b.order();
  const auto& small = a_small ? a : b;
  const auto& big = a_small ? b : a;
  if (big.contains(small)) return small;
  if (small.order() > budget) throw BudgetExceeded("intersection: enumeration exceeds budget");
  StabChain result(a.degree());
  std::vector<TruncatedIsometry> gens;
  const auto& bc = big.chain();
  small.chain().for_each([&](const Perm& p) {
    if (!result.contains(p) && bc.contains(p)) {
      result.insert(p);
      gens.push_back(wrap(a.arity(), a.level(), p));
    }
    return true;
  });
  return PermSubgroup(a.arity(), a.level(), std::move(gens));
}

PermSubgroup restrict_to(const PermSubgroup& g, unsigned k) {
  std::vector<TruncatedIsometry> gens;
  for (const auto& x : g.generators()) gens.push_back(x.restrict_to(k));
  return PermSubgroup(g.arity(), k, std::move(gens));
}

PermSubgroup level_stabilizer(const PermSubgroup& g, unsigned k) {
  if (k > g.level()) throw PreconditionFailed("level stabilizer below the truncation level");
  if (k == 0) return g;
  const std::size_t top = ipow(g.arity(), k);
  const std::size_t n = g.degree();
  std::vector<Point> prefix(top);
  std::iota(prefix.begin(), prefix.end(), Point{0});
  StabChain c(top + n, prefix);
  for (const auto& x : g.generators()) {
    const auto r = x.restrict_to(k);
    Perm ext(top + n);
    for (std::size_t i = 0; i < top; ++i) ext[i] = r(static_cast<Point>(i));
    for (std::size_t i = 0; i < n; ++i) ext[top + i] = static_cast<Point>(top + x(static_cast<Point>(i)));
    c.insert(ext);
  }
  std::vector<TruncatedIsometry> gens;
  for (const auto& s : c.stabilizer_generators(top)) {
    Perm p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<Point>(s[top + i] - top);
    gens.push_back(wrap(g.arity(), g.level(), std::move(p)));
  }
  return PermSubgroup(g.arity(), g.level(), std::move(gens));
}

PermSubgroup rist(const PermSubgroup& g, const Vertex& v) {
  if (v.level() > g.level() || !v.valid_for(g.arity())) throw PreconditionFailed("vertex outside the truncated tree");
  const std::size_t block = ipow(g.arity(), g.level() - static_cast<unsigned>(v.level()));
  const std::size_t first = v.index(g.arity()) * block;
  std::vector<Point> outside;
  for (std::size_t i = 0; i < g.degree(); ++i) {
    if (i < first || i >= first + block) outside.push_back(static_cast<Point>(i));
  }
  const std::size_t depth = outside.size();
  StabChain c(g.degree(), std::move(outside));
  for (const auto& x : g.generators()) c.insert(x.perm());
  std::vector<TruncatedIsometry> gens;
  for (const auto& s : c.stabilizer_generators(depth)) gens.push_back(wrap(g.arity(), g.level(), s));
  return PermSubgroup(g.arity(), g.level(), std::move(gens));
}

bool is_level_transitive(const PermSubgroup& g, unsigned k) {
  if (k > g.level()) throw PreconditionFailed("transitivity level below the truncation level");
  const auto r = restrict_to(g, k);
  const std::size_t n = r.degree();
  std::vector<bool> seen(n, false);
  std::vector<Point> queue{0};
  seen[0] = true;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (const auto& s : r.generators()) {
      const Point y = s(queue[i]);
      if (!seen[y]) {
        seen[y] = true;
        queue.push_back(y);
      }
    }
  }
  return queue.size() == n;
}

bool is_elementary_abelian_quotient(const PermSubgroup& g, const PermSubgroup& n) {
  const std::uint64_t m = g.order() / n.order();
  if (m == 1) return true;
  const auto f = factorize(m);
  if (f.size() != 1) return false;
  const std::uint64_t p = f[0].first;
  const auto& nc = n.chain();
  for (const auto& x : g.generators()) {
    if (!nc.contains(pow(x.perm(), p))) return false;
    for (const auto& y : g.generators()) {
      if (!nc.contains(comm(x.perm(), y.perm()))) return false;
    }
  }
  return true;
}

std::vector<PermSubgroup> all_subgroups(const PermSubgroup& g, std::uint64_t budget) {
  const auto elems = g.elements(budget);
  using Key = std::vector<TruncatedIsometry>;
  std::map<Key, PermSubgroup> found;
  auto key_of = [&](const PermSubgroup& h) { return h.elements(budget); };
  std::vector<PermSubgroup> frontier;
  for (const auto& e : elems) {
    PermSubgroup c(g.arity(), g.level(), {e});
    auto k = key_of(c);
    if (found.emplace(k, c).second) frontier.push_back(c);
  }
  std::vector<PermSubgroup> cyclic = frontier;
  while (!frontier.empty()) {
    std::vector<PermSubgroup> next;
    for (const auto& h : frontier) {
      for (const auto& c : cyclic) {
        if (h.contains(c)) continue;
        auto j = join(h, c);
        auto k = key_of(j);
        if (found.emplace(k, j).second) next.push_back(j);
      }
    }
    frontier = std::move(next);
  }
  std::vector<std::pair<std::uint64_t, Key>> order;
  for (const auto& [k, h] : found) order.emplace_back(k.size(), k);
  std::sort(order.begin(), order.end());
  std::vector<PermSubgroup> out;
  for (const auto& [n, k] : order) out.push_back(found.at(k));
  return out;
}

}  // namespace arbor
