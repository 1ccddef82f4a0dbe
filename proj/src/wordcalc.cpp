#include "arbor/wordcalc.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "arbor/error.hpp"

namespace arbor {

std::string GroupWord::str() const {
  if (letters.empty()) return "1";
  std::ostringstream os;
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (i) os << '*';
    os << letters[i].first;
    if (letters[i].second != 1) os << '^' << letters[i].second;
  }
  return os.str();
}

FsAutomorphism evaluate(const GroupWord& w, const ExpandedGroup& group) {
  FsAutomorphism g = FsAutomorphism::identity(group.presentation.arity);
  for (const auto& [name, e] : w.letters) g = compose(g, power(group[name], e));
  return g;
}

std::vector<WeightedGenerator> symmetric_generators(const ExpandedGroup& group) {
  std::vector<WeightedGenerator> out;
  for (std::size_t i = 0; i < group.generators.size(); ++i) {
    const auto& g = group.generators[i];
    const auto& name = group.presentation.generators[i].name;
    if (is_trivial(g)) continue;
    out.push_back({name, g, 1});
    auto inv = minimize(invert(g));
    if (!(inv == g)) out.push_back({name + "^-1", inv, 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ball

Ball::Ball(std::vector<WeightedGenerator> generators, unsigned radius, const BallOptions& opt)
    : generators_(std::move(generators)), radius_(radius) {
  if (generators_.empty()) throw PreconditionFailed("a ball needs at least one generator");
  const unsigned d = generators_[0].element.arity();
  for (auto& g : generators_) {
    if (g.element.arity() != d) throw ArityMismatch("ball generators of different arity");
    if (g.weight == 0) throw PreconditionFailed("generator weights must be positive");
    g.element = minimize(g.element);
  }
  // Dijkstra with integer weights: bucket r holds elements first reached at distance r
  std::vector<std::vector<std::size_t>> buckets(radius + 1);
  std::vector<bool> settled;
  auto add = [&](FsAutomorphism g, unsigned dist, std::int64_t parent, std::size_t gen) {
    auto it = index_.find(g);
    if (it != index_.end()) {
      const std::size_t i = it->second;
      if (!settled[i] && dist < norms_[i]) {
        norms_[i] = dist;
        parent_[i] = {parent, gen};
        buckets[dist].push_back(i);
      }
      return;
    }
    const std::size_t i = elements_.size();
    if (i >= opt.element_budget) {
      throw BudgetExceeded("ball of radius " + std::to_string(radius) + " exceeds " +
                           std::to_string(opt.element_budget) + " elements");
    }
    index_.emplace(g, i);
    elements_.push_back(std::move(g));
    norms_.push_back(dist);
    parent_.emplace_back(parent, gen);
    settled.push_back(false);
    buckets[dist].push_back(i);
  };
  add(FsAutomorphism::identity(d), 0, -1, 0);
  for (unsigned r = 0; r <= radius; ++r) {
    for (std::size_t k = 0; k < buckets[r].size(); ++k) {
      const std::size_t i = buckets[r][k];
      if (settled[i] || norms_[i] != r) continue;
      settled[i] = true;
      for (std::size_t j = 0; j < generators_.size(); ++j) {
        const unsigned nd = r + generators_[j].weight;
        if (nd > radius) continue;
        add(compose(elements_[i], generators_[j].element, opt.mealy), nd, static_cast<std::int64_t>(i), j);
      }
    }
  }
  // renumber by norm so that count_within is a prefix count
  std::vector<std::size_t> order(elements_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms_[a] < norms_[b]; });
  std::vector<std::size_t> where(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) where[order[k]] = k;
  std::vector<FsAutomorphism> elems;
  std::vector<unsigned> norms;
  std::vector<std::pair<std::int64_t, std::size_t>> parents;
  for (std::size_t k : order) {
    elems.push_back(std::move(elements_[k]));
    norms.push_back(norms_[k]);
    auto [p, g] = parent_[k];
    parents.emplace_back(p < 0 ? -1 : static_cast<std::int64_t>(where[static_cast<std::size_t>(p)]), g);
  }
  elements_ = std::move(elems);
  norms_ = std::move(norms);
  parent_ = std::move(parents);
  index_.clear();
  for (std::size_t i = 0; i < elements_.size(); ++i) index_.emplace(elements_[i], i);
}

std::optional<unsigned> Ball::norm(const FsAutomorphism& g) const {
  auto it = index_.find(minimize(g));
  if (it == index_.end()) return std::nullopt;
  return norms_[it->second];
}

std::optional<std::size_t> Ball::index_of(const FsAutomorphism& g) const {
  auto it = index_.find(minimize(g));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

GroupWord Ball::witness(std::size_t index) const {
  GroupWord w;
  for (std::int64_t i = static_cast<std::int64_t>(index); parent_[static_cast<std::size_t>(i)].first >= 0;
       i = parent_[static_cast<std::size_t>(i)].first) {
    const auto& gen = generators_[parent_[static_cast<std::size_t>(i)].second];
    w.letters.emplace_back(gen.name, 1);
  }
  std::reverse(w.letters.begin(), w.letters.end());
  return w;
}

std::size_t Ball::count_within(unsigned r) const {
  return static_cast<std::size_t>(std::upper_bound(norms_.begin(), norms_.end(), r) - norms_.begin());
}

std::optional<unsigned> word_norm_exact(const FsAutomorphism& g, const std::vector<WeightedGenerator>& gens,
                                        unsigned radius, const BallOptions& opt) {
  return Ball(gens, radius, opt).norm(g);
}

// ---------------------------------------------------------------------------
// Nucleus

namespace {

struct FsLess {
  bool operator()(const FsAutomorphism& a, const FsAutomorphism& b) const {
    if (a.num_states() != b.num_states()) return a.num_states() < b.num_states();
    if (a.perm_table() != b.perm_table()) return a.perm_table() < b.perm_table();
    return a.next_table() < b.next_table();
  }
};

// All states of g, as minimized elements, with the section graph between them.
void add_states(const FsAutomorphism& g, std::vector<FsAutomorphism>& elems,
                std::unordered_map<FsAutomorphism, std::size_t, FsHash>& ids,
                std::vector<std::vector<std::size_t>>& edges) {
  const auto m = minimize(g);
  std::vector<std::size_t> local(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) {
    auto e = minimize(m.with_initial(s));
    auto [it, fresh] = ids.try_emplace(e, elems.size());
    if (fresh) {
      elems.push_back(std::move(e));
      edges.emplace_back();
    }
    local[s] = it->second;
  }
  for (StateId s = 0; s < m.num_states(); ++s) {
    auto& out = edges[local[s]];
    if (!out.empty()) continue;
    for (unsigned x = 0; x < m.arity(); ++x) out.push_back(local[m.next(s, static_cast<Letter>(x))]);
  }
}

// Vertices lying on a directed cycle (Tarjan's strongly connected components).
std::vector<bool> on_cycle(const std::vector<std::vector<std::size_t>>& edges) {
  const std::size_t n = edges.size();
  std::vector<std::int64_t> idx(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false), result(n, false);
  std::vector<std::size_t> stack;
  std::int64_t counter = 0;
  struct Frame {
    std::size_t v;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (idx[root] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& f = call.back();
      if (f.next_edge < edges[f.v].size()) {
        const std::size_t w = edges[f.v][f.next_edge++];
        if (idx[w] < 0) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], idx[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == idx[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        bool cyclic = comp.size() > 1;
        if (!cyclic) {
          for (std::size_t t : edges[v]) cyclic = cyclic || t == v;
        }
        if (cyclic) {
          for (std::size_t c : comp) result[c] = true;
        }
      }
    }
  }
  return result;
}

}  // namespace

bool Nucleus::contains(const FsAutomorphism& g) const {
  const auto m = minimize(g);
  return std::find(elements.begin(), elements.end(), m) != elements.end();
}

Nucleus compute_nucleus(const std::vector<FsAutomorphism>& generators, const NucleusOptions& opt) {
  if (generators.empty()) throw PreconditionFailed("nucleus needs generators");
  std::set<FsAutomorphism, FsLess> current;
  auto close_recurrent = [&](const std::vector<FsAutomorphism>& machines) {
    std::vector<FsAutomorphism> elems;
    std::unordered_map<FsAutomorphism, std::size_t, FsHash> ids;
    std::vector<std::vector<std::size_t>> edges;
    for (const auto& g : machines) add_states(g, elems, ids, edges);
    const auto cyc = on_cycle(edges);
    // recurrent states together with everything reachable from them
    std::vector<bool> keep = cyc;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < elems.size(); ++i) {
      if (keep[i]) stack.push_back(i);
    }
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto w : edges[v]) {
        if (!keep[w]) {
          keep[w] = true;
          stack.push_back(w);
        }
      }
    }
    std::size_t added = 0;
    for (std::size_t i = 0; i < elems.size(); ++i) {
      if (keep[i] && current.insert(elems[i]).second) ++added;
    }
    if (current.size() > opt.max_elements) {
      throw BudgetExceeded("not observed contracting: nucleus candidate exceeds " +
                           std::to_string(opt.max_elements) + " elements");
    }
    return added;
  };

  std::vector<FsAutomorphism> start;
  for (const auto& g : generators) {
    start.push_back(minimize(g));
    start.push_back(minimize(invert(g)));
  }
  close_recurrent(start);
  Nucleus result;
  for (unsigned round = 1; round <= opt.max_rounds; ++round) {
    std::vector<FsAutomorphism> products;
    std::vector<FsAutomorphism> cur(current.begin(), current.end());
    products.reserve(cur.size() * cur.size());
    for (const auto& g : cur) {
      for (const auto& h : cur) products.push_back(compose(g, h, opt.mealy));
    }
    result.rounds = round;
    if (close_recurrent(products) == 0) {
      result.elements.assign(current.begin(), current.end());
      return result;
    }
  }
  throw BudgetExceeded("not observed contracting: nucleus did not stabilize within " +
                       std::to_string(opt.max_rounds) + " rounds");
}

Nucleus compute_nucleus(const ExpandedGroup& group, const NucleusOptions& opt) {
  return compute_nucleus(group.generators, opt);
}

unsigned depth(const FsAutomorphism& g, const std::vector<FsAutomorphism>& base, unsigned max_depth) {
  std::vector<FsAutomorphism> targets;
  for (const auto& b : base) targets.push_back(minimize(b));
  const auto m = minimize(g);
  std::vector<bool> in_base(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) {
    const auto e = minimize(m.with_initial(s));
    in_base[s] = std::find(targets.begin(), targets.end(), e) != targets.end();
  }
  std::set<std::vector<StateId>> seen;
  std::vector<StateId> layer{m.initial()};
  for (unsigned n = 0; n <= max_depth; ++n) {
    if (std::all_of(layer.begin(), layer.end(), [&](StateId s) { return in_base[s]; })) return n;
    if (!seen.insert(layer).second) break;
    std::set<StateId> below;
    for (StateId s : layer) {
      for (unsigned x = 0; x < m.arity(); ++x) below.insert(m.next(s, static_cast<Letter>(x)));
    }
    layer.assign(below.begin(), below.end());
  }
  throw PreconditionFailed("sections never all fall into the base set; the element is outside the group "
                           "or the depth budget is too small");
}

// ---------------------------------------------------------------------------
// Contraction

nlohmann::json ContractionReport::to_json() const {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : violations) {
    nlohmann::json item{{"element", x.witness}, {"letter", x.letter}, {"norm", x.norm}};
    item["section_norm"] = x.section_norm ? nlohmann::json(*x.section_norm) : nlohmann::json("outside ball");
    v.push_back(item);
  }
  return {{"radius", radius},
          {"ball_size", ball_size},
          {"violations", v},
          {"max_ratio", max_ratio},
          {"scope", "finite ball only; not a proof for the whole group"}};
}

ContractionReport contraction_check(const Ball& ball) {
  ContractionReport rep;
  rep.radius = ball.radius();
  rep.ball_size = ball.size();
  const auto& elems = ball.elements();
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const unsigned n = ball.norms()[i];
    if (n == 0) continue;
    for (unsigned x = 0; x < elems[i].arity(); ++x) {
      const auto s = section(elems[i], static_cast<Letter>(x));
      const auto sn = ball.norm(s);
      if (sn) rep.max_ratio = std::max(rep.max_ratio, 2.0 * *sn / (n + 1.0));
      if (!sn || 2 * *sn > n + 1) {
        rep.violations.push_back({i, static_cast<Letter>(x), n, sn, ball.witness(i).str()});
      }
    }
  }
  return rep;
}

ContractionReport contraction_check(const std::vector<WeightedGenerator>& gens, unsigned radius,
                                    const BallOptions& opt) {
  return contraction_check(Ball(gens, radius, opt));
}

}  // namespace arbor
