#pragma once

// Subgroups of the level-n iterated wreath product, as permutation groups on
// the d^n level-n vertices.  Orders and membership come from a deterministic
// Schreier-Sims stabilizer chain; a plain BFS closure is kept as a second backend.

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <json.hpp>

#include "arbor/mealy.hpp"
#include "arbor/tree.hpp"

namespace arbor {

using Perm = std::vector<Point>;

/// Stabilizer chain with base = an optional prescribed prefix, then the
/// smallest moved point at each new level.
class StabChain {
 public:
  explicit StabChain(std::size_t degree, std::vector<Point> base_prefix = {});

  /// Adds g to the generating set and restores the Schreier-Sims property.
  void insert(const Perm& g);
  bool contains(const Perm& g) const;

  std::size_t degree() const { return degree_; }
  std::size_t depth() const { return levels_.size(); }
  const std::vector<Point>& base() const { return base_; }
  /// Throws BudgetExceeded if the order does not fit in 64 bits.
  std::uint64_t order() const;
  std::size_t orbit_size(std::size_t level) const { return levels_[level].orbit.size(); }
  /// Generators of the pointwise stabilizer of base[0..k).
  std::vector<Perm> stabilizer_generators(std::size_t k) const;
  /// Calls f on every element; stops early when f returns false.
  void for_each(const std::function<bool(const Perm&)>& f) const;

 private:
  struct Level {
    Point beta;
    std::vector<Perm> own;             // strong generators first placed at this level
    std::vector<Perm> gens;            // own generators of this and all deeper levels
    std::vector<Point> orbit;
    std::vector<std::int64_t> where;   // point -> index in orbit, or -1
    std::vector<Perm> transversal;     // transversal[i] maps beta to orbit[i]
    std::vector<std::size_t> checked;  // Schreier generators tested per orbit point
  };

  std::pair<Perm, std::size_t> sift(Perm h, std::size_t start) const;
  void place(const Perm& residue, std::size_t level);
  void extend_orbit(Level& lv);
  bool schreier_pass();

  std::size_t degree_;
  std::vector<Point> base_;
  std::vector<Point> prefix_;
  std::vector<Level> levels_;
};

class PermSubgroup {
 public:
  PermSubgroup(unsigned arity, unsigned level, std::vector<TruncatedIsometry> generators = {});

  static PermSubgroup trivial(unsigned arity, unsigned level);
  static PermSubgroup full_wreath(unsigned arity, unsigned level);
  /// Activities restricted to the cyclic group generated by (0 1 ... d-1).
  static PermSubgroup cyclic_wreath(unsigned arity, unsigned level);
  /// Level-n image of the group generated by `gens`.
  static PermSubgroup image(const std::vector<FsAutomorphism>& gens, unsigned level);

  unsigned arity() const { return arity_; }
  unsigned level() const { return level_; }
  std::size_t degree() const { return static_cast<std::size_t>(ipow(arity_, level_)); }
  const std::vector<TruncatedIsometry>& generators() const { return gens_; }

  std::uint64_t order() const;
  bool contains(const TruncatedIsometry& g) const;
  bool contains(const PermSubgroup& h) const;
  /// All elements, sorted; throws BudgetExceeded above `budget`.
  std::vector<TruncatedIsometry> elements(std::uint64_t budget = std::uint64_t{1} << 22) const;
  const StabChain& chain() const;

  PermSubgroup with(const TruncatedIsometry& g) const;
  /// Same group (same ambient shape, mutual containment).
  bool same_group(const PermSubgroup& other) const;

 private:
  struct Cache {
    std::mutex mu;
    std::unique_ptr<StabChain> chain;
  };

  void check_shape(const TruncatedIsometry& g) const;

  unsigned arity_;
  unsigned level_;
  std::vector<TruncatedIsometry> gens_;
  std::shared_ptr<Cache> cache_;
};

/// Element list of the generated group by breadth-first closure.
std::vector<TruncatedIsometry> closure_bfs(const PermSubgroup& g, std::uint64_t budget = 1'000'000);

std::uint64_t group_order(const PermSubgroup& g);

/// Adds elements greedily until they generate the same group as `elements`.
PermSubgroup subgroup_from_elements(unsigned arity, unsigned level, const std::vector<TruncatedIsometry>& elements);

/// The normal closure of `h` (given by generators) in g.
PermSubgroup normal_closure(const PermSubgroup& g, const std::vector<TruncatedIsometry>& h);
bool is_normal(const PermSubgroup& g, const PermSubgroup& n);
PermSubgroup derived_subgroup(const PermSubgroup& g);
std::vector<PermSubgroup> derived_series(const PermSubgroup& g);
/// gamma_1 = G, gamma_{i+1} = [gamma_i, G], until it stabilizes.
std::vector<PermSubgroup> lower_central_series(const PermSubgroup& g);
PermSubgroup commutator_subgroup(const PermSubgroup& a, const PermSubgroup& b);

/// Cyclic factor orders (prime powers, ascending) of the abelian group g/n.
std::vector<std::uint64_t> quotient_abelian_invariants(const PermSubgroup& g, const PermSubgroup& n);
std::vector<std::uint64_t> abelian_invariants(const PermSubgroup& g);

/// Omega(G, K) = { v in G : v^2 in K, [G, v] <= K }.
PermSubgroup omega(const PermSubgroup& g, const PermSubgroup& k);

struct NormalizerOptions {
  std::uint64_t filter_cap = std::uint64_t{1} << 20;
  std::uint64_t candidate_budget = std::uint64_t{1} << 24;
};

PermSubgroup normalizer_in(const PermSubgroup& ambient, const PermSubgroup& g, const NormalizerOptions& opt = {});
PermSubgroup normalizer_in_wreath(const PermSubgroup& g, const NormalizerOptions& opt = {});

struct TowerStep {
  std::uint64_t order;
  std::uint64_t quotient_order;
  bool elementary_abelian;
};

struct TowerReport {
  unsigned level = 0;
  std::vector<TowerStep> steps;
  bool stabilized = false;
  std::vector<PermSubgroup> terms;

  nlohmann::json to_json() const;
};

/// N_0 = G, N_{i+1} = norm_ambient(N_i) until N_{i+1} = N_i or max_steps.
TowerReport normalizer_tower(const PermSubgroup& g, const PermSubgroup& ambient, unsigned max_steps,
                             const NormalizerOptions& opt = {});
TowerReport normalizer_tower(const PermSubgroup& g, unsigned max_steps, const NormalizerOptions& opt = {});

/// [G:H]; throws PreconditionFailed unless H <= G.
std::uint64_t subgroup_index(const PermSubgroup& g, const PermSubgroup& h);
PermSubgroup intersection(const PermSubgroup& a, const PermSubgroup& b, std::uint64_t budget = 1'000'000);
/// Subgroup generated by a and b together.
PermSubgroup join(const PermSubgroup& a, const PermSubgroup& b);

/// Elements fixing every vertex of level k.
PermSubgroup level_stabilizer(const PermSubgroup& g, unsigned k);
/// Elements supported on the subtree below v.
PermSubgroup rist(const PermSubgroup& g, const Vertex& v);
bool is_level_transitive(const PermSubgroup& g, unsigned k);
/// Image under restriction to level k <= level().
PermSubgroup restrict_to(const PermSubgroup& g, unsigned k);

/// G/N elementary abelian (every generator has order dividing p mod N, commutators in N).
bool is_elementary_abelian_quotient(const PermSubgroup& g, const PermSubgroup& n);

/// All subgroups of a small group, ordered by (order, sorted element list).
std::vector<PermSubgroup> all_subgroups(const PermSubgroup& g, std::uint64_t budget = 4096);

}  // namespace arbor
