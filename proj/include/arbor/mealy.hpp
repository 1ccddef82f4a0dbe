#pragma once

// Finite-state tree isometries as invertible synchronous Mealy machines.
//
// A state s has a root permutation perm(s) and a transition next(s, x) for each
// letter x; the isometry at s maps xw to perm(s)(x) w' where w' is the image of w
// under next(s, x).  The section g@x is therefore next(initial, x).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arbor/tree.hpp"

namespace arbor {

using StateId = std::uint32_t;

struct MealyOptions {
  std::size_t state_budget = 1'000'000;
};

class FsAutomorphism {
 public:
  /// The identity of the binary tree.
  FsAutomorphism();

  /// Validating constructor: one permutation and one transition row per state.
  FsAutomorphism(unsigned arity, const std::vector<LetterPerm>& perms,
                 const std::vector<std::vector<StateId>>& next, StateId initial);

  static FsAutomorphism identity(unsigned arity);
  /// Flat tables: perm[s * arity + x], next[s * arity + x].
  static FsAutomorphism from_tables(unsigned arity, std::vector<Letter> perm, std::vector<StateId> next,
                                    StateId initial);
  /// (s_0, ..., s_{d-1}) root, built as a disjoint union plus a fresh initial state.
  static FsAutomorphism from_sections(const std::vector<FsAutomorphism>& sections, const LetterPerm& root);

  unsigned arity() const { return arity_; }
  std::size_t num_states() const { return perm_.size() / arity_; }
  StateId initial() const { return initial_; }

  Letter out(StateId s, Letter x) const { return perm_[std::size_t{s} * arity_ + x]; }
  StateId next(StateId s, Letter x) const { return next_[std::size_t{s} * arity_ + x]; }
  LetterPerm state_perm(StateId s) const;
  LetterPerm root_perm() const { return state_perm(initial_); }
  bool state_is_active(StateId s) const;

  /// Same tables, different initial state (not trimmed).
  FsAutomorphism with_initial(StateId s) const;

  const std::vector<Letter>& perm_table() const { return perm_; }
  const std::vector<StateId>& next_table() const { return next_; }

  /// Structural equality of tables; agrees with group equality on minimized machines.
  bool operator==(const FsAutomorphism&) const = default;

 private:
  unsigned arity_;
  std::vector<Letter> perm_;
  std::vector<StateId> next_;
  StateId initial_;
};

struct FsHash {
  std::size_t operator()(const FsAutomorphism& g) const;
};

/// Level-wise activity of g above level `depth`, stored in portrait order
/// (root first, then each level lexicographically).
struct Portrait {
  unsigned arity = 2;
  unsigned depth = 0;
  std::vector<LetterPerm> activity;

  const LetterPerm& at(const Vertex& v) const;
};

FsAutomorphism rigid_perm(const LetterPerm& p, unsigned arity);

FsAutomorphism section(const FsAutomorphism& g, const Vertex& v);
FsAutomorphism section(const FsAutomorphism& g, Letter x);
FsAutomorphism embed(const Vertex& v, const FsAutomorphism& g);

/// Reachable-pair product, first g then h, without minimization.
FsAutomorphism compose_raw(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt = {});
/// Minimized product, first g then h.
FsAutomorphism compose(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt = {});
FsAutomorphism invert(const FsAutomorphism& g);
FsAutomorphism power(const FsAutomorphism& g, std::int64_t n, const MealyOptions& opt = {});
/// g^h = h^-1 g h.
FsAutomorphism conjugate(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt = {});
/// [g,h] = g^-1 h^-1 g h.
FsAutomorphism commutator(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt = {});

FsAutomorphism delta(const FsAutomorphism& g);
FsAutomorphism deri(const FsAutomorphism& g);
FsAutomorphism proj(const FsAutomorphism& g);

bool is_trivial(const FsAutomorphism& g, const MealyOptions& opt = {});
bool equal(const FsAutomorphism& g, const FsAutomorphism& h, const MealyOptions& opt = {});

/// Reachable, bisimulation-minimal machine with canonical BFS state numbering.
FsAutomorphism minimize(const FsAutomorphism& g);

TruncatedIsometry truncate(const FsAutomorphism& g, unsigned level);
Portrait portrait(const FsAutomorphism& g, unsigned depth);
Vertex act(const FsAutomorphism& g, const Vertex& v);

/// Least k <= max with g^k = 1, or nullopt.
std::optional<std::uint64_t> order_bounded(const FsAutomorphism& g, std::uint64_t max,
                                           const MealyOptions& opt = {});

nlohmann::json to_json(const FsAutomorphism& g);
FsAutomorphism fs_from_json(const nlohmann::json& j);

std::string automaton_dot(const FsAutomorphism& g, const std::string& name = "g");
std::string portrait_dot(const Portrait& p, const std::string& name = "portrait");

}  // namespace arbor
