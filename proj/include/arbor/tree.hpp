#pragma once

// Rooted regular trees, letter permutations and depth-n truncated isometries.
//
// Conventions used throughout the library:
//   * isometries act on the right of vertices, v -> v^g, and products are read
//     left to right: v^(gh) = (v^g)^h;
//   * the level-n vertices x_1...x_n are numbered lexicographically with letter
//     0 smallest, i.e. index = sum x_i d^(n-i).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace arbor {

using Letter = std::uint8_t;
using Point = std::uint32_t;

inline constexpr unsigned kMaxArity = 16;

class Alphabet {
 public:
  explicit Alphabet(unsigned arity);

  unsigned size() const { return arity_; }
  bool operator==(const Alphabet&) const = default;

 private:
  unsigned arity_;
};

/// A vertex of the tree: a finite word over the alphabet (empty = root).
class Vertex {
 public:
  Vertex() = default;
  explicit Vertex(std::vector<Letter> word) : word_(std::move(word)) {}

  /// Parses a digit string such as "0120"; "" is the root.
  static Vertex parse(const std::string& digits);
  static Vertex from_index(std::uint64_t index, unsigned level, unsigned arity);

  std::size_t level() const { return word_.size(); }
  const std::vector<Letter>& letters() const { return word_; }
  Letter operator[](std::size_t i) const { return word_[i]; }
  bool valid_for(unsigned arity) const;

  Vertex concat(const Vertex& other) const;
  Vertex child(Letter x) const;
  std::uint64_t index(unsigned arity) const;
  std::string str() const;

  auto operator<=>(const Vertex&) const = default;

 private:
  std::vector<Letter> word_;
};

/// A permutation of the alphabet, stored by images.
class LetterPerm {
 public:
  LetterPerm() = default;
  explicit LetterPerm(std::vector<Letter> images);

  static LetterPerm identity(unsigned arity);
  /// Builds the product of disjoint (or not) cycles, applied left to right.
  static LetterPerm from_cycles(unsigned arity, const std::vector<std::vector<unsigned>>& cycles);

  unsigned arity() const { return static_cast<unsigned>(images_.size()); }
  Letter operator()(Letter x) const { return images_[x]; }
  const std::vector<Letter>& images() const { return images_; }

  bool is_identity() const;
  LetterPerm inverse() const;
  /// First this, then `other`.
  LetterPerm then(const LetterPerm& other) const;
  /// Canonical cycle notation, e.g. "(0 1 2)"; the identity prints as "()".
  std::string cycle_string() const;
  std::vector<std::vector<unsigned>> cycles() const;

  auto operator<=>(const LetterPerm&) const = default;

 private:
  std::vector<Letter> images_;
};

/// An element of the level-n iterated wreath product of Sym(d): a tree-compatible
/// permutation of the d^n level-n vertices.
class TruncatedIsometry {
 public:
  TruncatedIsometry() = default;

  /// Validates that `perm` is a bijection compatible with the tree structure.
  TruncatedIsometry(unsigned arity, unsigned level, std::vector<Point> perm);

  /// Skips validation; for internal callers that construct by composition.
  static TruncatedIsometry unchecked(unsigned arity, unsigned level, std::vector<Point> perm);
  static TruncatedIsometry identity(unsigned arity, unsigned level);
  /// (g_0, ..., g_{d-1}) root, one level deeper than the sections.
  static TruncatedIsometry assemble(std::span<const TruncatedIsometry> sections, const LetterPerm& root);
  /// Rigid permutation of the first letter.
  static TruncatedIsometry rigid(const LetterPerm& root, unsigned level);

  unsigned arity() const { return arity_; }
  unsigned level() const { return level_; }
  std::size_t degree() const { return perm_.size(); }
  const std::vector<Point>& perm() const { return perm_; }
  Point operator()(Point v) const { return perm_[v]; }

  bool is_identity() const;
  TruncatedIsometry inverse() const;
  /// Action on level k <= level().
  TruncatedIsometry restrict_to(unsigned k) const;
  /// The state below first-level vertex x, one level shallower.
  TruncatedIsometry section(Letter x) const;
  LetterPerm root_perm() const;

  nlohmann::json to_json() const;
  static TruncatedIsometry from_json(const nlohmann::json& j);

  auto operator<=>(const TruncatedIsometry&) const = default;

 private:
  unsigned arity_ = 2;
  unsigned level_ = 0;
  std::vector<Point> perm_{0};
};

/// First g, then h.
TruncatedIsometry wreath_compose(const TruncatedIsometry& g, const TruncatedIsometry& h);

/// True iff `perm` on d^level points preserves the prefix structure.
bool is_tree_compatible(unsigned arity, unsigned level, std::span<const Point> perm);

std::uint64_t ipow(std::uint64_t base, unsigned exp);

/// Order of the level-n iterated wreath product of Sym(d), or nullopt on overflow.
std::optional<std::uint64_t> wreath_order(unsigned level, unsigned arity);

/// Streams every element of the level-n iterated wreath product exactly once.
class WreathStream {
 public:
  static constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 22;

  WreathStream(unsigned level, unsigned arity, std::uint64_t budget = kDefaultBudget);

  std::uint64_t size() const { return total_; }
  std::optional<TruncatedIsometry> next();

 private:
  unsigned level_;
  unsigned arity_;
  std::uint64_t total_;
  std::uint64_t produced_ = 0;
  std::vector<LetterPerm> letter_perms_;
  std::vector<std::size_t> digits_;
};

TruncatedIsometry from_portrait_digits(unsigned arity, unsigned level,
                                       std::span<const LetterPerm> activity);

std::vector<LetterPerm> all_letter_perms(unsigned arity);

struct VertexHash {
  std::size_t operator()(const Vertex& v) const;
};

struct TruncatedHash {
  std::size_t operator()(const TruncatedIsometry& g) const;
};

}  // namespace arbor
