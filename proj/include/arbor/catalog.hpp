#pragma once

// Recursion tables for the standard self-similar groups, and the 2-adic family
// of odometer powers tau^x and unitary elements u_x.

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "arbor/mealy.hpp"
#include "arbor/tree.hpp"

namespace arbor {

struct WordFactor {
  std::string name;
  std::int64_t exponent = 1;

  auto operator<=>(const WordFactor&) const = default;
};

/// A product of generator powers; the empty word is the identity.
using Word = std::vector<WordFactor>;

struct GeneratorDef {
  enum class Kind { rigid, identity, tuple };

  std::string name;
  Kind kind = Kind::identity;
  LetterPerm root;             // rigid and tuple
  std::vector<Word> sections;  // tuple only, one per letter

  bool operator==(const GeneratorDef&) const = default;
};

struct GroupPresentation {
  std::string name;
  unsigned arity = 2;
  std::vector<GeneratorDef> generators;

  const GeneratorDef* find(const std::string& gen) const;
  bool operator==(const GroupPresentation&) const = default;
};

/// A presentation together with one minimized automaton per generator.
struct ExpandedGroup {
  GroupPresentation presentation;
  std::vector<FsAutomorphism> generators;

  const FsAutomorphism& operator[](const std::string& gen) const;
  std::vector<std::string> names() const;
};

/// Checks that every name resolves and sections match the arity.
void validate(const GroupPresentation& p);

/// Builds the automata by closing the set of (freely reduced) section words.
ExpandedGroup expand(const GroupPresentation& p, std::size_t word_budget = 100'000);

/// Catalog names: grigorchuk, gupta_sidki, fabrykowski_gupta, bg, adding_machine,
/// dihedral_pair, gs_klein, bg_klein, finitary(k).
GroupPresentation builtin(const std::string& name);
std::vector<std::string> builtin_names();

/// A 2-adic integer known modulo 2^precision, or exactly when it is a machine integer.
class DyadicScalar {
 public:
  static constexpr unsigned kExact = std::numeric_limits<unsigned>::max();
  static constexpr unsigned kMaxPrecision = 62;

  static DyadicScalar exact(std::int64_t value);
  /// value mod 2^precision, 1 <= precision <= 62.
  static DyadicScalar truncated(std::int64_t value, unsigned precision);

  bool is_exact() const { return precision_ == kExact; }
  unsigned precision() const { return precision_; }
  bool is_unit() const { return (residue() & 1) != 0; }
  /// Exact value; only valid when is_exact().
  std::int64_t value() const;
  /// Value mod 2^min(precision, 62).
  std::uint64_t residue() const;

  DyadicScalar operator+(const DyadicScalar& o) const;
  DyadicScalar operator-(const DyadicScalar& o) const;
  DyadicScalar operator*(const DyadicScalar& o) const;
  DyadicScalar operator-() const;
  /// x/2 for even x; loses one bit of precision.
  DyadicScalar halve() const;

  bool operator==(const DyadicScalar&) const = default;

 private:
  std::int64_t exact_ = 0;
  std::uint64_t residue_ = 0;
  unsigned precision_ = kExact;
};

/// An automorphism known exactly down to level valid_depth.
struct DyadicIsometry {
  FsAutomorphism automaton;
  unsigned valid_depth = DyadicScalar::kExact;

  bool is_exact() const { return valid_depth == DyadicScalar::kExact; }
  /// Throws PrecisionExhausted beyond valid_depth.
  TruncatedIsometry truncate(unsigned level) const;
  const FsAutomorphism& exact() const;
};

/// The adding machine tau = (1, tau) sigma.
FsAutomorphism adding_machine();
DyadicIsometry tau_power(const DyadicScalar& x);
/// u_x = (u_x, u_x tau^((x-1)/2)), for odd x.
DyadicIsometry unitary(const DyadicScalar& x);

/// tau together with 0^n * sigma for n = 0..depth.
std::vector<FsAutomorphism> cardioid_generators(unsigned depth);

}  // namespace arbor
