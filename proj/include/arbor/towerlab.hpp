#pragma once

// Split-form subgroups (prod U)<sigma>(diag S) of the binary wreath product,
// their normalizer and Omega formulas checked against brute force, layered
// towers, the ranked generators of the Grigorchuk and Gupta-Sidki overgroups,
// and the exact identity catalogues about them.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arbor/catalog.hpp"
#include "arbor/mealy.hpp"
#include "arbor/permlab.hpp"
#include "arbor/wordcalc.hpp"

namespace arbor {

// ---------------------------------------------------------------------------
// Split forms

/// R = (prod U) <sigma> (diag S) at level n, with U normal in S at level n-1.
class SplitForm {
 public:
  /// Throws ArityMismatch unless both are binary at the same level, and
  /// PreconditionFailed unless U is normal in S.
  SplitForm(PermSubgroup u, PermSubgroup s);

  unsigned level() const { return s_.level() + 1; }
  const PermSubgroup& u() const { return u_; }
  const PermSubgroup& s() const { return s_; }

 private:
  PermSubgroup u_;
  PermSubgroup s_;
};

/// The level-n group generated by (u,1), sigma and (s,s).
PermSubgroup realize(const SplitForm& sf);

struct NormalizerFormula {
  SplitForm form;  // (V, T)
  std::uint64_t v_over_u = 0;
  std::uint64_t t_over_s = 0;

  std::uint64_t quotient_order() const { return v_over_u * t_over_s; }
};

/// V = omega(S, U), T = norm(U) cap norm(S), normalizers taken in W_{n-1}.
NormalizerFormula normalizer_formula(const SplitForm& sf, const NormalizerOptions& opt = {});

struct FormulaMismatch {
  std::size_t u_index = 0;
  std::size_t s_index = 0;
  std::uint64_t formula_order = 0;
  std::uint64_t direct_order = 0;
  bool groups_agree = false;
  bool quotient_agrees = false;
};

struct FormulaOracleReport {
  unsigned level = 0;
  std::size_t subgroups = 0;
  std::size_t pairs_total = 0;
  std::size_t pairs_tested = 0;
  bool exhaustive = true;
  std::size_t group_agreements = 0;
  std::size_t quotient_agreements = 0;
  std::vector<FormulaMismatch> mismatches;

  bool all_agree() const { return mismatches.empty(); }
  nlohmann::json to_json() const;
};

/// Every normal pair U <= S of subgroups of W_{level-1}, all of them when there
/// are at most `exhaustive_bound`, otherwise a deterministic sample of that size.
FormulaOracleReport normalizer_formula_oracle_check(unsigned level, std::size_t exhaustive_bound,
                                                    std::uint64_t seed = 1);

struct OmegaFormulaCheck {
  bool agree = false;
  std::uint64_t formula_order = 0;
  std::uint64_t direct_order = 0;
  /// Same comparison with the diagonal part cut down to the x in omega(S,T)
  /// with [x,U] <= V.
  bool corrected_agree = false;
  std::uint64_t corrected_order = 0;
};

/// Compares (prod(U cap omega(S,V))) <sigma> (diag omega(S,T)) with omega of the
/// realizations, for G = (U,S) and H = (V,T). Throws PreconditionFailed unless
/// realize(H) is normal in realize(G).
OmegaFormulaCheck omega_formula_check(const SplitForm& g, const SplitForm& h);

struct OmegaMismatch {
  std::size_t g_index = 0;  // into all_split_forms(level)
  std::size_t h_index = 0;
  OmegaFormulaCheck check;
};

struct OmegaFamilyReport {
  unsigned level = 0;
  std::size_t forms = 0;
  std::size_t normal_pairs = 0;
  std::size_t agreements = 0;
  std::size_t corrected_agreements = 0;
  std::vector<OmegaMismatch> mismatches;

  bool all_agree() const { return agreements == normal_pairs; }
  nlohmann::json to_json() const;
};

/// omega_formula_check over every pair of split forms at `level` whose
/// realizations are nested normally.
OmegaFamilyReport omega_formula_family_check(unsigned level);

/// All split forms (U normal in S, both subgroups of W_{level-1}).
std::vector<SplitForm> all_split_forms(unsigned level);

// ---------------------------------------------------------------------------
// Layered towers

struct LayeredStep {
  unsigned index = 0;
  std::uint64_t u_order = 0;
  std::uint64_t s_order = 0;
  std::uint64_t formula_order = 0;
  std::optional<std::uint64_t> direct_order;  // nullopt once the direct tower has stopped
  bool agree = false;
  bool elementary_abelian = false;  // N_i / N_{i-1}
};

struct LayeredReport {
  unsigned level = 0;
  std::vector<LayeredStep> steps;
  bool stabilized = false;
  std::optional<bool> s2_equals_s1;
  /// omega(U_3, U_1) and omega(U_3, L) computed separately; nullopt below 3 steps.
  std::optional<bool> omega_u3_u1_equals_u3_l;
  std::vector<SplitForm> forms;

  bool all_agree() const;
  nlohmann::json to_json() const;
};

/// U_0 = S_0 = L, U_i = omega(S_{i-1}, U_{i-1}), S_i = norm(U_{i-1}) cap norm(S_{i-1}),
/// checked against the direct normalizer tower of realize((L, L)) in W_n.
LayeredReport layered_tower_tables(const PermSubgroup& l, unsigned steps, const NormalizerOptions& opt = {});

/// Ambient for tower experiments: the cyclic (pro-p-Sylow) wreath product for
/// prime arity, the full wreath product otherwise. Both agree for arity 2.
PermSubgroup tower_ambient(unsigned arity, unsigned level);

std::string tower_dot(const TowerReport& report, const std::string& name = "tower");

// ---------------------------------------------------------------------------
// Ranked generators

enum class Family { gs, grigorchuk };

Family parse_family(const std::string& name);
std::string family_name(Family f);

enum class Op { diag, deri, proj };

struct RankedGenerator {
  Family family = Family::grigorchuk;
  std::vector<Op> prefix;  // outermost first
  std::string base;        // "x" for gs; "p", "q" or "r" for grigorchuk

  std::uint64_t rank() const;
  /// Prefix symbols in Unicode followed by the base, e.g. "∆πp".
  std::string str() const;
  /// Accepts the Unicode symbols or the ASCII names D, d, P.
  static RankedGenerator parse(Family family, const std::string& text);

  auto operator<=>(const RankedGenerator&) const = default;
};

/// Z applied to the base element: p = proj(adad), q = proj(ad), r = proj(a), or x.
FsAutomorphism ranked_generator(const RankedGenerator& g);

/// All ranked generators of rank <= max_rank with prefix length <= max_prefix, by
/// rank, then base (r, q, p), then prefix length.
std::vector<RankedGenerator> enumerate_ranked(Family family, unsigned max_rank, unsigned max_prefix = 4);

/// One line per rank: "rank k: e1 e2 ...".
std::string rank_table(Family family, unsigned max_rank, unsigned max_prefix = 4);

/// Generators of the overgroup with the rank-weighted norm: the catalog
/// letters with weight 1, and ranked elements with weight 1 + rank, for all
/// weights <= max_weight and prefix lengths <= max_prefix.
std::vector<WeightedGenerator> ranked_weighted_generators(Family family, unsigned max_weight, unsigned max_prefix);

// ---------------------------------------------------------------------------
// Identity catalogues

enum class CheckStatus { pass, fail, unreduced, budget };

std::string status_name(CheckStatus s);

struct IdentityCheck {
  std::string name;
  CheckStatus status = CheckStatus::fail;
  std::string orientation;  // "stated", "inverse", "both", "neither" or "n/a"
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<IdentityCheck> checks;  // sorted by name

  std::size_t count(CheckStatus s) const;
  bool all_pass() const { return count(CheckStatus::pass) == checks.size(); }
  const IdentityCheck* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

std::vector<std::string> identity_suite_names();

/// Runs the named catalogue: "grigorchuk", "grigorchuk-prenormalizer" or "gs".
/// prefix_depth bounds the Z-words of the grigorchuk suite.
SuiteReport identity_suite(const std::string& name, unsigned prefix_depth = 3, const MealyOptions& opt = {});

/// Checks lhs = rhs, and lhs = rhs^-1 as the alternative orientation.
IdentityCheck check_identity(const std::string& name, const FsAutomorphism& lhs, const FsAutomorphism& rhs,
                             const MealyOptions& opt = {});

/// For pairs (u, v) of ranked generators of rank <= max_rank (prefix length <=
/// max_prefix) and catalog letters, expresses [u,v] through the recursion
/// identities as a product of ranked generators and catalog elements, verifies
/// the product exactly and compares its rank with max(rank u, rank v) - 1.
SuiteReport rank_drop_check(Family family, unsigned max_rank, unsigned max_prefix = 3);

}  // namespace arbor
