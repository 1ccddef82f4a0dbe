#pragma once

// Word metric, norm balls, nucleus and depth for groups generated by automata.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "arbor/catalog.hpp"
#include "arbor/mealy.hpp"

namespace arbor {

struct GroupWord {
  std::vector<std::pair<std::string, int>> letters;  // generator name, exponent +-1

  std::string str() const;
};

FsAutomorphism evaluate(const GroupWord& w, const ExpandedGroup& group);

struct WeightedGenerator {
  std::string name;
  FsAutomorphism element;
  unsigned weight = 1;
};

/// The presentation generators with weight 1, closed under inverses.
std::vector<WeightedGenerator> symmetric_generators(const ExpandedGroup& group);

struct BallOptions {
  std::size_t element_budget = 2'000'000;
  MealyOptions mealy;
};

/// All elements of norm <= radius, with exact norms and one geodesic witness each.
class Ball {
 public:
  Ball(std::vector<WeightedGenerator> generators, unsigned radius, const BallOptions& opt = {});

  unsigned radius() const { return radius_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<FsAutomorphism>& elements() const { return elements_; }
  const std::vector<unsigned>& norms() const { return norms_; }
  const std::vector<WeightedGenerator>& generators() const { return generators_; }

  /// Norm of g, or nullopt when g lies outside the ball.
  std::optional<unsigned> norm(const FsAutomorphism& g) const;
  std::optional<std::size_t> index_of(const FsAutomorphism& g) const;
  GroupWord witness(std::size_t index) const;
  /// Number of elements of norm <= r, for r <= radius().
  std::size_t count_within(unsigned r) const;

 private:
  std::vector<WeightedGenerator> generators_;
  unsigned radius_;
  std::vector<FsAutomorphism> elements_;
  std::vector<unsigned> norms_;
  std::vector<std::pair<std::int64_t, std::size_t>> parent_;  // (parent index, generator)
  std::unordered_map<FsAutomorphism, std::size_t, FsHash> index_;
};

/// Least word length of g, or nullopt when it exceeds radius.
std::optional<unsigned> word_norm_exact(const FsAutomorphism& g, const std::vector<WeightedGenerator>& gens,
                                        unsigned radius, const BallOptions& opt = {});

struct NucleusOptions {
  std::size_t max_elements = 4096;
  unsigned max_rounds = 64;
  MealyOptions mealy;
};

struct Nucleus {
  std::vector<FsAutomorphism> elements;  // minimized, sorted canonically
  unsigned rounds = 0;

  bool contains(const FsAutomorphism& g) const;
};

/// Fixed point of: recurrent sections of pairwise products, closed under sections.
Nucleus compute_nucleus(const std::vector<FsAutomorphism>& generators, const NucleusOptions& opt = {});
Nucleus compute_nucleus(const ExpandedGroup& group, const NucleusOptions& opt = {});

/// Least n such that every level-n section of g lies in `base` (elements of
/// `base` themselves have depth 0).
unsigned depth(const FsAutomorphism& g, const std::vector<FsAutomorphism>& base, unsigned max_depth = 64);

struct ContractionViolation {
  std::size_t element;
  Letter letter;
  unsigned norm;
  std::optional<unsigned> section_norm;  // nullopt: outside the ball
  std::string witness;
};

struct ContractionReport {
  unsigned radius = 0;
  std::size_t ball_size = 0;
  std::vector<ContractionViolation> violations;
  double max_ratio = 0;  // max of 2 |g@x| / (|g| + 1) over nontrivial g

  nlohmann::json to_json() const;
};

/// Checks |g@x| <= (|g| + 1) / 2 on the whole ball.
ContractionReport contraction_check(const Ball& ball);
ContractionReport contraction_check(const std::vector<WeightedGenerator>& gens, unsigned radius,
                                    const BallOptions& opt = {});

}  // namespace arbor
