#pragma once

// Text format for group presentations and element expressions.
//
//   group grigorchuk on 2 { a=@(0 1); b=(a,c); c=(a,d); d=(1,b); }
//   elem p = proj(a*d*a*d);
//
// Expressions: products a*b, powers a^n, conjugation a^b = b^-1 a b,
// commutators [a,b] = a^-1 b^-1 a b (or comm(a,b)), conj(a,b), pow(a,n),
// delta/deri/proj(e), embed(v, e) with v a digit string (empty for the root),
// and qualified names group.gen that fall back to the catalog.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arbor/catalog.hpp"
#include "arbor/error.hpp"
#include "arbor/mealy.hpp"

namespace arbor {

struct Expr {
  enum class Kind { identity, name, product, power, conj, comm, delta, deri, proj, embed };

  Kind kind = Kind::identity;
  std::string name;            // name; may be qualified "group.gen"
  std::int64_t exponent = 1;   // power
  std::vector<Letter> vertex;  // embed
  std::vector<Expr> args;      // product: >= 2 factors; power/delta/deri/proj/embed: 1; conj/comm: 2

  bool operator==(const Expr&) const = default;

  static Expr identity();
  static Expr ref(std::string name);
  static Expr product(std::vector<Expr> factors);
  static Expr pow(Expr base, std::int64_t n);
  static Expr conj(Expr g, Expr h);
  static Expr comm(Expr g, Expr h);
  static Expr unary(Kind kind, Expr arg);
  static Expr embed(Vertex v, Expr arg);
};

struct ElemDef {
  std::string name;
  Expr value;

  bool operator==(const ElemDef&) const = default;
};

struct DslDocument {
  std::vector<GroupPresentation> groups;
  std::vector<ElemDef> elems;

  bool operator==(const DslDocument&) const = default;
};

/// Parses and checks a document: syntax, unique names, resolution of every
/// generator and element name, and arity consistency. Throws ParseError.
DslDocument parse_document(std::string_view text);
/// Parses one expression (syntax only).
Expr parse_expression(std::string_view text);

/// Canonical text; parse_document(print(doc)) == doc.
std::string print(const DslDocument& doc);
std::string print(const GroupPresentation& group);
std::string print(const Expr& e);

/// Names and automata of a document, with catalog groups available as
/// qualified names.
class Environment {
 public:
  Environment() = default;
  explicit Environment(const DslDocument& doc, const MealyOptions& opt = {});

  const DslDocument& document() const { return doc_; }

  /// A group of the document, or a catalog group.
  const ExpandedGroup& group(const std::string& name);
  /// Element, unqualified generator of the document, or group.gen.
  FsAutomorphism resolve(const std::string& name);
  FsAutomorphism evaluate(const Expr& e);
  FsAutomorphism evaluate(std::string_view text);

 private:
  DslDocument doc_;
  MealyOptions opt_;
  std::map<std::string, ExpandedGroup> groups_;
  std::map<std::string, FsAutomorphism> elems_;
  std::vector<std::string> evaluating_;
};

/// Catalog group for a name as written in the DSL ("finitary3" for finitary(3)).
GroupPresentation catalog_group(const std::string& name);

}  // namespace arbor
