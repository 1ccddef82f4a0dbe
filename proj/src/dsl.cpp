#include "arbor/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <set>

#include "arbor/error.hpp"

namespace arbor {

Expr Expr::identity() { return {}; }

Expr Expr::ref(std::string name) {
  Expr e;
  e.kind = Kind::name;
  e.name = std::move(name);
  return e;
}

Expr Expr::product(std::vector<Expr> factors) {
  Expr e;
  e.kind = Kind::product;
  e.args = std::move(factors);
  return e;
}

Expr Expr::pow(Expr base, std::int64_t n) {
  Expr e;
  e.kind = Kind::power;
  e.exponent = n;
  e.args.push_back(std::move(base));
  return e;
}

Expr Expr::conj(Expr g, Expr h) {
  Expr e;
  e.kind = Kind::conj;
  e.args.push_back(std::move(g));
  e.args.push_back(std::move(h));
  return e;
}

Expr Expr::comm(Expr g, Expr h) {
  Expr e = conj(std::move(g), std::move(h));
  e.kind = Kind::comm;
  return e;
}

Expr Expr::unary(Kind kind, Expr arg) {
  Expr e;
  e.kind = kind;
  e.args.push_back(std::move(arg));
  return e;
}

Expr Expr::embed(Vertex v, Expr arg) {
  Expr e = unary(Kind::embed, std::move(arg));
  e.vertex = v.letters();
  return e;
}

GroupPresentation catalog_group(const std::string& name) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), name) != names.end()) return builtin(name);
  const std::string prefix = "finitary";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size() &&
      std::all_of(name.begin() + static_cast<std::ptrdiff_t>(prefix.size()), name.end(),
                  [](unsigned char c) { return std::isdigit(c); })) {
    return builtin("finitary(" + name.substr(prefix.size()) + ")");
  }
  return builtin(name);
}

// ---------------------------------------------------------------------------
// Lexer and parser

namespace {

struct Token {
  enum class Type { name, integer, punct, end };
  Type type = Type::end;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    std::size_t n = 1;
    if (std::isalpha(c) || c == '_') {
      t.type = Token::Type::name;
      while (i + n < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i + n])) || src[i + n] == '_')) {
        ++n;
      }
    } else if (std::isdigit(c)) {
      t.type = Token::Type::integer;
      while (i + n < src.size() && std::isdigit(static_cast<unsigned char>(src[i + n]))) ++n;
    } else if (std::string_view("{}()[],;=*^-.@").find(static_cast<char>(c)) != std::string_view::npos) {
      t.type = Token::Type::punct;
    } else {
      throw ParseError(std::string("unexpected character '") + static_cast<char>(c) + "'", line, col);
    }
    t.text = std::string(src.substr(i, n));
    out.push_back(t);
    advance(n);
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

const std::set<std::string>& functions() {
  static const std::set<std::string> f{"delta", "deri", "proj", "embed", "comm", "conj", "pow"};
  return f;
}

struct NameUse {
  std::string name;
  std::size_t line;
  std::size_t column;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  DslDocument document() {
    DslDocument doc;
    while (!at_end()) {
      const Token& t = peek();
      if (t.type == Token::Type::name && t.text == "group") {
        group_pos_.push_back(t);
        doc.groups.push_back(group());
      } else if (t.type == Token::Type::name && t.text == "elem") {
        elem_pos_.push_back(t);
        uses_.emplace_back();
        doc.elems.push_back(elem());
      } else {
        fail(t, "expected 'group' or 'elem'");
      }
    }
    return doc;
  }

  Expr single_expression() {
    uses_.emplace_back();
    Expr e = expr();
    if (!at_end()) fail(peek(), "unexpected '" + peek().text + "' after expression");
    return e;
  }

  const std::vector<Token>& group_positions() const { return group_pos_; }
  const std::vector<Token>& elem_positions() const { return elem_pos_; }
  const std::vector<std::vector<NameUse>>& uses() const { return uses_; }

 private:
  [[noreturn]] static void fail(const Token& t, const std::string& msg) { throw ParseError(msg, t.line, t.column); }

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().type == Token::Type::end; }
  bool is(const char* text, std::size_t k = 0) const {
    return peek(k).type != Token::Type::end && peek(k).text == text;
  }
  Token next() {
    Token t = peek();
    if (!at_end()) ++pos_;
    return t;
  }
  Token expect(const char* text) {
    if (!is(text)) fail(peek(), std::string("expected '") + text + "'" + found());
    return next();
  }
  std::string found() const { return at_end() ? " at end of input" : ", found '" + peek().text + "'"; }
  Token expect_name(const char* what) {
    if (peek().type != Token::Type::name) fail(peek(), std::string("expected ") + what + found());
    return next();
  }
  std::int64_t integer(const char* what) {
    if (peek().type != Token::Type::integer) fail(peek(), std::string("expected ") + what + found());
    const Token t = next();
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size()) fail(t, "integer out of range");
    return v;
  }
  std::int64_t signed_integer(const char* what) {
    const bool neg = is("-");
    if (neg) next();
    const std::int64_t v = integer(what);
    return neg ? -v : v;
  }

  GroupPresentation group() {
    expect("group");
    GroupPresentation p;
    p.name = expect_name("a group name").text;
    const Token on = expect_name("'on'");
    if (on.text != "on") fail(on, "expected 'on'");
    const Token at = peek();
    const std::int64_t d = integer("an arity");
    if (d < 2 || d > static_cast<std::int64_t>(kMaxArity)) {
      fail(at, "arity must lie in [2, " + std::to_string(kMaxArity) + "]");
    }
    p.arity = static_cast<unsigned>(d);
    expect("{");
    while (!is("}")) {
      if (at_end()) fail(peek(), "unterminated group block");
      GeneratorDef g;
      g.name = expect_name("a generator name").text;
      expect("=");
      if (is("@")) {
        g.kind = GeneratorDef::Kind::rigid;
        g.root = perm(p.arity);
      } else if (is("1")) {
        next();
        g.kind = GeneratorDef::Kind::identity;
      } else {
        g.kind = GeneratorDef::Kind::tuple;
        expect("(");
        g.sections.push_back(word());
        while (is(",")) {
          next();
          g.sections.push_back(word());
        }
        expect(")");
        g.root = is("@") ? perm(p.arity) : LetterPerm::identity(p.arity);
      }
      expect(";");
      p.generators.push_back(std::move(g));
    }
    expect("}");
    return p;
  }

  LetterPerm perm(unsigned d) {
    expect("@");
    std::vector<std::vector<unsigned>> cycles;
    do {
      expect("(");
      std::vector<unsigned> cycle;
      while (!is(")")) {
        const Token t = peek();
        const std::int64_t x = integer("a letter");
        if (x >= static_cast<std::int64_t>(d)) fail(t, "letter " + t.text + " out of range for arity " + std::to_string(d));
        if (std::find(cycle.begin(), cycle.end(), static_cast<unsigned>(x)) != cycle.end()) {
          fail(t, "cycle repeats letter " + t.text);
        }
        cycle.push_back(static_cast<unsigned>(x));
      }
      expect(")");
      if (!cycle.empty()) cycles.push_back(std::move(cycle));
    } while (is("("));
    return LetterPerm::from_cycles(d, cycles);
  }

  Word word() {
    Word w;
    if (is("1")) {
      next();
      return w;
    }
    for (;;) {
      WordFactor f;
      f.name = expect_name("a generator name").text;
      if (is("^")) {
        next();
        f.exponent = signed_integer("an exponent");
      }
      w.push_back(std::move(f));
      if (!is("*")) break;
      next();
    }
    return w;
  }

  ElemDef elem() {
    expect("elem");
    ElemDef e;
    e.name = expect_name("an element name").text;
    expect("=");
    e.value = expr();
    expect(";");
    return e;
  }

  Expr expr() {
    std::vector<Expr> factors;
    factors.push_back(term());
    while (is("*")) {
      next();
      factors.push_back(term());
    }
    if (factors.size() == 1) return std::move(factors.front());
    return Expr::product(std::move(factors));
  }

  Expr term() {
    Expr e = primary();
    while (is("^")) {
      next();
      if (is("-") || peek().type == Token::Type::integer) {
        e = Expr::pow(std::move(e), signed_integer("an exponent"));
      } else {
        e = Expr::conj(std::move(e), primary());
      }
    }
    return e;
  }

  Expr primary() {
    const Token t = peek();
    if (t.type == Token::Type::integer) {
      if (t.text != "1") fail(t, "only 1 may appear as a number here");
      next();
      return Expr::identity();
    }
    if (is("(")) {
      next();
      Expr e = expr();
      expect(")");
      return e;
    }
    if (is("[")) {
      next();
      Expr g = expr();
      expect(",");
      Expr h = expr();
      expect("]");
      return Expr::comm(std::move(g), std::move(h));
    }
    if (t.type != Token::Type::name) fail(t, "expected an expression" + found());
    next();
    if (is("(") && functions().count(t.text)) return call(t);
    std::string name = t.text;
    if (is(".")) {
      next();
      name += "." + expect_name("a generator name after '.'").text;
    }
    uses_.back().push_back({name, t.line, t.column});
    return Expr::ref(std::move(name));
  }

  Expr call(const Token& f) {
    expect("(");
    Expr out;
    if (f.text == "embed") {
      // the root vertex is written as nothing: embed(, e)
      std::string digits;
      if (!is(",")) {
        const Token v = peek();
        if (v.type != Token::Type::integer) fail(v, "expected a vertex (digit string)" + found());
        next();
        digits = v.text;
      }
      expect(",");
      out = Expr::embed(Vertex::parse(digits), expr());
    } else if (f.text == "comm" || f.text == "conj") {
      Expr g = expr();
      expect(",");
      Expr h = expr();
      out = f.text == "comm" ? Expr::comm(std::move(g), std::move(h)) : Expr::conj(std::move(g), std::move(h));
    } else if (f.text == "pow") {
      Expr g = expr();
      expect(",");
      out = Expr::pow(std::move(g), signed_integer("an exponent"));
    } else {
      const auto kind = f.text == "delta" ? Expr::Kind::delta : f.text == "deri" ? Expr::Kind::deri : Expr::Kind::proj;
      out = Expr::unary(kind, expr());
    }
    expect(")");
    return out;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Token> group_pos_;
  std::vector<Token> elem_pos_;
  std::vector<std::vector<NameUse>> uses_;
};

// Arity of every name an expression uses; nullopt for names-free expressions.
struct Checker {
  const DslDocument& doc;
  std::map<std::string, std::optional<unsigned>> elem_arity;
  std::map<std::string, GroupPresentation> catalog;

  std::optional<unsigned> name_arity(const std::string& name, std::string& error) {
    const auto dot = name.find('.');
    if (dot != std::string::npos) {
      const std::string g = name.substr(0, dot);
      const std::string gen = name.substr(dot + 1);
      const GroupPresentation* p = nullptr;
      for (const auto& grp : doc.groups) {
        if (grp.name == g) p = &grp;
      }
      if (!p) {
        auto it = catalog.find(g);
        if (it == catalog.end()) {
          try {
            it = catalog.emplace(g, catalog_group(g)).first;
          } catch (const Error&) {
            error = "unknown group '" + g + "'";
            return std::nullopt;
          }
        }
        p = &it->second;
      }
      if (!p->find(gen)) {
        error = "group '" + g + "' has no generator '" + gen + "'";
        return std::nullopt;
      }
      return p->arity;
    }
    if (auto it = elem_arity.find(name); it != elem_arity.end()) return it->second;
    std::vector<const GroupPresentation*> owners;
    for (const auto& grp : doc.groups) {
      if (grp.find(name)) owners.push_back(&grp);
    }
    if (owners.empty()) {
      error = "unknown name '" + name + "'";
      return std::nullopt;
    }
    if (owners.size() > 1) {
      error = "ambiguous name '" + name + "': qualify it as group.name";
      return std::nullopt;
    }
    return owners.front()->arity;
  }
};

std::optional<unsigned> expr_arity(const Expr& e, const std::function<std::optional<unsigned>(const std::string&)>& of,
                                   std::string& error) {
  std::optional<unsigned> a;
  auto merge = [&](std::optional<unsigned> b) {
    if (!b) return;
    if (a && *a != *b) error = "operands of arities " + std::to_string(*a) + " and " + std::to_string(*b);
    if (!a) a = b;
  };
  if (e.kind == Expr::Kind::name) return of(e.name);
  for (const auto& c : e.args) merge(expr_arity(c, of, error));
  if (e.kind == Expr::Kind::embed && a) {
    for (Letter x : e.vertex) {
      if (x >= *a) error = "vertex letter " + std::to_string(x) + " out of range for arity " + std::to_string(*a);
    }
  }
  return a;
}

void check_document(const DslDocument& doc, const Parser& parser) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < doc.groups.size(); ++i) {
    const auto& t = parser.group_positions()[i];
    if (!names.insert(doc.groups[i].name).second) {
      throw ParseError("group '" + doc.groups[i].name + "' defined twice", t.line, t.column);
    }
    try {
      validate(doc.groups[i]);
    } catch (const Error& e) {
      throw ParseError(std::string("in group '") + doc.groups[i].name + "': " + e.what(), t.line, t.column);
    }
  }
  Checker ck{doc, {}, {}};
  for (std::size_t i = 0; i < doc.elems.size(); ++i) {
    const auto& def = doc.elems[i];
    const auto& t = parser.elem_positions()[i];
    if (!names.insert(def.name).second) throw ParseError("name '" + def.name + "' defined twice", t.line, t.column);
    for (const auto& g : doc.groups) {
      if (g.find(def.name)) {
        throw ParseError("element '" + def.name + "' shadows a generator of group '" + g.name + "'", t.line, t.column);
      }
    }
    for (const auto& use : parser.uses()[i]) {
      std::string err;
      ck.name_arity(use.name, err);
      if (!err.empty()) throw ParseError(err, use.line, use.column);
    }
    std::string err;
    auto a = expr_arity(
        def.value, [&](const std::string& n) { std::string ignored; return ck.name_arity(n, ignored); }, err);
    if (!err.empty()) throw ParseError("in element '" + def.name + "': " + err, t.line, t.column);
    ck.elem_arity[def.name] = a;
  }
}

// ---------------------------------------------------------------------------
// Printer

std::string word_str(const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += "*";
    s += w[i].name;
    if (w[i].exponent != 1) s += "^" + std::to_string(w[i].exponent);
  }
  return s;
}

bool needs_parens_as_base(const Expr& e) {
  return e.kind == Expr::Kind::product || e.kind == Expr::Kind::power || e.kind == Expr::Kind::conj;
}

}  // namespace

DslDocument parse_document(std::string_view text) {
  Parser p(text);
  DslDocument doc = p.document();
  check_document(doc, p);
  return doc;
}

Expr parse_expression(std::string_view text) { return Parser(text).single_expression(); }

std::string print(const Expr& e) {
  auto base = [](const Expr& b) { return needs_parens_as_base(b) ? "(" + print(b) + ")" : print(b); };
  switch (e.kind) {
    case Expr::Kind::identity:
      return "1";
    case Expr::Kind::name:
      return e.name;
    case Expr::Kind::product: {
      std::string s;
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += "*";
        s += e.args[i].kind == Expr::Kind::product ? "(" + print(e.args[i]) + ")" : print(e.args[i]);
      }
      return s;
    }
    case Expr::Kind::power:
      return base(e.args[0]) + "^" + std::to_string(e.exponent);
    case Expr::Kind::conj:
      if (e.args[1].kind == Expr::Kind::name) return base(e.args[0]) + "^" + e.args[1].name;
      return "conj(" + print(e.args[0]) + ", " + print(e.args[1]) + ")";
    case Expr::Kind::comm:
      return "[" + print(e.args[0]) + ", " + print(e.args[1]) + "]";
    case Expr::Kind::delta:
      return "delta(" + print(e.args[0]) + ")";
    case Expr::Kind::deri:
      return "deri(" + print(e.args[0]) + ")";
    case Expr::Kind::proj:
      return "proj(" + print(e.args[0]) + ")";
    case Expr::Kind::embed:
      return "embed(" + Vertex(e.vertex).str() + ", " + print(e.args[0]) + ")";
  }
  return "";
}

std::string print(const GroupPresentation& group) {
  std::string s = "group " + group.name + " on " + std::to_string(group.arity) + " {\n";
  for (const auto& g : group.generators) {
    s += "  " + g.name + " = ";
    switch (g.kind) {
      case GeneratorDef::Kind::identity:
        s += "1";
        break;
      case GeneratorDef::Kind::rigid:
        s += "@" + g.root.cycle_string();
        break;
      case GeneratorDef::Kind::tuple: {
        s += "(";
        for (std::size_t i = 0; i < g.sections.size(); ++i) s += (i ? ", " : "") + word_str(g.sections[i]);
        s += ")";
        if (!g.root.is_identity()) s += "@" + g.root.cycle_string();
        break;
      }
    }
    s += ";\n";
  }
  return s + "}\n";
}

std::string print(const DslDocument& doc) {
  std::string s;
  for (std::size_t i = 0; i < doc.groups.size(); ++i) s += (i ? "\n" : "") + print(doc.groups[i]);
  if (!doc.groups.empty() && !doc.elems.empty()) s += "\n";
  for (const auto& e : doc.elems) s += "elem " + e.name + " = " + print(e.value) + ";\n";
  return s;
}

// ---------------------------------------------------------------------------
// Environment

Environment::Environment(const DslDocument& doc, const MealyOptions& opt) : doc_(doc), opt_(opt) {
  for (const auto& g : doc_.groups) groups_.emplace(g.name, expand(g));
}

const ExpandedGroup& Environment::group(const std::string& name) {
  auto it = groups_.find(name);
  if (it == groups_.end()) it = groups_.emplace(name, expand(catalog_group(name))).first;
  return it->second;
}

FsAutomorphism Environment::resolve(const std::string& name) {
  const auto dot = name.find('.');
  if (dot != std::string::npos) {
    const auto& g = group(name.substr(0, dot));
    const std::string gen = name.substr(dot + 1);
    if (!g.presentation.find(gen)) throw UnknownName("group '" + name.substr(0, dot) + "' has no generator '" + gen + "'");
    return g[gen];
  }
  if (auto it = elems_.find(name); it != elems_.end()) return it->second;
  for (const auto& def : doc_.elems) {
    if (def.name != name) continue;
    if (std::find(evaluating_.begin(), evaluating_.end(), name) != evaluating_.end()) {
      throw PreconditionFailed("element '" + name + "' is defined in terms of itself");
    }
    evaluating_.push_back(name);
    auto v = evaluate(def.value);
    evaluating_.pop_back();
    return elems_.emplace(name, v).first->second;
  }
  const ExpandedGroup* owner = nullptr;
  for (const auto& g : doc_.groups) {
    if (!g.find(name)) continue;
    if (owner) throw UnknownName("ambiguous name '" + name + "': qualify it as group.name");
    owner = &groups_.at(g.name);
  }
  if (!owner) throw UnknownName("unknown name '" + name + "'");
  return (*owner)[name];
}

FsAutomorphism Environment::evaluate(const Expr& e) {
  // the arity of a names-free subexpression comes from its surroundings
  std::function<std::optional<unsigned>(const Expr&)> arity_of = [&](const Expr& x) -> std::optional<unsigned> {
    if (x.kind == Expr::Kind::name) return resolve(x.name).arity();
    for (const auto& c : x.args) {
      if (auto a = arity_of(c)) return a;
    }
    return std::nullopt;
  };
  const unsigned arity = arity_of(e).value_or(doc_.groups.empty() ? 2 : doc_.groups.front().arity);
  std::function<FsAutomorphism(const Expr&)> go = [&](const Expr& x) -> FsAutomorphism {
    switch (x.kind) {
      case Expr::Kind::identity:
        return FsAutomorphism::identity(arity);
      case Expr::Kind::name:
        return resolve(x.name);
      case Expr::Kind::product: {
        auto g = go(x.args[0]);
        for (std::size_t i = 1; i < x.args.size(); ++i) g = compose(g, go(x.args[i]), opt_);
        return g;
      }
      case Expr::Kind::power:
        return power(go(x.args[0]), x.exponent, opt_);
      case Expr::Kind::conj:
        return conjugate(go(x.args[0]), go(x.args[1]), opt_);
      case Expr::Kind::comm:
        return commutator(go(x.args[0]), go(x.args[1]), opt_);
      case Expr::Kind::delta:
        return minimize(delta(go(x.args[0])));
      case Expr::Kind::deri:
        return minimize(deri(go(x.args[0])));
      case Expr::Kind::proj:
        return minimize(proj(go(x.args[0])));
      case Expr::Kind::embed: {
        const Vertex v(x.vertex);
        auto g = go(x.args[0]);
        if (!v.valid_for(g.arity())) throw ArityMismatch("vertex " + v.str() + " is not a vertex of this tree");
        return minimize(embed(v, g));
      }
    }
    return FsAutomorphism::identity(arity);
  };
  return minimize(go(e));
}

FsAutomorphism Environment::evaluate(std::string_view text) { return evaluate(parse_expression(text)); }

}  // namespace arbor
