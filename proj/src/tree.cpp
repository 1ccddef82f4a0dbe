#include "arbor/tree.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "arbor/error.hpp"

namespace arbor {

namespace {

void require_arity(unsigned arity) {
  if (arity < 2 || arity > kMaxArity) {
    throw PreconditionFailed("arity must lie in [2, " + std::to_string(kMaxArity) + "], got " +
                             std::to_string(arity));
  }
}

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

Alphabet::Alphabet(unsigned arity) : arity_(arity) { require_arity(arity); }

// ---------------------------------------------------------------------------
// Vertex

Vertex Vertex::parse(const std::string& digits) {
  std::vector<Letter> word;
  word.reserve(digits.size());
  for (char c : digits) {
    if (c < '0' || c > '9') throw PreconditionFailed("vertex letters must be digits: '" + digits + "'");
    word.push_back(static_cast<Letter>(c - '0'));
  }
  return Vertex(std::move(word));
}

Vertex Vertex::from_index(std::uint64_t index, unsigned level, unsigned arity) {
  std::vector<Letter> word(level);
  for (unsigned i = level; i-- > 0;) {
    word[i] = static_cast<Letter>(index % arity);
    index /= arity;
  }
  return Vertex(std::move(word));
}

bool Vertex::valid_for(unsigned arity) const {
  return std::all_of(word_.begin(), word_.end(), [arity](Letter x) { return x < arity; });
}

Vertex Vertex::concat(const Vertex& other) const {
  std::vector<Letter> w = word_;
  w.insert(w.end(), other.word_.begin(), other.word_.end());
  return Vertex(std::move(w));
}

Vertex Vertex::child(Letter x) const {
  std::vector<Letter> w = word_;
  w.push_back(x);
  return Vertex(std::move(w));
}

std::uint64_t Vertex::index(unsigned arity) const {
  std::uint64_t idx = 0;
  for (Letter x : word_) idx = idx * arity + x;
  return idx;
}

std::string Vertex::str() const {
  std::string s;
  for (Letter x : word_) {
    if (x < 10) {
      s.push_back(static_cast<char>('0' + x));
    } else {
      s += "[" + std::to_string(x) + "]";
    }
  }
  return s;
}

std::size_t VertexHash::operator()(const Vertex& v) const {
  std::size_t h = v.level();
  for (Letter x : v.letters()) h = mix(h, x);
  return h;
}

// ---------------------------------------------------------------------------
// LetterPerm

LetterPerm::LetterPerm(std::vector<Letter> images) : images_(std::move(images)) {
  std::vector<bool> seen(images_.size(), false);
  for (Letter y : images_) {
    if (y >= images_.size() || seen[y]) throw PreconditionFailed("letter permutation is not a bijection");
    seen[y] = true;
  }
}

LetterPerm LetterPerm::identity(unsigned arity) {
  std::vector<Letter> im(arity);
  std::iota(im.begin(), im.end(), Letter{0});
  LetterPerm p;
  p.images_ = std::move(im);
  return p;
}

LetterPerm LetterPerm::from_cycles(unsigned arity, const std::vector<std::vector<unsigned>>& cycles) {
  LetterPerm result = identity(arity);
  for (const auto& cycle : cycles) {
    std::vector<Letter> im(arity);
    std::iota(im.begin(), im.end(), Letter{0});
    std::vector<bool> used(arity, false);
    for (unsigned x : cycle) {
      if (x >= arity) throw PreconditionFailed("cycle letter " + std::to_string(x) + " out of range for arity " +
                                               std::to_string(arity));
      if (used[x]) throw PreconditionFailed("cycle repeats letter " + std::to_string(x));
      used[x] = true;
    }
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      im[cycle[i]] = static_cast<Letter>(cycle[(i + 1) % cycle.size()]);
    }
    result = result.then(LetterPerm(std::move(im)));
  }
  return result;
}

bool LetterPerm::is_identity() const {
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (images_[i] != i) return false;
  }
  return true;
}

LetterPerm LetterPerm::inverse() const {
  std::vector<Letter> inv(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i]] = static_cast<Letter>(i);
  LetterPerm p;
  p.images_ = std::move(inv);
  return p;
}

LetterPerm LetterPerm::then(const LetterPerm& other) const {
  if (other.arity() != arity()) throw ArityMismatch("letter permutations of different arity");
  std::vector<Letter> im(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) im[i] = other.images_[images_[i]];
  LetterPerm p;
  p.images_ = std::move(im);
  return p;
}

std::vector<std::vector<unsigned>> LetterPerm::cycles() const {
  std::vector<std::vector<unsigned>> out;
  std::vector<bool> seen(images_.size(), false);
  for (unsigned start = 0; start < images_.size(); ++start) {
    if (seen[start] || images_[start] == start) continue;
    std::vector<unsigned> cycle;
    for (unsigned x = start; !seen[x]; x = images_[x]) {
      seen[x] = true;
      cycle.push_back(x);
    }
    out.push_back(std::move(cycle));
  }
  return out;
}

std::string LetterPerm::cycle_string() const {
  auto cs = cycles();
  if (cs.empty()) return "()";
  std::ostringstream os;
  for (const auto& c : cs) {
    os << '(';
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? " " : "") << c[i];
    os << ')';
  }
  return os.str();
}

std::vector<LetterPerm> all_letter_perms(unsigned arity) {
  std::vector<Letter> im(arity);
  std::iota(im.begin(), im.end(), Letter{0});
  std::vector<LetterPerm> out;
  do {
    out.emplace_back(im);
  } while (std::next_permutation(im.begin(), im.end()));
  return out;
}

// ---------------------------------------------------------------------------
// TruncatedIsometry

bool is_tree_compatible(unsigned arity, unsigned level, std::span<const Point> perm) {
  const std::uint64_t n = ipow(arity, level);
  if (perm.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (Point y : perm) {
    if (y >= n || seen[y]) return false;
    seen[y] = true;
  }
  for (unsigned k = 1; k < level; ++k) {
    const std::uint64_t block = ipow(arity, level - k);
    std::vector<std::int64_t> image(ipow(arity, k), -1);
    for (std::uint64_t v = 0; v < n; ++v) {
      auto b = static_cast<std::int64_t>(perm[v] / block);
      auto& slot = image[v / block];
      if (slot < 0) {
        slot = b;
      } else if (slot != b) {
        return false;
      }
    }
  }
  return true;
}

TruncatedIsometry::TruncatedIsometry(unsigned arity, unsigned level, std::vector<Point> perm)
    : arity_(arity), level_(level), perm_(std::move(perm)) {
  require_arity(arity);
  if (!is_tree_compatible(arity, level, perm_)) {
    throw PreconditionFailed("permutation is not an element of the level-" + std::to_string(level) +
                             " iterated wreath product");
  }
}

TruncatedIsometry TruncatedIsometry::unchecked(unsigned arity, unsigned level, std::vector<Point> perm) {
  TruncatedIsometry g;
  g.arity_ = arity;
  g.level_ = level;
  g.perm_ = std::move(perm);
  return g;
}

TruncatedIsometry TruncatedIsometry::identity(unsigned arity, unsigned level) {
  require_arity(arity);
  std::vector<Point> p(ipow(arity, level));
  std::iota(p.begin(), p.end(), Point{0});
  return unchecked(arity, level, std::move(p));
}

TruncatedIsometry TruncatedIsometry::assemble(std::span<const TruncatedIsometry> sections, const LetterPerm& root) {
  const unsigned arity = root.arity();
  if (sections.size() != arity) throw ArityMismatch("assemble needs one section per letter");
  const unsigned level = sections[0].level();
  for (const auto& s : sections) {
    if (s.arity() != arity || s.level() != level) throw ArityMismatch("sections of different shape");
  }
  const std::uint64_t m = ipow(arity, level);
  std::vector<Point> p(m * arity);
  for (unsigned x = 0; x < arity; ++x) {
    for (std::uint64_t w = 0; w < m; ++w) {
      p[x * m + w] = static_cast<Point>(root(static_cast<Letter>(x)) * m + sections[x].perm_[w]);
    }
  }
  return unchecked(arity, level + 1, std::move(p));
}

TruncatedIsometry TruncatedIsometry::rigid(const LetterPerm& root, unsigned level) {
  if (level == 0) return identity(root.arity(), 0);
  std::vector<TruncatedIsometry> secs(root.arity(), identity(root.arity(), level - 1));
  return assemble(secs, root);
}

bool TruncatedIsometry::is_identity() const {
  for (std::size_t i = 0; i < perm_.size(); ++i) {
    if (perm_[i] != i) return false;
  }
  return true;
}

TruncatedIsometry TruncatedIsometry::inverse() const {
  std::vector<Point> inv(perm_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i) inv[perm_[i]] = static_cast<Point>(i);
  return unchecked(arity_, level_, std::move(inv));
}

TruncatedIsometry TruncatedIsometry::restrict_to(unsigned k) const {
  if (k > level_) throw PreconditionFailed("cannot restrict to a deeper level");
  const std::uint64_t block = ipow(arity_, level_ - k);
  const std::uint64_t n = ipow(arity_, k);
  std::vector<Point> p(n);
  for (std::uint64_t u = 0; u < n; ++u) p[u] = static_cast<Point>(perm_[u * block] / block);
  return unchecked(arity_, k, std::move(p));
}

TruncatedIsometry TruncatedIsometry::section(Letter x) const {
  if (level_ == 0) throw PreconditionFailed("the level-0 truncation has no sections");
  const std::uint64_t m = ipow(arity_, level_ - 1);
  std::vector<Point> p(m);
  for (std::uint64_t w = 0; w < m; ++w) p[w] = static_cast<Point>(perm_[x * m + w] % m);
  return unchecked(arity_, level_ - 1, std::move(p));
}

LetterPerm TruncatedIsometry::root_perm() const {
  if (level_ == 0) return LetterPerm::identity(arity_);
  auto top = restrict_to(1);
  std::vector<Letter> im(arity_);
  for (unsigned x = 0; x < arity_; ++x) im[x] = static_cast<Letter>(top.perm_[x]);
  return LetterPerm(std::move(im));
}

nlohmann::json TruncatedIsometry::to_json() const {
  return nlohmann::json{{"arity", arity_}, {"level", level_}, {"perm", perm_}};
}

TruncatedIsometry TruncatedIsometry::from_json(const nlohmann::json& j) {
  return TruncatedIsometry(j.at("arity").get<unsigned>(), j.at("level").get<unsigned>(),
                           j.at("perm").get<std::vector<Point>>());
}

std::size_t TruncatedHash::operator()(const TruncatedIsometry& g) const {
  std::size_t h = mix(g.arity(), g.level());
  for (Point p : g.perm()) h = mix(h, p);
  return h;
}

TruncatedIsometry wreath_compose(const TruncatedIsometry& g, const TruncatedIsometry& h) {
  if (g.arity() != h.arity() || g.level() != h.level()) {
    throw ArityMismatch("wreath_compose: operands at different arity or level");
  }
  std::vector<Point> p(g.degree());
  for (std::size_t v = 0; v < p.size(); ++v) p[v] = h(g(static_cast<Point>(v)));
  return TruncatedIsometry::unchecked(g.arity(), g.level(), std::move(p));
}

// ---------------------------------------------------------------------------
// Enumeration

std::optional<std::uint64_t> wreath_order(unsigned level, unsigned arity) {
  std::uint64_t fact = 1;
  for (unsigned i = 2; i <= arity; ++i) fact *= i;
  const std::uint64_t vertices = (ipow(arity, level) - 1) / (arity - 1);
  std::uint64_t order = 1;
  for (std::uint64_t i = 0; i < vertices; ++i) {
    if (order > UINT64_MAX / fact) return std::nullopt;
    order *= fact;
  }
  return order;
}

TruncatedIsometry from_portrait_digits(unsigned arity, unsigned level, std::span<const LetterPerm> activity) {
  const std::uint64_t n = ipow(arity, level);
  std::vector<Point> p(n);
  // offsets[k] = index of the first level-k vertex in the portrait ordering
  std::vector<std::uint64_t> offsets(level + 1, 0);
  for (unsigned k = 1; k <= level; ++k) offsets[k] = offsets[k - 1] + ipow(arity, k - 1);
  for (std::uint64_t v = 0; v < n; ++v) {
    std::uint64_t image = 0;
    std::uint64_t prefix = 0;
    for (unsigned i = 0; i < level; ++i) {
      const auto x = static_cast<Letter>((v / ipow(arity, level - 1 - i)) % arity);
      image = image * arity + activity[offsets[i] + prefix](x);
      prefix = prefix * arity + x;
    }
    p[v] = static_cast<Point>(image);
  }
  return TruncatedIsometry::unchecked(arity, level, std::move(p));
}

WreathStream::WreathStream(unsigned level, unsigned arity, std::uint64_t budget)
    : level_(level), arity_(arity), letter_perms_(all_letter_perms(arity)) {
  require_arity(arity);
  auto order = wreath_order(level, arity);
  if (!order || *order > budget) {
    throw BudgetExceeded("level-" + std::to_string(level) + " wreath product over " + std::to_string(arity) +
                         " letters exceeds the enumeration budget of " + std::to_string(budget));
  }
  total_ = *order;
  digits_.assign((ipow(arity, level) - 1) / (arity - 1), 0);
}

std::optional<TruncatedIsometry> WreathStream::next() {
  if (produced_ == total_) return std::nullopt;
  std::vector<LetterPerm> activity;
  activity.reserve(digits_.size());
  for (std::size_t d : digits_) activity.push_back(letter_perms_[d]);
  auto g = from_portrait_digits(arity_, level_, activity);
  ++produced_;
  for (std::size_t i = digits_.size(); i-- > 0;) {
    if (++digits_[i] < letter_perms_.size()) break;
    digits_[i] = 0;
  }
  return g;
}

}  // namespace arbor
