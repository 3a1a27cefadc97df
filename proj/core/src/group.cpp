#include "cforge/group.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>

namespace cforge {

namespace {

// cpp_int bit operations are only safe on non-negative values; route all
// shifts through the sign-split helpers.
BigInt shift_left(const BigInt& v, std::int64_t s) {
  if (s <= 0 || v == 0) return v;
  if (v < 0) return -BigInt(BigInt(-v) << static_cast<unsigned>(s));
  return BigInt(v << static_cast<unsigned>(s));
}

std::int64_t to_int64(const BigInt& v, const char* what) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw std::runtime_error(std::string(what) + ": value out of 64-bit range");
  }
  return v.convert_to<std::int64_t>();
}

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

Dyadic::Dyadic(BigInt m, std::int64_t e) {
  if (m == 0) return;
  bool neg = m < 0;
  BigInt a = neg ? BigInt(-m) : m;
  while (!bit_test(a, 0)) {
    a >>= 1;
    ++e;
  }
  num_ = neg ? BigInt(-a) : a;
  exp_ = e;
}

Dyadic Dyadic::operator+(const Dyadic& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  std::int64_t e = std::min(exp_, o.exp_);
  BigInt a = shift_left(num_, exp_ - e);
  BigInt b = shift_left(o.num_, o.exp_ - e);
  return Dyadic(a + b, e);
}

Dyadic Dyadic::operator-() const {
  Dyadic r = *this;
  r.num_ = -r.num_;
  return r;
}

Dyadic Dyadic::shifted(std::int64_t k) const {
  if (is_zero()) return *this;
  Dyadic r = *this;
  r.exp_ += k;
  return r;
}

int Dyadic::compare_value(const Dyadic& o) const {
  std::int64_t e = std::min(exp_, o.exp_);
  BigInt a = shift_left(num_, exp_ - e);
  BigInt b = shift_left(o.num_, o.exp_ - e);
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

std::string Dyadic::to_string() const {
  if (is_zero()) return "0";
  if (exp_ >= 0) return shift_left(num_, exp_).str();
  BigInt q = shift_left(BigInt(1), -exp_);
  return num_.str() + "/" + q.str();
}

// ---------------------------------------------------------------------------
// descriptors

namespace {
// 'e' is reserved for the identity in the word grammar
constexpr std::string_view kLetterPool = "abcdfghijklmnopqrstuvwxyz";
}  // namespace

void GroupDescriptor::assign_labels() {
  labels_.clear();
  switch (kind_) {
    case GroupKind::FreeGroup:
    case GroupKind::Lattice:
      for (int i = 0; i < rank_; ++i) {
        if (i < static_cast<int>(kLetterPool.size()))
          labels_.emplace_back(1, kLetterPool[i]);
        else
          labels_.push_back("g" + std::to_string(i + 1));
      }
      break;
    case GroupKind::BaumslagSolitar12:
      labels_ = {"a", "b"};
      break;
    case GroupKind::Product:
      for (const auto& l : parts_[0].labels_) labels_.push_back(l + ".1");
      for (const auto& l : parts_[1].labels_) labels_.push_back(l + ".2");
      break;
  }
}

GroupDescriptor GroupDescriptor::free_group(int rank) {
  if (rank < 1) bad("free group rank must be >= 1");
  GroupDescriptor d;
  d.kind_ = GroupKind::FreeGroup;
  d.rank_ = rank;
  d.assign_labels();
  return d;
}

GroupDescriptor GroupDescriptor::lattice(int rank) {
  if (rank < 1) bad("lattice rank must be >= 1");
  GroupDescriptor d;
  d.kind_ = GroupKind::Lattice;
  d.rank_ = rank;
  d.assign_labels();
  return d;
}

GroupDescriptor GroupDescriptor::bs12() {
  GroupDescriptor d;
  d.kind_ = GroupKind::BaumslagSolitar12;
  d.assign_labels();
  return d;
}

GroupDescriptor GroupDescriptor::product(GroupDescriptor left, GroupDescriptor right) {
  GroupDescriptor d;
  d.kind_ = GroupKind::Product;
  d.parts_.push_back(std::move(left));
  d.parts_.push_back(std::move(right));
  d.assign_labels();
  return d;
}

int GroupDescriptor::generator_count() const {
  switch (kind_) {
    case GroupKind::FreeGroup:
    case GroupKind::Lattice:
      return rank_;
    case GroupKind::BaumslagSolitar12:
      return 2;
    case GroupKind::Product:
      return parts_[0].generator_count() + parts_[1].generator_count();
  }
  return 0;
}

std::optional<int> GroupDescriptor::find_label(std::string_view name) const {
  for (int i = 0; i < static_cast<int>(labels_.size()); ++i)
    if (labels_[i] == name) return i;
  return std::nullopt;
}

std::string GroupDescriptor::to_string() const {
  switch (kind_) {
    case GroupKind::FreeGroup:
      return "free:" + std::to_string(rank_);
    case GroupKind::Lattice:
      return "lattice:" + std::to_string(rank_);
    case GroupKind::BaumslagSolitar12:
      return "bs12";
    case GroupKind::Product:
      return "product(" + parts_[0].to_string() + "," + parts_[1].to_string() + ")";
  }
  return "";
}

bool GroupDescriptor::operator==(const GroupDescriptor& o) const {
  if (kind_ != o.kind_ || rank_ != o.rank_) return false;
  if (kind_ == GroupKind::Product)
    return parts_[0] == o.parts_[0] && parts_[1] == o.parts_[1];
  return true;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_rank(std::string_view s, const char* what) {
  s = trim(s);
  if (s.empty()) bad(std::string(what) + ": missing rank");
  int v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) bad(std::string(what) + ": bad rank '" + std::string(s) + "'");
    v = v * 10 + (c - '0');
    if (v > 1'000'000) bad(std::string(what) + ": rank too large");
  }
  return v;
}

// splits "A,B" at the single top-level comma (parens nest)
std::pair<std::string_view, std::string_view> split_top_level(std::string_view s, char sep) {
  int depth = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    else if (s[i] == ')') --depth;
    else if (s[i] == sep && depth == 0) return {s.substr(0, i), s.substr(i + 1)};
  }
  bad("expected top-level '" + std::string(1, sep) + "' in '" + std::string(s) + "'");
}

}  // namespace

GroupDescriptor GroupDescriptor::parse(std::string_view text) {
  std::string_view s = trim(text);
  if (s == "bs12") return bs12();
  if (s.rfind("free:", 0) == 0) return free_group(parse_rank(s.substr(5), "free"));
  if (s.rfind("lattice:", 0) == 0) return lattice(parse_rank(s.substr(8), "lattice"));
  if (s.rfind("product(", 0) == 0 && s.back() == ')') {
    auto inner = s.substr(8, s.size() - 9);
    auto [l, r] = split_top_level(inner, ',');
    return product(parse(l), parse(r));
  }
  bad("unknown group descriptor '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// elements

bool GroupElement::is_identity() const {
  return std::visit(
      [](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FreeWord>) {
          return v.letters.empty();
        } else if constexpr (std::is_same_v<T, LatticeVec>) {
          return std::all_of(v.coords.begin(), v.coords.end(), [](auto c) { return c == 0; });
        } else if constexpr (std::is_same_v<T, BsElem>) {
          return v.x.is_zero() && v.k == 0;
        } else {
          return std::all_of(v.parts.begin(), v.parts.end(),
                             [](const GroupElement& p) { return p.is_identity(); });
        }
      },
      repr_);
}

bool GroupElement::operator==(const GroupElement& o) const {
  return element_compare(*this, o) == 0;
}

int element_compare(const GroupElement& a, const GroupElement& b) {
  if (a.repr().index() != b.repr().index())
    return a.repr().index() < b.repr().index() ? -1 : 1;
  switch (a.repr().index()) {
    case 0: {  // FreeWord: shortlex, positive letter before its inverse
      const auto& x = a.as_free().letters;
      const auto& y = b.as_free().letters;
      if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
      for (size_t i = 0; i < x.size(); ++i) {
        auto key = [](std::int32_t l) { return std::pair<std::int32_t, int>(std::abs(l), l < 0); };
        auto kx = key(x[i]), ky = key(y[i]);
        if (kx != ky) return kx < ky ? -1 : 1;
      }
      return 0;
    }
    case 1: {
      const auto& x = a.as_lattice().coords;
      const auto& y = b.as_lattice().coords;
      if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
      for (size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i]) return x[i] < y[i] ? -1 : 1;
      return 0;
    }
    case 2: {
      const auto& x = a.as_bs();
      const auto& y = b.as_bs();
      int c = x.x.compare_value(y.x);
      if (c != 0) return c;
      if (x.k != y.k) return x.k < y.k ? -1 : 1;
      return 0;
    }
    default: {
      const auto& x = a.as_product().parts;
      const auto& y = b.as_product().parts;
      if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
      for (size_t i = 0; i < x.size(); ++i) {
        int c = element_compare(x[i], y[i]);
        if (c != 0) return c;
      }
      return 0;
    }
  }
}

namespace {

void require_member(const GroupDescriptor& G, const GroupElement& g, const char* what) {
  bool ok = false;
  switch (G.kind()) {
    case GroupKind::FreeGroup:
      ok = std::holds_alternative<FreeWord>(g.repr());
      if (ok)
        for (auto l : g.as_free().letters)
          if (l == 0 || std::abs(l) > G.rank()) ok = false;
      break;
    case GroupKind::Lattice:
      ok = std::holds_alternative<LatticeVec>(g.repr()) &&
           static_cast<int>(g.as_lattice().coords.size()) == G.rank();
      break;
    case GroupKind::BaumslagSolitar12:
      ok = std::holds_alternative<BsElem>(g.repr());
      break;
    case GroupKind::Product:
      ok = std::holds_alternative<ProductElem>(g.repr()) && g.as_product().parts.size() == 2;
      if (ok) {
        require_member(G.left(), g.as_product().parts[0], what);
        require_member(G.right(), g.as_product().parts[1], what);
      }
      break;
  }
  if (!ok) bad(std::string(what) + ": element does not belong to " + G.to_string());
}

void append_reduced(std::vector<std::int32_t>& acc, std::int32_t letter) {
  if (!acc.empty() && acc.back() == -letter)
    acc.pop_back();
  else
    acc.push_back(letter);
}

}  // namespace

GroupElement identity(const GroupDescriptor& G) {
  switch (G.kind()) {
    case GroupKind::FreeGroup:
      return GroupElement(FreeWord{});
    case GroupKind::Lattice:
      return GroupElement(LatticeVec{std::vector<std::int64_t>(G.rank(), 0)});
    case GroupKind::BaumslagSolitar12:
      return GroupElement(BsElem{});
    case GroupKind::Product:
      return GroupElement(ProductElem{{identity(G.left()), identity(G.right())}});
  }
  return GroupElement();
}

GroupElement compose(const GroupDescriptor& G, const GroupElement& g, const GroupElement& h) {
  require_member(G, g, "compose");
  require_member(G, h, "compose");
  switch (G.kind()) {
    case GroupKind::FreeGroup: {
      FreeWord out{g.as_free().letters};
      for (auto l : h.as_free().letters) append_reduced(out.letters, l);
      return GroupElement(std::move(out));
    }
    case GroupKind::Lattice: {
      LatticeVec out{g.as_lattice().coords};
      const auto& rhs = h.as_lattice().coords;
      for (size_t i = 0; i < rhs.size(); ++i) out.coords[i] += rhs[i];
      return GroupElement(std::move(out));
    }
    case GroupKind::BaumslagSolitar12: {
      const auto& x = g.as_bs();
      const auto& y = h.as_bs();
      return GroupElement(BsElem{x.x + y.x.shifted(x.k), x.k + y.k});
    }
    case GroupKind::Product: {
      return GroupElement(ProductElem{
          {compose(G.left(), g.as_product().parts[0], h.as_product().parts[0]),
           compose(G.right(), g.as_product().parts[1], h.as_product().parts[1])}});
    }
  }
  return GroupElement();
}

GroupElement invert(const GroupDescriptor& G, const GroupElement& g) {
  require_member(G, g, "invert");
  switch (G.kind()) {
    case GroupKind::FreeGroup: {
      FreeWord out;
      const auto& w = g.as_free().letters;
      out.letters.reserve(w.size());
      for (auto it = w.rbegin(); it != w.rend(); ++it) out.letters.push_back(-*it);
      return GroupElement(std::move(out));
    }
    case GroupKind::Lattice: {
      LatticeVec out{g.as_lattice().coords};
      for (auto& c : out.coords) c = -c;
      return GroupElement(std::move(out));
    }
    case GroupKind::BaumslagSolitar12: {
      // (x,k)^-1 = (-x * 2^-k, -k)
      const auto& e = g.as_bs();
      return GroupElement(BsElem{(-e.x).shifted(-e.k), -e.k});
    }
    case GroupKind::Product: {
      return GroupElement(ProductElem{{invert(G.left(), g.as_product().parts[0]),
                                       invert(G.right(), g.as_product().parts[1])}});
    }
  }
  return GroupElement();
}

namespace {

GroupElement make_generator(const GroupDescriptor& G, std::int32_t letter) {
  int idx = std::abs(letter) - 1;
  int sign = letter > 0 ? 1 : -1;
  if (letter == 0 || idx >= G.generator_count()) bad("generator index out of range");
  switch (G.kind()) {
    case GroupKind::FreeGroup:
      return GroupElement(FreeWord{{letter}});
    case GroupKind::Lattice: {
      std::vector<std::int64_t> c(G.rank(), 0);
      c[idx] = sign;
      return GroupElement(LatticeVec{std::move(c)});
    }
    case GroupKind::BaumslagSolitar12:
      if (idx == 0) return GroupElement(BsElem{Dyadic(BigInt(sign), 0), 0});
      return GroupElement(BsElem{Dyadic(), sign});
    case GroupKind::Product: {
      int nl = G.left().generator_count();
      if (idx < nl)
        return GroupElement(ProductElem{{make_generator(G.left(), sign * (idx + 1)),
                                         identity(G.right())}});
      return GroupElement(ProductElem{{identity(G.left()),
                                       make_generator(G.right(), sign * (idx - nl + 1))}});
    }
  }
  return GroupElement();
}

}  // namespace

GroupElement evaluate_word(const GroupDescriptor& G, const std::vector<std::int32_t>& letters) {
  GroupElement acc = identity(G);
  for (auto l : letters) acc = compose(G, acc, make_generator(G, l));
  return acc;
}

GroupElement element_pow(const GroupDescriptor& G, const GroupElement& g, std::int64_t n) {
  GroupElement base = n < 0 ? invert(G, g) : g;
  std::uint64_t e = n < 0 ? -static_cast<std::uint64_t>(n) : static_cast<std::uint64_t>(n);
  GroupElement acc = identity(G);
  while (e > 0) {
    if (e & 1) acc = compose(G, acc, base);
    base = compose(G, base, base);
    e >>= 1;
  }
  return acc;
}

GroupElement normalize(const GroupDescriptor& G, const GroupElement& g) {
  require_member(G, g, "normalize");
  switch (G.kind()) {
    case GroupKind::FreeGroup: {
      FreeWord out;
      for (auto l : g.as_free().letters) append_reduced(out.letters, l);
      return GroupElement(std::move(out));
    }
    case GroupKind::Lattice:
      return g;
    case GroupKind::BaumslagSolitar12: {
      const auto& e = g.as_bs();
      BsElem out{Dyadic(e.x.num(), e.x.exp()), e.k};
      if (out.x.is_zero() && out.k == 0) return GroupElement(BsElem{});
      return GroupElement(std::move(out));
    }
    case GroupKind::Product:
      return GroupElement(ProductElem{{normalize(G.left(), g.as_product().parts[0]),
                                       normalize(G.right(), g.as_product().parts[1])}});
  }
  return g;
}

// ---------------------------------------------------------------------------
// canonical words

namespace {

// (generator index 1-based, exponent); bs12 uses b^-p a^m b^(p+k)
std::vector<std::pair<std::int32_t, std::int64_t>> canonical_syllables(
    const GroupDescriptor& G, const GroupElement& g) {
  std::vector<std::pair<std::int32_t, std::int64_t>> out;
  switch (G.kind()) {
    case GroupKind::FreeGroup: {
      const auto& w = g.as_free().letters;
      for (size_t i = 0; i < w.size();) {
        size_t j = i;
        while (j < w.size() && w[j] == w[i]) ++j;
        out.emplace_back(std::abs(w[i]), w[i] > 0 ? static_cast<std::int64_t>(j - i)
                                                  : -static_cast<std::int64_t>(j - i));
        i = j;
      }
      break;
    }
    case GroupKind::Lattice: {
      const auto& c = g.as_lattice().coords;
      for (size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0) out.emplace_back(static_cast<std::int32_t>(i + 1), c[i]);
      break;
    }
    case GroupKind::BaumslagSolitar12: {
      const auto& e = g.as_bs();
      if (e.x.is_zero()) {
        if (e.k != 0) out.emplace_back(2, e.k);
      } else if (e.x.exp() >= 0) {
        out.emplace_back(1, to_int64(shift_left(e.x.num(), e.x.exp()), "canonical word"));
        if (e.k != 0) out.emplace_back(2, e.k);
      } else {
        std::int64_t p = -e.x.exp();
        out.emplace_back(2, -p);
        out.emplace_back(1, to_int64(e.x.num(), "canonical word"));
        if (p + e.k != 0) out.emplace_back(2, p + e.k);
      }
      break;
    }
    case GroupKind::Product: {
      auto l = canonical_syllables(G.left(), g.as_product().parts[0]);
      auto r = canonical_syllables(G.right(), g.as_product().parts[1]);
      int nl = G.left().generator_count();
      out = std::move(l);
      for (auto& [i, n] : r) out.emplace_back(i + nl, n);
      break;
    }
  }
  return out;
}

constexpr std::int64_t kMaxWordExpansion = 1 << 20;

}  // namespace

std::vector<std::int32_t> canonical_word(const GroupDescriptor& G, const GroupElement& g) {
  require_member(G, g, "canonical_word");
  std::vector<std::int32_t> out;
  for (auto [idx, n] : canonical_syllables(G, g)) {
    std::int64_t count = n < 0 ? -n : n;
    if (count > kMaxWordExpansion || static_cast<std::int64_t>(out.size()) + count > kMaxWordExpansion)
      throw std::runtime_error("canonical_word: expansion too large");
    for (std::int64_t i = 0; i < count; ++i) out.push_back(n > 0 ? idx : -idx);
  }
  return out;
}

// ---------------------------------------------------------------------------
// formatting

std::string format_element(const GroupDescriptor& G, const GroupElement& g) {
  require_member(G, g, "format_element");
  switch (G.kind()) {
    case GroupKind::FreeGroup: {
      const auto& w = g.as_free().letters;
      if (w.empty()) return "e";
      std::string out;
      for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        if (w[i] < 0) out += '-';
        out += G.generator_label(std::abs(w[i]) - 1);
      }
      return out;
    }
    case GroupKind::Lattice: {
      std::string out = "(";
      const auto& c = g.as_lattice().coords;
      for (size_t i = 0; i < c.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(c[i]);
      }
      return out + ")";
    }
    case GroupKind::BaumslagSolitar12: {
      const auto& e = g.as_bs();
      return "(" + e.x.to_string() + ", " + std::to_string(e.k) + ")";
    }
    case GroupKind::Product: {
      return "(" + format_element(G.left(), g.as_product().parts[0]) + "; " +
             format_element(G.right(), g.as_product().parts[1]) + ")";
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct WordParser {
  const GroupDescriptor& G;
  std::string_view s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= s.size();
  }

  std::vector<std::int32_t> parse_sequence(bool inside_parens) {
    std::vector<std::int32_t> out;
    while (true) {
      skip_ws();
      if (pos >= s.size()) {
        if (inside_parens) bad("word: missing ')'");
        break;
      }
      if (s[pos] == ')') {
        if (!inside_parens) bad("word: unmatched ')'");
        break;
      }
      auto f = parse_factor();
      out.insert(out.end(), f.begin(), f.end());
    }
    return out;
  }

  std::vector<std::int32_t> parse_factor() {
    skip_ws();
    if (pos >= s.size()) bad("word: unexpected end");
    if (s[pos] == '-') {
      ++pos;
      return inverted(parse_factor());
    }
    std::vector<std::int32_t> base;
    if (s[pos] == '(') {
      ++pos;
      base = parse_sequence(true);
      if (pos >= s.size() || s[pos] != ')') bad("word: missing ')'");
      ++pos;
    } else {
      base = resolve_token(read_token());
    }
    skip_ws();
    if (pos < s.size() && s[pos] == '^') {
      ++pos;
      std::int64_t e = read_exponent();
      std::vector<std::int32_t> powered;
      auto unit = e < 0 ? inverted(base) : base;
      std::int64_t count = e < 0 ? -e : e;
      if (count * static_cast<std::int64_t>(unit.size()) > kMaxWordExpansion)
        bad("word: exponent too large");
      for (std::int64_t i = 0; i < count; ++i)
        powered.insert(powered.end(), unit.begin(), unit.end());
      return powered;
    }
    return base;
  }

  static std::vector<std::int32_t> inverted(const std::vector<std::int32_t>& w) {
    std::vector<std::int32_t> out;
    out.reserve(w.size());
    for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(-*it);
    return out;
  }

  std::string read_token() {
    size_t start = pos;
    while (pos < s.size()) {
      char c = s[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_')
        ++pos;
      else
        break;
    }
    if (pos == start) bad("word: unexpected character '" + std::string(1, s[pos]) + "'");
    return std::string(s.substr(start, pos - start));
  }

  std::int64_t read_exponent() {
    skip_ws();
    bool neg = false;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
      neg = s[pos] == '-';
      ++pos;
    }
    skip_ws();
    if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
      bad("word: malformed exponent");
    std::int64_t v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      v = v * 10 + (s[pos] - '0');
      if (v > kMaxWordExpansion) bad("word: exponent too large");
      ++pos;
    }
    return neg ? -v : v;
  }

  std::vector<std::int32_t> resolve_token(const std::string& tok) {
    if (auto idx = G.find_label(tok)) return {static_cast<std::int32_t>(*idx + 1)};
    if (tok == "e") return {};
    // fall back to a run of single-character labels; uppercase means inverse
    std::vector<std::int32_t> out;
    for (char c : tok) {
      std::string low(1, static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      auto idx = G.find_label(low);
      if (!idx) bad("word: unknown generator '" + tok + "' for " + G.to_string());
      std::int32_t l = static_cast<std::int32_t>(*idx + 1);
      out.push_back(std::isupper(static_cast<unsigned char>(c)) ? -l : l);
    }
    return out;
  }
};

BigInt parse_bigint(std::string_view s, const char* what) {
  s = trim(s);
  if (s.empty()) bad(std::string(what) + ": empty integer");
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) bad(std::string(what) + ": bad integer '" + std::string(s) + "'");
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i])))
      bad(std::string(what) + ": bad integer '" + std::string(s) + "'");
  return BigInt(std::string(s));
}

std::int64_t parse_i64(std::string_view s, const char* what) {
  return to_int64(parse_bigint(s, what), what);
}

std::vector<std::string_view> split_all_top_level(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    else if (s[i] == ')') --depth;
    else if (s[i] == sep && depth == 0) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

Dyadic parse_dyadic(std::string_view s) {
  s = trim(s);
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return Dyadic(parse_bigint(s, "dyadic"), 0);
  BigInt p = parse_bigint(s.substr(0, slash), "dyadic");
  BigInt q = parse_bigint(s.substr(slash + 1), "dyadic");
  if (q <= 0) bad("dyadic: denominator must be positive");
  std::int64_t e = 0;
  while (!bit_test(q, 0)) {
    q >>= 1;
    ++e;
  }
  if (q != 1) bad("dyadic: denominator must be a power of two");
  return Dyadic(p, -e);
}

GroupElement parse_tuple_element(const GroupDescriptor& G, std::string_view s) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') bad("element: expected '(...)'");
  std::string_view inner = s.substr(1, s.size() - 2);
  switch (G.kind()) {
    case GroupKind::Lattice: {
      auto fields = split_all_top_level(inner, ',');
      if (static_cast<int>(fields.size()) != G.rank())
        bad("element: expected " + std::to_string(G.rank()) + " coordinates");
      LatticeVec v;
      for (auto f : fields) v.coords.push_back(parse_i64(f, "coordinate"));
      return GroupElement(std::move(v));
    }
    case GroupKind::BaumslagSolitar12: {
      auto fields = split_all_top_level(inner, ',');
      if (fields.size() != 2) bad("element: expected '(x, k)'");
      return GroupElement(BsElem{parse_dyadic(fields[0]), parse_i64(fields[1], "exponent")});
    }
    case GroupKind::Product: {
      auto fields = split_all_top_level(inner, ';');
      if (fields.size() != 2) bad("element: expected '(left; right)'");
      return GroupElement(ProductElem{{parse_element(G.left(), trim(fields[0])),
                                       parse_element(G.right(), trim(fields[1]))}});
    }
    default:
      bad("element: tuple form not defined for " + G.to_string());
  }
  return GroupElement();
}

}  // namespace

std::vector<std::int32_t> parse_word(const GroupDescriptor& G, std::string_view text) {
  WordParser p{G, text};
  auto letters = p.parse_sequence(false);
  if (!p.at_end()) bad("word: trailing input");
  return letters;
}

GroupElement parse_element(const GroupDescriptor& G, std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) bad("element: empty input");
  if (s.front() == '(' && G.kind() != GroupKind::FreeGroup) {
    // tuple form only when the parens wrap the whole input and the inside
    // looks numeric; otherwise the word grammar owns it
    int depth = 0;
    bool whole = true;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '(') ++depth;
      else if (s[i] == ')') {
        --depth;
        if (depth == 0 && i + 1 < s.size()) whole = false;
      }
    }
    bool tuple_like = whole;
    if (tuple_like) {
      std::string_view inner = s.substr(1, s.size() - 2);
      bool has_letter = false;
      for (char c : inner)
        if (std::isalpha(static_cast<unsigned char>(c))) has_letter = true;
      if (G.kind() == GroupKind::Product)
        tuple_like = inner.find(';') != std::string_view::npos;
      else
        tuple_like = !has_letter;
    }
    if (tuple_like) return parse_tuple_element(G, s);
  }
  return evaluate_word(G, parse_word(G, s));
}

}  // namespace cforge
