#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cforge {

using BigInt = boost::multiprecision::cpp_int;

// Dyadic rational m * 2^e, kept normalized: m odd, or m == 0 with e == 0.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(BigInt m, std::int64_t e);
  static Dyadic from_integer(std::int64_t n) { return Dyadic(BigInt(n), 0); }

  const BigInt& num() const { return num_; }
  std::int64_t exp() const { return exp_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return num_ == 0 || exp_ >= 0; }

  Dyadic operator+(const Dyadic& o) const;
  Dyadic operator-() const;
  // value * 2^k
  Dyadic shifted(std::int64_t k) const;

  bool operator==(const Dyadic& o) const { return num_ == o.num_ && exp_ == o.exp_; }
  // order as exact rationals
  int compare_value(const Dyadic& o) const;

  std::string to_string() const;  // "3/4", "-2", "0"

 private:
  BigInt num_ = 0;
  std::int64_t exp_ = 0;
};

enum class GroupKind { FreeGroup, Lattice, BaumslagSolitar12, Product };

// Descriptor for the bundled group realizations.  Parsable from strings like
// "free:2", "lattice:3", "bs12", "product(lattice:2,lattice:1)".
class GroupDescriptor {
 public:
  GroupDescriptor() = default;  // placeholder; use the factories for real groups

  static GroupDescriptor free_group(int rank);
  static GroupDescriptor lattice(int rank);
  static GroupDescriptor bs12();
  static GroupDescriptor product(GroupDescriptor left, GroupDescriptor right);
  static GroupDescriptor parse(std::string_view text);

  GroupKind kind() const { return kind_; }
  int rank() const { return rank_; }  // free/lattice only
  const GroupDescriptor& left() const { return parts_.at(0); }
  const GroupDescriptor& right() const { return parts_.at(1); }

  int generator_count() const;
  // 0-based index; signed letters in words are 1-based: +i / -i for label i-1.
  const std::string& generator_label(int index) const { return labels_.at(index); }
  std::optional<int> find_label(std::string_view name) const;

  std::string to_string() const;
  bool operator==(const GroupDescriptor& o) const;
  bool operator!=(const GroupDescriptor& o) const { return !(*this == o); }

 private:
  void assign_labels();

  GroupKind kind_ = GroupKind::Lattice;
  int rank_ = 0;
  std::vector<GroupDescriptor> parts_;
  std::vector<std::string> labels_;
};

struct FreeWord {
  // reduced: no adjacent letter and inverse; letters are +i/-i, i in 1..rank
  std::vector<std::int32_t> letters;
};

struct LatticeVec {
  std::vector<std::int64_t> coords;
};

// element (x, k) of Z[1/2] x| Z with (x,k)(y,l) = (x + 2^k y, k + l)
struct BsElem {
  Dyadic x;
  std::int64_t k = 0;
};

class GroupElement;

struct ProductElem {
  std::vector<GroupElement> parts;  // exactly two
};

class GroupElement {
 public:
  using Repr = std::variant<FreeWord, LatticeVec, BsElem, ProductElem>;

  GroupElement() : repr_(LatticeVec{}) {}
  explicit GroupElement(Repr r) : repr_(std::move(r)) {}

  const Repr& repr() const { return repr_; }
  Repr& repr() { return repr_; }

  const FreeWord& as_free() const { return std::get<FreeWord>(repr_); }
  const LatticeVec& as_lattice() const { return std::get<LatticeVec>(repr_); }
  const BsElem& as_bs() const { return std::get<BsElem>(repr_); }
  const ProductElem& as_product() const { return std::get<ProductElem>(repr_); }

  bool is_identity() const;
  bool operator==(const GroupElement& o) const;
  bool operator!=(const GroupElement& o) const { return !(*this == o); }

 private:
  Repr repr_;
};

// Canonical total order on normal forms; every deterministic tie-break in the
// library goes through this.
int element_compare(const GroupElement& a, const GroupElement& b);

struct ElementLess {
  bool operator()(const GroupElement& a, const GroupElement& b) const {
    return element_compare(a, b) < 0;
  }
};

GroupElement identity(const GroupDescriptor& G);
GroupElement compose(const GroupDescriptor& G, const GroupElement& g, const GroupElement& h);
GroupElement invert(const GroupDescriptor& G, const GroupElement& g);
// letters: signed 1-based generator indices
GroupElement evaluate_word(const GroupDescriptor& G, const std::vector<std::int32_t>& letters);
GroupElement element_pow(const GroupDescriptor& G, const GroupElement& g, std::int64_t n);
// rebuilds the normal form from scratch; identity transformation on valid input
GroupElement normalize(const GroupDescriptor& G, const GroupElement& g);
// expresses g as a word in the standard generators (not necessarily geodesic)
std::vector<std::int32_t> canonical_word(const GroupDescriptor& G, const GroupElement& g);

std::string format_element(const GroupDescriptor& G, const GroupElement& g);
// accepts the serialized forms emitted by format_element as well as words in
// the generators ("a b -a", "(-b)a", "a^3 b^-2", "ab" when letters are single chars)
GroupElement parse_element(const GroupDescriptor& G, std::string_view text);
std::vector<std::int32_t> parse_word(const GroupDescriptor& G, std::string_view text);

}  // namespace cforge
