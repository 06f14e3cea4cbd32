#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prmix {

using Element = std::uint8_t;

// Membership masks are 64-bit, so this cap is hard.
inline constexpr int kMaxGroupOrder = 64;

struct Subgroup {
  std::uint64_t mask = 0;

  bool contains(Element a) const { return (mask >> a) & 1u; }
  int size() const;
  std::vector<Element> elements() const;
  friend bool operator==(const Subgroup&, const Subgroup&) = default;
};

struct GroupSpec {
  enum class Kind { Cyclic, Product, Symmetric, Dihedral, Table };

  Kind kind = Kind::Cyclic;
  int param = 1;
  std::vector<GroupSpec> factors;
  std::string path;

  static GroupSpec cyclic(int q);
  static GroupSpec product(std::vector<GroupSpec> factors);
  static GroupSpec symmetric(int k);
  static GroupSpec dihedral(int m);
  static GroupSpec table(std::string path);

  std::string to_string() const;
};

// Accepts "Z6", "C6", "Z2xZ3", "S3", "D4", "table:<path>".
GroupSpec parse_group_spec(std::string_view text);

class FiniteGroup {
 public:
  // `table[a][b]` is the product a*b in whatever labelling the caller uses.
  // The identity is detected and moved to index 0; all other elements keep
  // their relative order.
  FiniteGroup(std::string name, const std::vector<std::vector<int>>& table,
              std::optional<GroupSpec> spec = std::nullopt, int order_cap = kMaxGroupOrder);

  FiniteGroup(const FiniteGroup&) = delete;
  FiniteGroup& operator=(const FiniteGroup&) = delete;

  int order() const { return q_; }
  Element identity() const { return 0; }
  Element mul(Element a, Element b) const { return mult_[static_cast<std::size_t>(a) * q_ + b]; }
  Element inv(Element a) const { return inv_[a]; }
  // a^s for s = +1 or -1.
  Element signed_power(Element a, int s) const { return s > 0 ? a : inv_[a]; }
  const std::string& name() const { return name_; }
  const std::optional<GroupSpec>& spec() const { return spec_; }
  // original_label()[k] is the caller's label of internal element k.
  const std::vector<int>& original_label() const { return original_label_; }

  bool is_abelian() const;
  int element_order(Element a) const;
  std::uint64_t full_mask() const;

  Subgroup closure(std::uint64_t generators) const;
  bool generates(std::uint64_t generators) const;

  const std::vector<Subgroup>& proper_subgroups() const;
  // Smallest generating set, lexicographically first among those of minimal size.
  const std::vector<Element>& minimal_generating_set() const;

 private:
  std::string name_;
  int q_ = 0;
  std::vector<Element> mult_;
  std::vector<Element> inv_;
  std::vector<int> original_label_;
  std::optional<GroupSpec> spec_;

  mutable std::once_flag subgroups_once_;
  mutable std::vector<Subgroup> subgroups_;
  mutable std::once_flag gens_once_;
  mutable std::vector<Element> min_gens_;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

GroupPtr build_group(const GroupSpec& spec, int order_cap = kMaxGroupOrder);
GroupPtr parse_group_table(std::istream& in, std::string name, int order_cap = kMaxGroupOrder);
GroupPtr load_group_table(const std::string& path, int order_cap = kMaxGroupOrder);

std::uint64_t element_mask(std::span<const Element> elems);
bool generates(const FiniteGroup& g, std::span<const Element> elems);

}  // namespace prmix
