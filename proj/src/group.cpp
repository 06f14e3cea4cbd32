#include "prmix/group.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include "prmix/error.hpp"

namespace prmix {

int Subgroup::size() const { return std::popcount(mask); }

std::vector<Element> Subgroup::elements() const {
  std::vector<Element> out;
  for (int a = 0; a < 64; ++a)
    if ((mask >> a) & 1u) out.push_back(static_cast<Element>(a));
  return out;
}

GroupSpec GroupSpec::cyclic(int q) {
  GroupSpec s;
  s.kind = Kind::Cyclic;
  s.param = q;
  return s;
}

GroupSpec GroupSpec::product(std::vector<GroupSpec> factors) {
  GroupSpec s;
  s.kind = Kind::Product;
  s.factors = std::move(factors);
  return s;
}

GroupSpec GroupSpec::symmetric(int k) {
  GroupSpec s;
  s.kind = Kind::Symmetric;
  s.param = k;
  return s;
}

GroupSpec GroupSpec::dihedral(int m) {
  GroupSpec s;
  s.kind = Kind::Dihedral;
  s.param = m;
  return s;
}

GroupSpec GroupSpec::table(std::string path) {
  GroupSpec s;
  s.kind = Kind::Table;
  s.path = std::move(path);
  return s;
}

std::string GroupSpec::to_string() const {
  switch (kind) {
    case Kind::Cyclic: return "Z" + std::to_string(param);
    case Kind::Symmetric: return "S" + std::to_string(param);
    case Kind::Dihedral: return "D" + std::to_string(param);
    case Kind::Table: return "table:" + path;
    case Kind::Product: {
      std::string out;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += "x";
        out += factors[i].to_string();
      }
      return out;
    }
  }
  return "?";
}

namespace {

int parse_positive(std::string_view digits, std::string_view whole) {
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw Error(ErrorCode::InvalidArgument, "bad group spec '" + std::string(whole) + "'");
  int v = std::stoi(std::string(digits));
  if (v < 1) throw Error(ErrorCode::InvalidArgument, "group parameter must be positive in '" + std::string(whole) + "'");
  return v;
}

GroupSpec parse_factor(std::string_view tok, std::string_view whole) {
  if (tok.empty()) throw Error(ErrorCode::InvalidArgument, "empty factor in group spec '" + std::string(whole) + "'");
  char head = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
  int v = parse_positive(tok.substr(1), whole);
  switch (head) {
    case 'Z':
    case 'C': return GroupSpec::cyclic(v);
    case 'S': return GroupSpec::symmetric(v);
    case 'D': return GroupSpec::dihedral(v);
    default: throw Error(ErrorCode::InvalidArgument, "unknown group factor '" + std::string(tok) + "'");
  }
}

}  // namespace

GroupSpec parse_group_spec(std::string_view text) {
  if (text.rfind("table:", 0) == 0) return GroupSpec::table(std::string(text.substr(6)));
  std::vector<GroupSpec> factors;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find_first_of("xX*", start);
    factors.push_back(parse_factor(text.substr(start, pos - start), text));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (factors.size() == 1) return factors.front();
  return GroupSpec::product(std::move(factors));
}

FiniteGroup::FiniteGroup(std::string name, const std::vector<std::vector<int>>& table,
                         std::optional<GroupSpec> spec, int order_cap)
    : name_(std::move(name)), spec_(std::move(spec)) {
  const int q = static_cast<int>(table.size());
  if (q == 0) throw Error(ErrorCode::TableInvalid, "empty table");
  if (q > std::min(order_cap, kMaxGroupOrder))
    throw Error(ErrorCode::OrderCapExceeded, "order " + std::to_string(q) + " exceeds cap " +
                                                 std::to_string(std::min(order_cap, kMaxGroupOrder)));
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != q) throw Error(ErrorCode::TableInvalid, "table is not square");
    std::vector<char> seen(q, 0);
    for (int v : row) {
      if (v < 0 || v >= q) throw Error(ErrorCode::TableInvalid, "entry out of range");
      if (seen[v]++) throw Error(ErrorCode::TableInvalid, "row is not a permutation (Latin square)");
    }
  }
  for (int b = 0; b < q; ++b) {
    std::vector<char> seen(q, 0);
    for (int a = 0; a < q; ++a)
      if (seen[table[a][b]]++) throw Error(ErrorCode::TableInvalid, "column is not a permutation (Latin square)");
  }
  int e = -1;
  for (int a = 0; a < q && e < 0; ++a) {
    bool ok = true;
    for (int b = 0; b < q && ok; ++b) ok = table[a][b] == b && table[b][a] == b;
    if (ok) e = a;
  }
  if (e < 0) throw Error(ErrorCode::TableInvalid, "no two-sided identity");
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int c = 0; c < q; ++c)
        if (table[table[a][b]][c] != table[a][table[b][c]])
          throw Error(ErrorCode::TableInvalid, "associativity fails at (" + std::to_string(a) + "," +
                                                   std::to_string(b) + "," + std::to_string(c) + ")");

  q_ = q;
  original_label_.reserve(q);
  original_label_.push_back(e);
  for (int a = 0; a < q; ++a)
    if (a != e) original_label_.push_back(a);
  std::vector<int> internal(q);
  for (int k = 0; k < q; ++k) internal[original_label_[k]] = k;

  mult_.resize(static_cast<std::size_t>(q) * q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      mult_[static_cast<std::size_t>(a) * q + b] =
          static_cast<Element>(internal[table[original_label_[a]][original_label_[b]]]);
  inv_.assign(q, 0);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      if (mul(a, b) == 0) inv_[a] = static_cast<Element>(b);
}

bool FiniteGroup::is_abelian() const {
  for (int a = 0; a < q_; ++a)
    for (int b = a + 1; b < q_; ++b)
      if (mul(a, b) != mul(b, a)) return false;
  return true;
}

int FiniteGroup::element_order(Element a) const {
  int k = 1;
  for (Element x = a; x != 0; x = mul(x, a)) ++k;
  return k;
}

std::uint64_t FiniteGroup::full_mask() const {
  return q_ == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << q_) - 1);
}

Subgroup FiniteGroup::closure(std::uint64_t generators) const {
  std::vector<Element> gens;
  for (int a = 0; a < q_; ++a)
    if ((generators >> a) & 1u) gens.push_back(static_cast<Element>(a));
  std::uint64_t mask = 1;
  std::vector<Element> work{0};
  while (!work.empty()) {
    Element x = work.back();
    work.pop_back();
    for (Element g : gens) {
      Element y = mul(x, g);
      if (!((mask >> y) & 1u)) {
        mask |= std::uint64_t{1} << y;
        work.push_back(y);
      }
    }
  }
  return Subgroup{mask};
}

bool FiniteGroup::generates(std::uint64_t generators) const { return closure(generators).mask == full_mask(); }

const std::vector<Subgroup>& FiniteGroup::proper_subgroups() const {
  std::call_once(subgroups_once_, [this] {
    std::set<std::uint64_t> found;
    for (int a = 0; a < q_; ++a) found.insert(closure(std::uint64_t{1} << a).mask);
    bool grew = true;
    while (grew) {
      grew = false;
      std::vector<std::uint64_t> cur(found.begin(), found.end());
      for (std::size_t i = 0; i < cur.size(); ++i)
        for (std::size_t j = i + 1; j < cur.size(); ++j) {
          std::uint64_t join = closure(cur[i] | cur[j]).mask;
          if (found.insert(join).second) grew = true;
        }
    }
    found.erase(full_mask());
    for (std::uint64_t m : found) subgroups_.push_back(Subgroup{m});
    std::stable_sort(subgroups_.begin(), subgroups_.end(),
                     [](const Subgroup& x, const Subgroup& y) { return x.size() < y.size(); });
  });
  return subgroups_;
}

const std::vector<Element>& FiniteGroup::minimal_generating_set() const {
  std::call_once(gens_once_, [this] {
    if (q_ == 1) return;
    for (int k = 1; k <= q_; ++k) {
      // Lexicographic k-subsets of the non-identity elements.
      std::vector<int> idx(k);
      std::iota(idx.begin(), idx.end(), 1);
      while (true) {
        std::uint64_t m = 0;
        for (int v : idx) m |= std::uint64_t{1} << v;
        if (generates(m)) {
          for (int v : idx) min_gens_.push_back(static_cast<Element>(v));
          return;
        }
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == q_ - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int r = pos + 1; r < k; ++r) idx[r] = idx[r - 1] + 1;
      }
    }
  });
  return min_gens_;
}

namespace {

using Table = std::vector<std::vector<int>>;

Table cyclic_table(int q) {
  Table t(q, std::vector<int>(q));
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) t[a][b] = (a + b) % q;
  return t;
}

Table symmetric_table(int k) {
  std::vector<std::vector<int>> perms;
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  const int q = static_cast<int>(perms.size());
  Table t(q, std::vector<int>(q));
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      std::vector<int> c(k);
      for (int x = 0; x < k; ++x) c[x] = perms[a][perms[b][x]];
      t[a][b] = static_cast<int>(std::lower_bound(perms.begin(), perms.end(), c) - perms.begin());
    }
  return t;
}

// r^i s^j stored at i + m*j; s r s = r^{-1}.
Table dihedral_table(int m) {
  const int q = 2 * m;
  Table t(q, std::vector<int>(q));
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      int i = a % m, j = a / m, k = b % m, l = b / m;
      int rot = ((j == 0 ? i + k : i - k) % m + m) % m;
      t[a][b] = rot + m * ((j + l) % 2);
    }
  return t;
}

Table direct_product(const FiniteGroup& x, const FiniteGroup& y) {
  const int qx = x.order(), qy = y.order(), q = qx * qy;
  Table t(q, std::vector<int>(q));
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      t[a][b] = x.mul(a / qy, b / qy) * qy + y.mul(a % qy, b % qy);
  return t;
}

}  // namespace

GroupPtr build_group(const GroupSpec& spec, int order_cap) {
  switch (spec.kind) {
    case GroupSpec::Kind::Cyclic:
      if (spec.param < 1 || spec.param > order_cap)
        throw Error(ErrorCode::OrderCapExceeded, "cyclic order " + std::to_string(spec.param));
      return std::make_shared<FiniteGroup>(spec.to_string(), cyclic_table(spec.param), spec, order_cap);
    case GroupSpec::Kind::Symmetric:
      if (spec.param < 1 || spec.param > 4)
        throw Error(ErrorCode::InvalidArgument, "symmetric groups are supported for k <= 4");
      return std::make_shared<FiniteGroup>(spec.to_string(), symmetric_table(spec.param), spec, order_cap);
    case GroupSpec::Kind::Dihedral:
      if (spec.param < 1 || spec.param > 8)
        throw Error(ErrorCode::InvalidArgument, "dihedral groups are supported for m <= 8");
      return std::make_shared<FiniteGroup>(spec.to_string(), dihedral_table(spec.param), spec, order_cap);
    case GroupSpec::Kind::Table:
      return load_group_table(spec.path, order_cap);
    case GroupSpec::Kind::Product: {
      if (spec.factors.empty()) throw Error(ErrorCode::InvalidArgument, "empty product");
      long long total = 1;
      for (const auto& f : spec.factors) {
        GroupPtr fg = build_group(f, order_cap);
        total *= fg->order();
        if (total > std::min(order_cap, kMaxGroupOrder))
          throw Error(ErrorCode::OrderCapExceeded, "product order exceeds cap");
      }
      GroupPtr acc = build_group(spec.factors[0], order_cap);
      for (std::size_t i = 1; i < spec.factors.size(); ++i) {
        GroupPtr next = build_group(spec.factors[i], order_cap);
        std::vector<GroupSpec> head(spec.factors.begin(), spec.factors.begin() + static_cast<long>(i) + 1);
        GroupSpec partial = GroupSpec::product(std::move(head));
        acc = std::make_shared<FiniteGroup>(partial.to_string(), direct_product(*acc, *next), partial, order_cap);
      }
      return acc;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown group spec kind");
}

GroupPtr parse_group_table(std::istream& in, std::string name, int order_cap) {
  long long q = 0;
  if (!(in >> q) || q < 1) throw Error(ErrorCode::TableInvalid, "missing or invalid order on line 1");
  if (q > std::min(order_cap, kMaxGroupOrder))
    throw Error(ErrorCode::OrderCapExceeded, "order " + std::to_string(q) + " exceeds cap");
  Table t(q, std::vector<int>(q));
  for (auto& row : t)
    for (int& v : row)
      if (!(in >> v)) throw Error(ErrorCode::TableInvalid, "table has fewer than Q*Q entries");
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::TableInvalid, "trailing data after table");
  GroupSpec spec = GroupSpec::table(name.rfind("table:", 0) == 0 ? name.substr(6) : name);
  return std::make_shared<FiniteGroup>(std::move(name), t, std::move(spec), order_cap);
}

GroupPtr load_group_table(const std::string& path, int order_cap) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open group table '" + path + "'");
  return parse_group_table(in, "table:" + path, order_cap);
}

std::uint64_t element_mask(std::span<const Element> elems) {
  std::uint64_t m = 0;
  for (Element a : elems) m |= std::uint64_t{1} << a;
  return m;
}

bool generates(const FiniteGroup& g, std::span<const Element> elems) { return g.generates(element_mask(elems)); }

}  // namespace prmix
