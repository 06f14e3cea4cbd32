#include "prmix/statistics.hpp"

#include <boost/container_hash/hash.hpp>
#include <cmath>
#include <limits>

#include "prmix/error.hpp"

namespace prmix {

std::vector<int> counts(const Configuration& sigma) {
  std::vector<int> c(static_cast<std::size_t>(sigma.group().order()), 0);
  for (Element v : sigma.sites()) ++c[v];
  return c;
}

std::vector<double> proportion_vector(const Configuration& sigma) {
  std::vector<int> c = counts(sigma);
  std::vector<double> v(c.size());
  for (std::size_t a = 0; a < c.size(); ++a) v[a] = static_cast<double>(c[a]) / sigma.n();
  return v;
}

ProportionMatrix::ProportionMatrix(int q, std::vector<int> entries) : q_(q), entries_(std::move(entries)) {
  if (static_cast<int>(entries_.size()) != q * q) throw Error(ErrorCode::LengthMismatch, "matrix needs Q*Q entries");
  for (int v : entries_) {
    if (v < 0) throw Error(ErrorCode::InvalidArgument, "negative matrix entry");
    n_ += v;
  }
}

void ProportionMatrix::move(int a, int b, int c) {
  --entries_[static_cast<std::size_t>(a) * q_ + b];
  ++entries_[static_cast<std::size_t>(a) * q_ + c];
}

std::vector<int> ProportionMatrix::row_sums() const {
  std::vector<int> r(static_cast<std::size_t>(q_), 0);
  for (int a = 0; a < q_; ++a)
    for (int b = 0; b < q_; ++b) r[a] += (*this)(a, b);
  return r;
}

std::vector<int> ProportionMatrix::col_sums() const {
  std::vector<int> c(static_cast<std::size_t>(q_), 0);
  for (int a = 0; a < q_; ++a)
    for (int b = 0; b < q_; ++b) c[b] += (*this)(a, b);
  return c;
}

std::vector<double> ProportionMatrix::row_weights(int a) const {
  int total = 0;
  for (int b = 0; b < q_; ++b) total += (*this)(a, b);
  if (total == 0) throw Error(ErrorCode::EmptyRow, "row " + std::to_string(a) + " is empty");
  std::vector<double> w(static_cast<std::size_t>(q_));
  for (int b = 0; b < q_; ++b) w[b] = static_cast<double>((*this)(a, b)) / total;
  return w;
}

std::uint64_t ProportionMatrix::column_support() const {
  std::uint64_t m = 0;
  for (int a = 0; a < q_; ++a)
    for (int b = 0; b < q_; ++b)
      if ((*this)(a, b) > 0) m |= std::uint64_t{1} << b;
  return m;
}

std::size_t ProportionMatrixHash::operator()(const ProportionMatrix& m) const {
  return boost::hash_range(m.entries().begin(), m.entries().end());
}

ProportionMatrix proportion_matrix(const Configuration& sigma0, const Configuration& sigma) {
  if (sigma0.n() != sigma.n() || sigma0.group().order() != sigma.group().order())
    throw Error(ErrorCode::LengthMismatch, "configurations differ in length or group");
  const int q = sigma.group().order();
  std::vector<int> e(static_cast<std::size_t>(q) * q, 0);
  for (int i = 0; i < sigma.n(); ++i) ++e[static_cast<std::size_t>(sigma0[i]) * q + sigma[i]];
  return ProportionMatrix(q, std::move(e));
}

int n_non(std::span<const int> counts, const Subgroup& h) {
  int out = 0;
  for (std::size_t a = 0; a < counts.size(); ++a)
    if (!h.contains(static_cast<Element>(a))) out += counts[a];
  return out;
}

int n_non(const Configuration& sigma, const Subgroup& h) { return n_non(counts(sigma), h); }

int min_n_non(const FiniteGroup& g, std::span<const int> counts) {
  int best = std::numeric_limits<int>::max();
  for (const auto& h : g.proper_subgroups()) best = std::min(best, n_non(counts, h));
  return best;
}

bool in_S_non_counts(const FiniteGroup& g, std::span<const int> counts, Ratio c) {
  long long n = 0;
  for (int v : counts) n += v;
  for (const auto& h : g.proper_subgroups())
    if (static_cast<__int128>(n_non(counts, h)) * c.den < static_cast<__int128>(c.num) * n) return false;
  return true;
}

bool in_S_non(const Configuration& sigma, Ratio c) { return in_S_non_counts(sigma.group(), counts(sigma), c); }

bool in_S_non(const Configuration& sigma, double c) {
  std::vector<int> cnt = counts(sigma);
  for (const auto& h : sigma.group().proper_subgroups())
    if (static_cast<long double>(n_non(cnt, h)) < static_cast<long double>(c) * sigma.n()) return false;
  return true;
}

std::int64_t scaled_sq_distance(std::span<const int> counts, int q) {
  std::int64_t n = 0;
  for (int v : counts) n += v;
  std::int64_t s = 0;
  for (int v : counts) {
    std::int64_t d = static_cast<std::int64_t>(q) * v - n;
    s += d * d;
  }
  return s;
}

bool in_S_star_counts(std::span<const int> counts, double delta) {
  const int q = static_cast<int>(counts.size());
  long long n = 0;
  for (int v : counts) n += v;
  long double rhs = static_cast<long double>(delta) * delta * n * n * q * q;
  return static_cast<long double>(scaled_sq_distance(counts, q)) <= rhs;
}

bool in_S_star(const Configuration& sigma, double delta) { return in_S_star_counts(counts(sigma), delta); }

bool in_S_star_sq(std::span<const int> counts, Ratio delta_sq) {
  const int q = static_cast<int>(counts.size());
  __int128 n = 0;
  for (int v : counts) n += v;
  return static_cast<__int128>(scaled_sq_distance(counts, q)) * delta_sq.den <= static_cast<__int128>(delta_sq.num) * n * n * q * q;
}

namespace {

std::vector<int> row_of(const ProportionMatrix& m, int a) {
  std::vector<int> r(static_cast<std::size_t>(m.q()));
  for (int b = 0; b < m.q(); ++b) r[b] = m(a, b);
  return r;
}

}  // namespace

bool in_S_star_matrix(const ProportionMatrix& m, double r) {
  for (int a = 0; a < m.q(); ++a) {
    std::vector<int> row = row_of(m, a);
    long long s = 0;
    for (int v : row) s += v;
    if (s == 0) throw Error(ErrorCode::EmptyRow, "reference has no site with value " + std::to_string(a));
    if (!in_S_star_counts(row, r)) return false;
  }
  return true;
}

bool in_S_star_matrix_sq(const ProportionMatrix& m, Ratio r_sq) {
  for (int a = 0; a < m.q(); ++a) {
    std::vector<int> row = row_of(m, a);
    long long s = 0;
    for (int v : row) s += v;
    if (s == 0) throw Error(ErrorCode::EmptyRow, "reference has no site with value " + std::to_string(a));
    if (!in_S_star_sq(row, r_sq)) return false;
  }
  return true;
}

bool in_S_star_matrix(const Configuration& sigma0, const Configuration& sigma, double r) {
  return in_S_star_matrix(proportion_matrix(sigma0, sigma), r);
}

std::int64_t half_l1(const ProportionMatrix& m, const ProportionMatrix& mt) {
  if (m.q() != mt.q() || m.row_sums() != mt.row_sums()) throw Error(ErrorCode::RowSumMismatch, "row sums differ");
  std::int64_t s = 0;
  for (std::size_t k = 0; k < m.entries().size(); ++k) s += std::abs(m.entries()[k] - mt.entries()[k]);
  return s / 2;
}

}  // namespace prmix
