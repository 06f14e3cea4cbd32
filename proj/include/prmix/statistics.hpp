#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "prmix/chain.hpp"
#include "prmix/group.hpp"

namespace prmix {

// Exact rational p/q, q > 0.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

std::vector<int> counts(const Configuration& sigma);
std::vector<double> proportion_vector(const Configuration& sigma);

// Counts n_{a,b} of sites with sigma0(i) = a and sigma(i) = b, row-major Q x Q.
class ProportionMatrix {
 public:
  ProportionMatrix() = default;
  ProportionMatrix(int q, std::vector<int> entries);

  int q() const { return q_; }
  int n() const { return n_; }
  int operator()(int a, int b) const { return entries_[static_cast<std::size_t>(a) * q_ + b]; }
  // Moves one site of row a from column b to column c.
  void move(int a, int b, int c);
  const std::vector<int>& entries() const { return entries_; }
  std::vector<int> row_sums() const;
  std::vector<int> col_sums() const;
  std::vector<double> row_weights(int a) const;
  std::uint64_t column_support() const;

  friend bool operator==(const ProportionMatrix& x, const ProportionMatrix& y) { return x.entries_ == y.entries_; }
  friend bool operator<(const ProportionMatrix& x, const ProportionMatrix& y) { return x.entries_ < y.entries_; }

 private:
  int q_ = 0;
  int n_ = 0;
  std::vector<int> entries_;
};

struct ProportionMatrixHash {
  std::size_t operator()(const ProportionMatrix& m) const;
};

ProportionMatrix proportion_matrix(const Configuration& sigma0, const Configuration& sigma);

// |{i : sigma(i) not in H}|
int n_non(std::span<const int> counts, const Subgroup& h);
int n_non(const Configuration& sigma, const Subgroup& h);
// min over proper subgroups H of n_non^H.
int min_n_non(const FiniteGroup& g, std::span<const int> counts);

// n_non^H >= c n for every proper H; the Ratio overload is exact.
bool in_S_non(const Configuration& sigma, Ratio c);
bool in_S_non(const Configuration& sigma, double c);
bool in_S_non_counts(const FiniteGroup& g, std::span<const int> counts, Ratio c);

// Squared l2 distance of the proportion vector to uniform, times n^2 Q^2.
std::int64_t scaled_sq_distance(std::span<const int> counts, int q);

// || n_a/n - 1/Q ||_2 <= delta; exact for squared thresholds given as a Ratio.
bool in_S_star(const Configuration& sigma, double delta);
bool in_S_star_counts(std::span<const int> counts, double delta);
bool in_S_star_sq(std::span<const int> counts, Ratio delta_sq);
// Every row of the matrix within r of uniform. Throws EmptyRow.
bool in_S_star_matrix(const ProportionMatrix& m, double r);
bool in_S_star_matrix_sq(const ProportionMatrix& m, Ratio r_sq);
bool in_S_star_matrix(const Configuration& sigma0, const Configuration& sigma, double r);

// (1/2) sum |m_ab - mt_ab|; throws RowSumMismatch.
std::int64_t half_l1(const ProportionMatrix& m, const ProportionMatrix& mt);

// Counts maintained in O(1) per step.
class CountTracker {
 public:
  explicit CountTracker(const Configuration& sigma) : counts_(prmix::counts(sigma)) {}
  void update(Element before, Element after) {
    --counts_[before];
    ++counts_[after];
  }
  const std::vector<int>& counts() const { return counts_; }

 private:
  std::vector<int> counts_;
};

}  // namespace prmix
