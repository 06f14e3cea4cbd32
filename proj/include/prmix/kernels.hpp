#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace prmix {

struct CsrMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> col;
  std::vector<double> val;

  std::int64_t nnz() const { return static_cast<std::int64_t>(val.size()); }
  CsrMatrix transpose() const;
};

// out = mu K, evaluated row by row of K^T so each output entry is a fixed-order
// sum; OpenMP over rows.
void step_distribution(const CsrMatrix& kt, std::span<const double> mu, std::span<double> out);
// Serial reference: scatter mu(i) K(i, .) into out.
void step_distribution_serial(const CsrMatrix& k, std::span<const double> mu, std::span<double> out);

// (1/2) sum |p - q|, summed in fixed blocks so the value does not depend on the thread count.
double tv_distance(std::span<const double> p, std::span<const double> q);
double tv_distance_serial(std::span<const double> p, std::span<const double> q);

}  // namespace prmix
