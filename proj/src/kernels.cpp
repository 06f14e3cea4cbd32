#include "prmix/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace prmix {

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(static_cast<std::size_t>(cols) + 1, 0);
  for (auto c : col) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
  for (std::int64_t r = 0; r < cols; ++r) t.row_ptr[r + 1] += t.row_ptr[r];
  t.col.resize(col.size());
  t.val.resize(val.size());
  std::vector<std::int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      auto dst = next[col[k]]++;
      t.col[dst] = static_cast<std::int32_t>(r);
      t.val[dst] = val[k];
    }
  return t;
}

void step_distribution(const CsrMatrix& kt, std::span<const double> mu, std::span<double> out) {
  const std::int64_t rows = kt.rows;
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t k = kt.row_ptr[r]; k < kt.row_ptr[r + 1]; ++k) s += kt.val[k] * mu[kt.col[k]];
    out[r] = s;
  }
}

void step_distribution_serial(const CsrMatrix& k, std::span<const double> mu, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::int64_t r = 0; r < k.rows; ++r) {
    const double m = mu[r];
    if (m == 0.0) continue;
    for (std::int64_t e = k.row_ptr[r]; e < k.row_ptr[r + 1]; ++e) out[k.col[e]] += m * k.val[e];
  }
}

namespace {
constexpr std::int64_t kBlock = 4096;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  const std::int64_t n = static_cast<std::int64_t>(p.size());
  const std::int64_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    const std::int64_t end = std::min(n, (b + 1) * kBlock);
    for (std::int64_t i = b * kBlock; i < end; ++i) s += std::abs(p[i] - q[i]);
    partial[b] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return 0.5 * total;
}

double tv_distance_serial(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return 0.5 * total;
}

}  // namespace prmix
