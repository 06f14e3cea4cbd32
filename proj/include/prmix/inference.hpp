#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace prmix {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Two-sided Clopper-Pearson interval for k successes in trials.
Interval clopper_pearson(std::uint64_t k, std::uint64_t trials, double confidence);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
};

MeanSE mean_se(std::span<const double> xs);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Pearson test of observed counts against probabilities. Adjacent cells in
// the given order are pooled until each expected count is at least
// `min_expected`.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs,
                               double min_expected = 5.0);

// sup |F_a - F_b| of the empirical CDFs; inputs are copied and sorted.
double ks_distance(std::vector<double> a, std::vector<double> b);
// Dvoretzky-Kiefer-Wolfowitz margin: P(sup|F_n - F| > eps) <= alpha.
double dkw_margin(std::size_t n, double alpha);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

double normal_upper_tail(double z);

}  // namespace prmix
