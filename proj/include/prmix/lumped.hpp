#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prmix/chain.hpp"
#include "prmix/kernels.hpp"
#include "prmix/statistics.hpp"

namespace prmix {

// One-step law of the proportion-matrix chain: (target, number of (i,j,s)
// triples out of 2n(n-1) leading there). Targets are merged and sorted.
std::vector<std::pair<ProportionMatrix, std::int64_t>> matrix_step_counts(const FiniteGroup& g,
                                                                          const ProportionMatrix& m);

struct LumpedOptions {
  std::uint64_t state_budget = 5'000'000;
};

struct LumpedChain {
  GroupPtr group;
  int n = 0;
  std::vector<int> row_sums;
  std::vector<ProportionMatrix> states;  // lexicographic in row-major entries
  std::unordered_map<ProportionMatrix, std::int32_t, ProportionMatrixHash> index;
  CsrMatrix kernel;
  CsrMatrix kernel_t;
  std::vector<double> stationary;

  std::int64_t index_of(const ProportionMatrix& m) const;
  std::size_t size() const { return states.size(); }
};

// Upper bound on the state count before the generation filter.
double lumped_state_bound(const std::vector<int>& row_sums, int q);

LumpedChain build_lumped(const GroupPtr& g, int n, const Configuration& sigma0, const LumpedOptions& opt = {});
LumpedChain build_lumped_rows(const GroupPtr& g, const std::vector<int>& row_sums, const LumpedOptions& opt = {});

// pi(N) proportional to prod_a multinomial(r_a; N_a.), computed with big integers.
std::vector<double> stationary_lumped(const LumpedChain& chain);
// Unnormalised weights as decimal strings and their sum, for exact checks.
std::pair<std::vector<std::string>, std::string> stationary_weights_exact(const LumpedChain& chain);

// d(t) for t = 0..t_max. Accumulated floating error is at most about t * 1e-14.
std::vector<double> tv_curve(const LumpedChain& chain, const ProportionMatrix& start, std::int64_t t_max);
std::vector<double> tv_curve_serial(const LumpedChain& chain, const ProportionMatrix& start, std::int64_t t_max);
inline double tv_error_bound(std::int64_t t) { return static_cast<double>(t) * 1e-14; }

// First t with d(t) <= eps for each eps (any order); throws NotConverged past t_cap.
std::vector<std::int64_t> mixing_times(const LumpedChain& chain, const ProportionMatrix& start,
                                       const std::vector<double>& eps, std::int64_t t_cap = 10'000'000);
std::int64_t mixing_time(const LumpedChain& chain, const ProportionMatrix& start, double eps,
                         std::int64_t t_cap = 10'000'000);

// Exact TV curve of the full chain on generating tuples, by distribution
// iteration over every tuple. Throws SpaceTooLarge when Q^n > 2e6.
std::vector<double> brute_force_tv(const GroupPtr& g, int n, const Configuration& sigma0, std::int64_t t_max);

struct ConnectivityReport {
  std::size_t states = 0;
  std::size_t reachable_from_start = 0;
  std::size_t reaching_start = 0;
  bool irreducible = false;
};

ConnectivityReport connectivity_report(const LumpedChain& chain, const ProportionMatrix& start);

struct EigenCheck {
  double stationary_residual = 0.0;  // max |pi K - pi|
  double eigen_vs_formula = 0.0;     // max |pi_eigen - pi|
  double second_modulus = 0.0;       // second-largest |eigenvalue|
};

// Dense cross-check; only for small chains.
EigenCheck eigen_cross_check(const LumpedChain& chain);

double kernel_row_sum_error(const LumpedChain& chain);
double stationary_residual(const LumpedChain& chain);

void write_curve_csv(std::ostream& out, const LumpedChain& chain, const std::vector<double>& curve,
                     std::int64_t t_offset = 0);

}  // namespace prmix
