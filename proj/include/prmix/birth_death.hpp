#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "prmix/chain.hpp"
#include "prmix/inference.hpp"
#include "prmix/statistics.hpp"

namespace prmix {

// Comparison chain on {1..n}: up k(n-k)/(n(n-1)), down k(k-1)/(n(n-1)), hold (n-k)/n.
struct BDChain {
  int n = 0;

  double p_up(int k) const { return static_cast<double>(k) * (n - k) / (static_cast<double>(n) * (n - 1)); }
  double p_down(int k) const { return static_cast<double>(k) * (k - 1) / (static_cast<double>(n) * (n - 1)); }
  double p_hold(int k) const { return static_cast<double>(n - k) / n; }
  // One step from k with a uniform u in [0,1).
  int step(int k, double u) const;
};

// Exact up to n = 200 (rational arithmetic), long double beyond.
inline constexpr int kExactMomentLimit = 200;

struct HittingMoments {
  int n = 0;
  int k_max = 0;  // floor(n/3)
  bool exact = false;
  // Indexed by k for 2 <= k <= k_max: E_{k-1} T_k and Var_{k-1} T_k.
  std::vector<double> e;
  std::vector<double> var;
  double sum_e = 0.0;
  double sum_var = 0.0;
};

struct MomentBounds {
  // E_{k-1}T_k <= n^2/(k(n-2k)) for every 2 <= k <= n/3.
  bool e_literal = true;
  std::vector<int> e_literal_failures;
  // E_k T_{k+1} <= n^2/(k(n-2k)) for 1 <= k < n/3.
  bool e_shifted = true;
  bool sum_e = true;  // sum E <= n ln n + n
  bool v2 = true;     // v_2 <= n^2
  bool v_recursion = true;  // v_{k+1} <= k/(n-k) v_k + 54 n^2/k^2
  bool sum_var = true;      // sum Var <= 110 n^2
  double sum_e_limit = 0.0;
  double sum_var_limit = 0.0;

  bool all_literal() const { return e_literal && sum_e && v2 && v_recursion && sum_var; }
};

struct MomentReport {
  HittingMoments moments;
  MomentBounds bounds;
};

// Throws InvalidArgument for n < 9. Bounds are compared exactly when the
// moments are exact, except the two sums against n ln n + n and 110 n^2.
MomentReport hitting_moments(int n);

// pi(k) = C(n,k)/(2^n - 1) for k = 1..n; index 0 is unused. Throws InvalidArgument past n = 1000.
std::vector<double> bd_stationary(int n);
// Detailed balance and normalisation checked in exact rationals.
bool bd_detailed_balance_exact(int n);

struct HittingSample {
  std::vector<double> times;
  MeanSE mean;
};

// Monte Carlo T_k started from k-1.
HittingSample simulate_hitting(int n, int k, std::size_t replicas, std::uint64_t seed);

struct EscapeReport {
  std::uint64_t hits = 0;
  std::size_t replicas = 0;
  double tail = 0.0;
  Interval ci;  // 99%
  double bound = 0.0;  // horizon * pi(m) / pi(k)
  bool bound_ok = true;
};

// Pr_k(T_m <= horizon) for m < k.
EscapeReport escape_experiment(int n, int k, int m, std::int64_t horizon, std::size_t replicas, std::uint64_t seed);

struct DominationReport {
  std::size_t paths = 0;
  std::int64_t steps = 0;
  std::uint64_t strict_steps = 0;  // N_t < n_non^H(sigma_t)
  std::size_t strict_paths = 0;
  std::size_t equal_paths = 0;     // N_t = n_non^H(sigma_t) throughout
};

// Monotone coupling of the comparison chain with n_non^H of the chain
// started at sigma0. Throws DominationViolated if N_t > n_non^H(sigma_t).
DominationReport domination_check(const Configuration& sigma0, const Subgroup& h, std::int64_t steps,
                                  std::size_t replicas, std::uint64_t seed);

struct BurnInConfig {
  std::vector<double> betas{4.0, 6.0, 8.0};
  std::size_t replicas = 2000;
  std::uint64_t seed = 1;
  // Steps after tau during which exits from S_non(1/6) are counted; 0 disables.
  std::int64_t persistence_steps = 0;
};

struct BurnInTail {
  double beta = 0.0;
  std::int64_t threshold = 0;  // floor(n ln n + beta n)
  std::uint64_t exceed = 0;
  double tail = 0.0;
  Interval ci;  // 99%
  double bound = 0.0;  // 120 Q / beta^2
  bool bound_ok = true;
};

struct BurnInResult {
  int n = 0;
  std::vector<std::int64_t> tau;  // -1 if S_non(1/3) was not reached by the largest threshold
  std::vector<BurnInTail> tails;
  std::uint64_t persistence_violations = 0;
  bool all_ok() const;
};

// tau_{1/3}: first t with sigma_t in S_non(1/3).
BurnInResult burnin_experiment(const Configuration& start, const BurnInConfig& cfg);

void write_moments_csv(std::ostream& out, const MomentReport& rep);
void write_burnin_csv(std::ostream& out, const BurnInResult& res);

}  // namespace prmix
