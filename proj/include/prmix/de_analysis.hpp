#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "prmix/chain.hpp"
#include "prmix/inference.hpp"
#include "prmix/repr.hpp"
#include "prmix/rng.hpp"
#include "prmix/statistics.hpp"

namespace prmix {

// theta_n(x) = |x| + exp(-sqrt(n)|x|)/sqrt(n) - 1/sqrt(n)
double theta_eval(std::span<const double> x, double n);
double theta_eval_norm(double norm, double n);
// (1 - exp(-sqrt(n)|x|)) x/|x|, and 0 at x = 0.
std::vector<double> theta_grad(std::span<const double> x, double n);
// theta(x) + <h, grad theta(x)> + (sqrt(n)/2)|h|^2 - theta(x + h); nonnegative when the bound holds.
double theta_second_order_slack(std::span<const double> x, std::span<const double> h, double n);

// Noise generator: given z(t), t and eps*phi(t+1), returns M(t+1).
using NoiseFn = std::function<double(double z, std::int64_t t, double eps_phi, Rng& rng)>;

struct GenDEInstance {
  double eps = 0.01;
  std::function<double(double)> phi = [](double) { return 1.0; };
  double D = 1.0;
  double z0 = 1.0;
  NoiseFn noise;
};

NoiseFn zero_noise();
// +-min(D eps, (1 - eps phi) z) with a fair sign: mean zero, keeps z >= 0.
NoiseFn symmetric_noise(double D, double eps);

struct GenDEResult {
  std::int64_t t = 0;
  double lambda = 0.0;
  double threshold = 0.0;  // lambda sqrt(eps) + exp(-eps int_0^t phi) z0
  std::uint64_t exceed = 0;
  std::size_t replicas = 0;
  double tail = 0.0;
  Interval ci;  // 99%
  double Phi_t = 0.0;        // eps^-1 sum log(1/(1 - eps phi(k)))
  double sum_phi = 0.0;      // sum_{k=1}^t phi(k)
  double integral_phi = 0.0; // int_0^t phi
  bool phi_chain_ok = true;  // Phi >= sum >= integral
  // Supermartingale mean-increment test of Z_t = e^{eps Phi(t)} (z(t) - D sqrt(eps)/phi(0)).
  std::size_t checkpoints = 0;
  std::size_t supermartingale_rejections = 0;
  double max_increment_z = 0.0;
  std::uint64_t lower_clamps = 0;
  std::vector<double> final_z;
};

// z(t+1) = min(1, z(t) - eps phi(t+1) z(t) + M(t+1)). Throws NoiseBoundViolated
// when |M| > D eps. `alpha` is the per-checkpoint level of the one-sided test.
GenDEResult gen_de_harness(const GenDEInstance& inst, std::int64_t t, double lambda, std::size_t replicas,
                           std::uint64_t seed, double alpha = 1e-4, std::size_t checkpoints = 20);

// Count vectors sigma_0..sigma_T along one trajectory.
std::vector<std::vector<int>> record_counts(Configuration sigma, std::int64_t steps, Rng& rng);
// Proportion matrices relative to sigma_star along one trajectory from sigma.
std::vector<ProportionMatrix> record_matrices(const Configuration& sigma_star, Configuration sigma, std::int64_t steps,
                                              Rng& rng);

struct ResidualSeries {
  // raw[t] = x(t+1) - x(t) - x(t) X(t); exact[t] subtracts the exact conditional drift.
  std::vector<CMatrix> raw;
  std::vector<CMatrix> exact;
  std::vector<double> hs_raw;
  double two_way_diff = 0.0;  // max |definition - rearranged form|
  double bound = 0.0;
  std::uint64_t bound_violations = 0;
};

// x_rho(t) from counts; bound 2 Q sqrt(d)/n.
ResidualSeries fourier_drift_residual(const std::vector<std::vector<int>>& counts, const Irrep& rho);
// y_{a,rho}(t) for row a; bound 4 Q^2 sqrt(d)/n. Throws EmptyRow.
ResidualSeries row_drift_residual(const std::vector<ProportionMatrix>& traj, int a, const Irrep& rho);

// Exact E[x(t+1) - x(t) | state] and E[y_a(t+1) - y_a(t) | state].
CMatrix exact_fourier_drift(std::span<const int> counts, const Irrep& rho);
CMatrix exact_row_drift(const ProportionMatrix& m, int a, const Irrep& rho);

// max over entries (real and imaginary parts) of |mean| / SE.
double residual_mean_z(const std::vector<CMatrix>& residuals);

struct WSeries {
  std::vector<double> z;
  std::vector<double> w;        // driven by the raw-form noise
  std::vector<double> w_exact;  // driven by the exact martingale increments
  std::uint64_t violations = 0; // t with z(t) < w(t)
};

// z(t) = (1/d) Re Tr x_rho(t); w(0) = 1/3, w(t+1) = (1 - 1/n) w(t) + M(t+1).
// Throws PreconditionViolated unless n_non^{id}(sigma_0) <= n/3.
WSeries lower_comparison_w(const std::vector<std::vector<int>>& counts, const Irrep& rho);

struct WExperiment {
  std::uint64_t violations = 0;
  MeanSE w_T;        // raw-form w(T)
  MeanSE w_exact_T;  // exact-martingale w(T)
  double expected = 0.0;  // (1 - 1/n)^T / 3
};

WExperiment lower_w_experiment(const Configuration& sigma0, const Irrep& rho, std::int64_t steps, std::size_t replicas,
                               std::uint64_t seed);

}  // namespace prmix
