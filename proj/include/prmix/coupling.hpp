#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prmix/chain.hpp"
#include "prmix/inference.hpp"
#include "prmix/rng.hpp"
#include "prmix/statistics.hpp"

namespace prmix {

// p = (1 - delta) n / Q^2 sites of each cell are held in common ("P" sites).
struct CouplingParams {
  int n = 0;
  int q = 1;
  std::int64_t p = 0;

  double delta() const { return 1.0 - static_cast<double>(p) * q * q / n; }
  // Throws IntegralityViolated unless (1 - delta) n / Q^2 is an integer.
  static CouplingParams from_delta(int n, int q, double delta);
  static CouplingParams from_floor(int n, int q, std::int64_t p);
};

// Largest delta' in (2/(5Q^2), 3/(7Q^2)) with integral (1 - delta') n / Q^2.
// Throws NoValidDelta.
CouplingParams coalescence_params(int n, int q);

bool in_M_delta(const ProportionMatrix& m, const CouplingParams& par);

struct CoupledState {
  ProportionMatrix first;
  ProportionMatrix second;
  bool coalesced = false;
};

enum class CouplingCase { Identical, Independent, I, IExceptionalDown, IExceptionalUp, II, III, IV };
inline constexpr int kCouplingCases = 8;
std::string case_name(CouplingCase c);

// One site class of the accounting partition: `count` sites of reference row
// `row` with value v1 in the first chain and v2 in the second.
struct SiteClass {
  enum Kind { P, Q, R };
  Kind kind = P;
  int row = 0;
  Element v1 = 0;
  Element v2 = 0;
  std::int64_t count = 0;
};

struct ClassTable {
  std::vector<SiteClass> classes;
  // Exceptional data; valid when has_exceptional.
  bool has_exceptional = false;
  int a_star = 0;
  Element b_star = 0;
  Element b_star_prime = 0;
  // Exceptional pair counts for each partner class index (0 if not in the set).
  std::vector<std::int64_t> down_pairs;  // first class P(a*, b*)
  std::vector<std::int64_t> up_pairs;    // first class P(a*, b'*)
  int down_class = -1;
  int up_class = -1;
};

ClassTable build_class_table(const FiniteGroup& g, const ProportionMatrix& m, const ProportionMatrix& mt,
                             const CouplingParams& par);

struct CoupledStepResult {
  CouplingCase kind = CouplingCase::Identical;
  int delta_d = 0;
};

CoupledStepResult coupled_step(const FiniteGroup& g, CoupledState& st, const CouplingParams& par, Rng& rng);

// One move of the single matrix chain.
void matrix_random_step(const FiniteGroup& g, ProportionMatrix& m, Rng& rng);

struct JointOutcome {
  CouplingCase kind = CouplingCase::I;
  ProportionMatrix first;
  ProportionMatrix second;
  int delta_d = 0;
  std::int64_t count = 0;  // out of 2n(n-1)
};

// Exact joint one-step law inside M_delta with D > 0. Throws OutsideMDelta, DZero.
std::vector<JointOutcome> joint_law(const FiniteGroup& g, const CoupledState& st, const CouplingParams& par);

struct CaseBreakdown {
  std::int64_t total = 0;  // 2n(n-1)
  std::array<std::int64_t, kCouplingCases> count{};
  std::array<std::map<int, std::int64_t>, kCouplingCases> delta_d_law{};
  std::int64_t drift_numerator = 0;  // sum count * dD
  std::int64_t nonzero = 0;          // triples with dD != 0

  double probability(CouplingCase c) const { return static_cast<double>(count[static_cast<int>(c)]) / total; }
  double expected_delta_d() const { return static_cast<double>(drift_numerator) / total; }
  double prob_nonzero() const { return static_cast<double>(nonzero) / total; }
  bool drift_ok() const { return drift_numerator <= 0; }
  // Pr(dD != 0) >= (1 - delta)^2 / (4 Q^3), as the integer inequality 2 n nonzero >= p^2 Q (n - 1).
  bool fluctuation_ok(const CouplingParams& par) const;
};

CaseBreakdown case_breakdown(const FiniteGroup& g, const CoupledState& st, const CouplingParams& par);

struct CoalescenceConfig {
  double R = 2.0;
  double beta = 400.0;
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  std::uint64_t start_budget = 100'000;
};

struct CoalescenceRecord {
  std::size_t replica = 0;
  std::int64_t tau = -1;  // -1 when not coalesced by the horizon
  std::int64_t horizon = 0;
  bool coalesced = false;
  std::int64_t d0 = 0;
};

struct CoalescenceResult {
  CouplingParams params;
  std::vector<CoalescenceRecord> records;
  double tail = 0.0;  // Pr(tau > beta n)
  Interval ci;        // 99% Clopper-Pearson
  double bound = 0.0; // 32 Q^2 R / sqrt(beta)
  bool bound_ok = true;
  double d0_limit = 0.0;  // sqrt(Q) R sqrt(n)
  std::int64_t d0_max = 0;
  std::size_t d0_violations = 0;
};

// sigma_star is the shared reference; both starts are stationary samples
// whose matrices lie in S_*(sigma_star, R/sqrt(n)).
CoalescenceResult coalescence_experiment(const GroupPtr& g, const Configuration& sigma_star, const CoalescenceConfig& cfg);

}  // namespace prmix
