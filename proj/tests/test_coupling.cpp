#include <gtest/gtest.h>

#include <map>

#include "prmix/coupling.hpp"
#include "prmix/error.hpp"
#include "prmix/inference.hpp"
#include "prmix/lumped.hpp"

using namespace prmix;

namespace {

GroupPtr make(const char* spec) { return build_group(parse_group_spec(spec)); }

using Law = std::map<std::vector<int>, std::int64_t>;

// One-step law of the matrix chain from a site-level expansion of m.
Law site_level_law(const FiniteGroup& g, const ProportionMatrix& m) {
  const int q = m.q();
  std::vector<std::pair<int, Element>> sites;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int k = 0; k < m(a, b); ++k) sites.emplace_back(a, static_cast<Element>(b));
  const int n = static_cast<int>(sites.size());
  Law law;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int s : {1, -1}) {
        const Element c = s == 1 ? sites[j].second : g.inv(sites[j].second);
        ProportionMatrix next = m;
        next.move(sites[i].first, sites[i].second, g.mul(sites[i].second, c));
        ++law[next.entries()];
      }
    }
  return law;
}

std::vector<int> random_row_sums(int q, int n, std::int64_t p, Rng& rng) {
  std::vector<int> rows(q, static_cast<int>(q * p));
  for (int k = 0; k < n - q * q * p; ++k) ++rows[rng.below(q)];
  return rows;
}

ProportionMatrix random_cells(const std::vector<int>& rows, std::int64_t p, Rng& rng) {
  const int q = static_cast<int>(rows.size());
  std::vector<int> e(q * q, static_cast<int>(p));
  for (int a = 0; a < q; ++a)
    for (int k = 0; k < rows[a] - q * p; ++k) ++e[a * q + rng.below(q)];
  return ProportionMatrix(q, e);
}

CoupledState random_pair(int q, const CouplingParams& par, Rng& rng) {
  const auto rows = random_row_sums(q, par.n, par.p, rng);
  while (true) {
    CoupledState st{random_cells(rows, par.p, rng), random_cells(rows, par.p, rng), false};
    if (!(st.first == st.second)) return st;
  }
}

struct Instance {
  const char* group;
  int n;
  std::int64_t p;
};

const Instance kInstances[] = {{"Z2", 32, 7}, {"Z3", 162, 17}};

}  // namespace

TEST(Coupling, Parameters) {
  EXPECT_EQ(coalescence_params(700, 2).p, 157);
  const CouplingParams par = coalescence_params(700, 2);
  EXPECT_GT(par.delta(), 2.0 / 20.0);
  EXPECT_LT(par.delta(), 3.0 / 28.0);
  EXPECT_EQ(CouplingParams::from_delta(32, 2, 1.0 / 8.0).p, 7);
  EXPECT_EQ(CouplingParams::from_delta(162, 3, 1.0 / 18.0).p, 17);
  try {
    CouplingParams::from_delta(16, 2, 1.0 / 8.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IntegralityViolated);
  }
  try {
    coalescence_params(10, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoValidDelta);
  }
}

TEST(Coupling, HandBuiltCaseTable) {
  auto g = make("Z2");
  const CouplingParams par = CouplingParams::from_floor(32, 2, 7);
  const CoupledState st{ProportionMatrix(2, {9, 7, 7, 9}), ProportionMatrix(2, {8, 8, 8, 8}), false};
  ASSERT_EQ(half_l1(st.first, st.second), 2);
  const CaseBreakdown cb = case_breakdown(*g, st, par);
  EXPECT_EQ(cb.total, 1984);
  auto count = [&](CouplingCase c) { return cb.count[static_cast<int>(c)]; };
  EXPECT_EQ(count(CouplingCase::I), 1740 - 196);
  EXPECT_EQ(count(CouplingCase::IExceptionalDown), 98);
  EXPECT_EQ(count(CouplingCase::IExceptionalUp), 98);
  EXPECT_EQ(count(CouplingCase::III), 112);
  EXPECT_EQ(count(CouplingCase::IV), 112);
  EXPECT_EQ(count(CouplingCase::II), 20);
  const auto& iv = cb.delta_d_law[static_cast<int>(CouplingCase::IV)];
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_EQ(iv.begin()->first, -1);
  EXPECT_EQ(cb.delta_d_law[static_cast<int>(CouplingCase::IExceptionalDown)].begin()->first, -1);
  EXPECT_EQ(cb.delta_d_law[static_cast<int>(CouplingCase::IExceptionalUp)].begin()->first, 1);
  for (const auto& [dd, c] : cb.delta_d_law[static_cast<int>(CouplingCase::I)]) EXPECT_EQ(dd, 0);
  EXPECT_TRUE(cb.drift_ok());
  EXPECT_TRUE(cb.fluctuation_ok(par));
}

TEST(Coupling, ExceptionalProbabilityIsExact) {
  for (const auto& inst : kInstances) {
    auto g = make(inst.group);
    const int q = g->order();
    const CouplingParams par = CouplingParams::from_floor(inst.n, q, inst.p);
    Rng rng(41);
    for (int k = 0; k < 10; ++k) {
      const CaseBreakdown cb = case_breakdown(*g, random_pair(q, par, rng), par);
      const std::int64_t down = cb.count[static_cast<int>(CouplingCase::IExceptionalDown)];
      const std::int64_t up = cb.count[static_cast<int>(CouplingCase::IExceptionalUp)];
      EXPECT_EQ(down, up);
      // Both directions together: Q p^2 of n(n-1), less the trimmed p when sizes differ.
      EXPECT_LE(down + up, 2 * q * par.p * par.p);
      EXPECT_GE(down + up, 2 * (q * par.p * par.p - par.p));
    }
  }
}

TEST(Coupling, JointLawMarginalsMatchSiteLevelOracle) {
  for (const auto& inst : kInstances) {
    auto g = make(inst.group);
    const int q = g->order();
    const CouplingParams par = CouplingParams::from_floor(inst.n, q, inst.p);
    Rng rng(43);
    for (int k = 0; k < 8; ++k) {
      const CoupledState st = random_pair(q, par, rng);
      Law first, second;
      const std::int64_t d0 = half_l1(st.first, st.second);
      for (const auto& o : joint_law(*g, st, par)) {
        first[o.first.entries()] += o.count;
        second[o.second.entries()] += o.count;
        EXPECT_EQ(o.delta_d, half_l1(o.first, o.second) - d0);
        EXPECT_LE(o.delta_d, 1);
      }
      EXPECT_EQ(first, site_level_law(*g, st.first)) << inst.group;
      EXPECT_EQ(second, site_level_law(*g, st.second)) << inst.group;
      Law lib;
      for (const auto& [m, c] : matrix_step_counts(*g, st.first)) lib[m.entries()] += c;
      EXPECT_EQ(lib, first);
    }
  }
}

TEST(Coupling, DriftAndFluctuationOnRandomStates) {
  for (const auto& inst : kInstances) {
    auto g = make(inst.group);
    const int q = g->order();
    const CouplingParams par = CouplingParams::from_floor(inst.n, q, inst.p);
    Rng rng(47);
    for (int k = 0; k < 20; ++k) {
      const CaseBreakdown cb = case_breakdown(*g, random_pair(q, par, rng), par);
      EXPECT_TRUE(cb.drift_ok()) << inst.group;
      EXPECT_TRUE(cb.fluctuation_ok(par)) << inst.group;
      for (auto c : {CouplingCase::I, CouplingCase::III, CouplingCase::IV})
        for (const auto& [dd, cnt] : cb.delta_d_law[static_cast<int>(c)]) EXPECT_LE(std::abs(dd), 1);
      for (const auto& [dd, cnt] : cb.delta_d_law[static_cast<int>(CouplingCase::II)]) EXPECT_LE(dd, 1);
      for (const auto& [dd, cnt] : cb.delta_d_law[static_cast<int>(CouplingCase::IV)]) EXPECT_EQ(dd, -1);
    }
  }
}

TEST(Coupling, SamplerMatchesJointLaw) {
  auto g = make("Z2");
  const CouplingParams par = CouplingParams::from_floor(32, 2, 7);
  Rng rng(53);
  for (int k = 0; k < 3; ++k) {
    const CoupledState st = random_pair(2, par, rng);
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> law;
    for (const auto& o : joint_law(*g, st, par)) law[{o.first.entries(), o.second.entries()}] += o.count / 1984.0;
    std::map<std::pair<std::vector<int>, std::vector<int>>, std::uint64_t> seen;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
      CoupledState c = st;
      coupled_step(*g, c, par, rng);
      ++seen[{c.first.entries(), c.second.entries()}];
    }
    std::vector<std::uint64_t> obs;
    std::vector<double> probs;
    for (const auto& [key, pr] : law) {
      obs.push_back(seen[key]);
      probs.push_back(pr);
    }
    std::uint64_t total = 0;
    for (auto o : obs) total += o;
    EXPECT_EQ(total, static_cast<std::uint64_t>(draws));
    EXPECT_GT(chi_square_gof(obs, probs).p_value, 1e-4);
  }
}

TEST(Coupling, SamplerMarginalsChiSquare) {
  for (const auto& inst : kInstances) {
    auto g = make(inst.group);
    const int q = g->order();
    const CouplingParams par = CouplingParams::from_floor(inst.n, q, inst.p);
    Rng rng(59);
    const CoupledState st = random_pair(q, par, rng);
    for (int side = 0; side < 2; ++side) {
      const Law oracle = site_level_law(*g, side == 0 ? st.first : st.second);
      std::map<std::vector<int>, std::uint64_t> seen;
      const int draws = 100000;
      for (int t = 0; t < draws; ++t) {
        CoupledState c = st;
        coupled_step(*g, c, par, rng);
        ++seen[(side == 0 ? c.first : c.second).entries()];
      }
      std::vector<std::uint64_t> obs;
      std::vector<double> probs;
      const double total = 2.0 * inst.n * (inst.n - 1);
      for (const auto& [m, cnt] : oracle) {
        obs.push_back(seen[m]);
        probs.push_back(cnt / total);
      }
      EXPECT_GT(chi_square_gof(obs, probs).p_value, 1e-4) << inst.group << ' ' << side;
    }
  }
}

TEST(Coupling, IdenticalAndCoalescedStayTogether) {
  auto g = make("Z2");
  const CouplingParams par = CouplingParams::from_floor(32, 2, 7);
  Rng rng(61);
  CoupledState same{ProportionMatrix(2, {8, 8, 8, 8}), ProportionMatrix(2, {8, 8, 8, 8}), false};
  for (int t = 0; t < 1000; ++t) {
    const auto r = coupled_step(*g, same, par, rng);
    ASSERT_EQ(r.kind, CouplingCase::Identical);
    ASSERT_EQ(same.first, same.second);
  }
  CoupledState st = random_pair(2, par, rng);
  std::int64_t t = 0;
  while (!st.coalesced && t < 2'000'000) {
    coupled_step(*g, st, par, rng);
    ++t;
  }
  ASSERT_TRUE(st.coalesced);
  for (int k = 0; k < 5000; ++k) {
    coupled_step(*g, st, par, rng);
    ASSERT_EQ(st.first, st.second);
  }
}

TEST(Coupling, JointLawPreconditions) {
  auto g = make("Z2");
  const CouplingParams par = CouplingParams::from_floor(32, 2, 7);
  CoupledState same{ProportionMatrix(2, {8, 8, 8, 8}), ProportionMatrix(2, {8, 8, 8, 8}), false};
  try {
    joint_law(*g, same, par);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DZero);
  }
  CoupledState outside{ProportionMatrix(2, {14, 2, 8, 8}), ProportionMatrix(2, {8, 8, 8, 8}), false};
  EXPECT_FALSE(in_M_delta(outside.first, par));
  try {
    joint_law(*g, outside, par);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutsideMDelta);
  }
  Rng rng(3);
  EXPECT_EQ(coupled_step(*g, outside, par, rng).kind, CouplingCase::Independent);
}

TEST(Coupling, SmallCoalescenceRun) {
  auto g = make("Z2");
  Rng rng(67);
  Configuration ref;
  for (int k = 0; k < 1000; ++k) {
    ref = sample_stationary(g, 700, rng).config;
    if (in_S_star(ref, 1.0 / 8.0)) break;
  }
  CoalescenceConfig cfg;
  cfg.replicas = 20;
  cfg.seed = 5;
  const CoalescenceResult res = coalescence_experiment(g, ref, cfg);
  EXPECT_EQ(res.params.p, 157);
  EXPECT_EQ(res.records.size(), 20u);
  EXPECT_EQ(res.d0_violations, 0u);
  EXPECT_LE(static_cast<double>(res.d0_max), res.d0_limit);
  EXPECT_TRUE(res.bound_ok);
  for (const auto& r : res.records)
    if (r.coalesced) EXPECT_LE(r.tau, r.horizon);
}
