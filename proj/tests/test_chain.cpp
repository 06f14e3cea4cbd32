#include <gtest/gtest.h>

#include <map>

#include "prmix/chain.hpp"
#include "prmix/error.hpp"
#include "prmix/inference.hpp"
#include "prmix/statistics.hpp"

using namespace prmix;

namespace {

GroupPtr make(const char* spec) { return build_group(parse_group_spec(spec)); }

// E[n_a(t+1) - n_a(t)] by enumerating the 2n(n-1) triples directly.
std::vector<double> oracle_increment(const Configuration& sigma) {
  const FiniteGroup& g = sigma.group();
  const int n = sigma.n(), q = g.order();
  std::vector<double> out(q, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int s : {1, -1}) {
        const Element b = s == 1 ? sigma[j] : g.inv(sigma[j]);
        const Element after = g.mul(sigma[i], b);
        out[after] += 1.0;
        out[sigma[i]] -= 1.0;
      }
    }
  for (auto& x : out) x /= 2.0 * n * (n - 1);
  return out;
}

}  // namespace

TEST(Chain, MoveExamples) {
  auto z6 = make("Z6");
  Configuration sigma(z6, {1, 2, 3});
  EXPECT_EQ(apply_move(sigma, {0, 1, 1}), 1);
  EXPECT_EQ(sigma[0], 3);
  EXPECT_EQ(apply_move(sigma, {2, 0, -1}), 3);
  EXPECT_EQ(sigma[2], 0);
  EXPECT_EQ(sigma[1], 2);

  auto s3 = make("S3");
  Configuration t(s3, {1, 2});
  apply_move(t, {0, 1, -1});
  EXPECT_EQ(t[0], s3->mul(1, s3->inv(2)));
}

TEST(Chain, InitialRequiresGenerating) {
  auto z6 = make("Z6");
  EXPECT_THROW(Configuration::initial(z6, {2, 4, 0}), Error);
  EXPECT_NO_THROW(Configuration::initial(z6, {2, 3, 0}));
  EXPECT_THROW(Configuration(z6, {7}), Error);
}

TEST(Chain, SampleMoveLaw) {
  const int n = 4;
  Rng rng(7);
  std::vector<std::uint64_t> obs(2 * n * n, 0);
  const int draws = 240000;
  for (int k = 0; k < draws; ++k) {
    const StepSample m = sample_move(n, rng);
    ASSERT_NE(m.i, m.j);
    ASSERT_TRUE(m.s == 1 || m.s == -1);
    ++obs[(m.i * n + m.j) * 2 + (m.s == 1)];
  }
  std::vector<std::uint64_t> cells;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        for (int s = 0; s < 2; ++s) cells.push_back(obs[(i * n + j) * 2 + s]);
  std::vector<double> probs(cells.size(), 1.0 / cells.size());
  EXPECT_GT(chi_square_gof(cells, probs).p_value, 1e-4);
}

TEST(Chain, OneStepLawIsExact) {
  // Enumerating triples from a fixed state: each occurs with mass 1/(2n(n-1)),
  // and the induced next-state law has rational masses with that denominator.
  auto s3 = make("S3");
  for (int n = 3; n <= 6; ++n) {
    Rng rng(n);
    Configuration sigma = sample_stationary(s3, n, rng).config;
    std::map<std::vector<Element>, int> next;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        for (int s : {1, -1}) {
          Configuration c = sigma;
          apply_move(c, {i, j, s});
          for (int k = 0; k < n; ++k)
            if (k != i) ASSERT_EQ(c[k], sigma[k]);
          ++next[c.sites()];
        }
      }
    int total = 0;
    for (const auto& [k, v] : next) total += v;
    EXPECT_EQ(total, 2 * n * (n - 1));
    // A move never fixes sigma(i) unless sigma(j) is the identity.
    const int id_sites = counts(sigma)[0];
    const auto self = next.find(sigma.sites());
    const int expected_self = 2 * (n - 1) * id_sites;
    EXPECT_EQ(self == next.end() ? 0 : self->second, expected_self);
  }
}

TEST(Chain, SubgroupPreservedPathwise) {
  for (const char* s : {"Z6", "S3", "D4", "Z2xZ2"}) {
    auto g = make(s);
    Rng rng(17);
    for (const auto& h : g->proper_subgroups()) {
      std::vector<Element> sites(8);
      const auto el = h.elements();
      for (auto& x : sites) x = el[rng.below(el.size())];
      Configuration sigma(g, sites);
      const std::uint64_t gen = g->closure(sigma.support_mask()).mask;
      for (int t = 0; t < 20000; ++t) {
        step(sigma, rng);
        ASSERT_EQ(sigma.support_mask() & ~h.mask, 0u) << s;
      }
      EXPECT_EQ(g->closure(sigma.support_mask()).mask, gen);
    }
    Configuration sigma = star_config(g, 6);
    for (int t = 0; t < 100000; ++t) {
      step(sigma, rng);
      ASSERT_TRUE(sigma.is_generating()) << s;
    }
  }
}

TEST(Chain, IncrementExample) {
  auto z2 = make("Z2");
  Configuration sigma(z2, {1, 0, 0, 0});
  const auto inc = expected_increment_closed(*z2, counts(sigma));
  EXPECT_NEAR(inc[1], 0.25, 1e-15);
  EXPECT_NEAR(inc[0], -0.25, 1e-15);
  const auto rep = expected_increment(sigma);
  EXPECT_NEAR(rep.brute_force[1], 0.25, 1e-15);
}

TEST(Chain, IncrementClosedFormMatchesEnumeration) {
  for (const char* s : {"Z2", "Z3", "Z6", "S3", "D4"}) {
    auto g = make(s);
    Rng rng(23);
    for (int k = 0; k < 100; ++k) {
      const int n = 2 + static_cast<int>(rng.below(10));
      Configuration sigma = uniform_tuple(g, n, rng);
      const auto oracle = oracle_increment(sigma);
      const auto closed = expected_increment_closed(*g, counts(sigma));
      const auto brute = expected_increment_brute(sigma);
      double sum = 0;
      for (int a = 0; a < g->order(); ++a) {
        EXPECT_NEAR(closed[a], oracle[a], 1e-12) << s;
        EXPECT_NEAR(brute[a], oracle[a], 1e-12) << s;
        EXPECT_LE(std::abs(closed[a]), 1.0);
        sum += closed[a];
      }
      EXPECT_NEAR(sum, 0.0, 1e-12);
    }
  }
}

TEST(Chain, MeanFieldFormDiffersByDiagonalCorrection) {
  auto z2 = make("Z2");
  Configuration sigma(z2, {1, 0, 0, 0});
  const auto exact = expected_increment_closed(*z2, counts(sigma));
  const auto mf = expected_increment_mean_field(*z2, counts(sigma));
  EXPECT_NEAR(mf[0], 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(exact[0], -0.25, 1e-15);

  for (const char* s : {"Z3", "S3", "D4"}) {
    auto g = make(s);
    Rng rng(29);
    for (int k = 0; k < 50; ++k) {
      const int n = 2 + static_cast<int>(rng.below(10));
      const auto c = counts(uniform_tuple(g, n, rng));
      const auto e = expected_increment_closed(*g, c), m = expected_increment_mean_field(*g, c);
      for (int a = 0; a < g->order(); ++a) {
        double corr = a == 0 ? n : 0.0;
        for (int b = 0; b < g->order(); ++b)
          if (g->mul(b, b) == a) corr += c[b];
        EXPECT_NEAR(m[a] - e[a], corr / (2.0 * n * (n - 1)), 1e-12) << s;
      }
    }
  }
}

TEST(Chain, StarConfig) {
  EXPECT_EQ(star_config(make("Z2"), 4).sites(), (std::vector<Element>{1, 0, 0, 0}));
  EXPECT_EQ(star_config(make("Z6"), 5).sites(), (std::vector<Element>{1, 0, 0, 0, 0}));
  auto s3 = make("S3");
  const Configuration c = star_config(s3, 6);
  EXPECT_TRUE(c.is_generating());
  EXPECT_NE(c[0], 0);
  EXPECT_NE(c[1], 0);
  for (int i = 2; i < 6; ++i) EXPECT_EQ(c[i], 0);
  EXPECT_THROW(star_config(s3, 1), Error);
}

TEST(Chain, StationaryIsUniformOnGeneratingTuples) {
  auto z2 = make("Z2");
  Rng rng(31);
  std::vector<std::uint64_t> obs(16, 0);
  std::uint64_t attempts = 0;
  const int draws = 150000;
  for (int k = 0; k < draws; ++k) {
    const auto s = sample_stationary(z2, 4, rng);
    attempts += s.attempts;
    int code = 0;
    for (int i = 0; i < 4; ++i) code |= s.config[i] << i;
    ++obs[code];
  }
  EXPECT_EQ(obs[0], 0u);
  std::vector<std::uint64_t> cells(obs.begin() + 1, obs.end());
  std::vector<double> probs(15, 1.0 / 15);
  EXPECT_GT(chi_square_gof(cells, probs).p_value, 1e-4);
  EXPECT_NEAR(static_cast<double>(draws) / attempts, 15.0 / 16.0, 0.005);
}

TEST(Chain, StationaryAcceptanceGrowsWithN) {
  auto g = make("Z2xZ2");
  double prev = 0;
  for (int n : {2, 4, 8}) {
    Rng rng(n);
    std::uint64_t attempts = 0;
    for (int k = 0; k < 20000; ++k) attempts += sample_stationary(g, n, rng).attempts;
    const double rate = 20000.0 / attempts;
    EXPECT_GT(rate, prev);
    prev = rate;
  }
  Rng rng(1);
  EXPECT_EQ(sample_stationary(make("Z1"), 3, rng).attempts, 1u);
  EXPECT_THROW(sample_stationary(make("Z2xZ2"), 1, rng, 100), Error);
}

TEST(Chain, TrajectoryObserver) {
  auto g = make("Z3");
  Configuration sigma = star_config(g, 5);
  Rng rng(2);
  std::vector<std::int64_t> seen;
  const auto taken = run_trajectory(
      sigma, 100, rng,
      [&](std::int64_t t, const Configuration&) {
        seen.push_back(t);
        return t < 40;
      },
      10);
  EXPECT_EQ(taken, 40);
  EXPECT_EQ(seen, (std::vector<std::int64_t>{0, 10, 20, 30, 40}));
}

TEST(Chain, ReproducibleStreams) {
  auto g = make("S3");
  Configuration a = star_config(g, 8), b = star_config(g, 8);
  Rng ra(5, 3), rb(5, 3);
  for (int t = 0; t < 1000; ++t) {
    step(a, ra);
    step(b, rb);
  }
  EXPECT_EQ(a, b);
}
