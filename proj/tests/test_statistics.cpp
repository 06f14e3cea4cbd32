#include <gtest/gtest.h>

#include "prmix/chain.hpp"
#include "prmix/error.hpp"
#include "prmix/statistics.hpp"

using namespace prmix;

namespace {

GroupPtr make(const char* spec) { return build_group(parse_group_spec(spec)); }

ProportionMatrix random_matrix(const std::vector<int>& rows, Rng& rng) {
  const int q = static_cast<int>(rows.size());
  std::vector<int> e(q * q, 0);
  for (int a = 0; a < q; ++a)
    for (int k = 0; k < rows[a]; ++k) ++e[a * q + rng.below(q)];
  return ProportionMatrix(q, e);
}

}  // namespace

TEST(Statistics, CountsAndProportions) {
  auto g = make("Z3");
  Configuration sigma(g, {0, 1, 1, 2});
  EXPECT_EQ(counts(sigma), (std::vector<int>{1, 2, 1}));
  const auto v = proportion_vector(sigma);
  EXPECT_DOUBLE_EQ(v[1], 0.5);
}

TEST(Statistics, ProportionMatrixExamples) {
  auto g = make("Z2");
  Configuration s0(g, {1, 0, 0, 0}), s(g, {1, 1, 0, 0});
  const ProportionMatrix m = proportion_matrix(s0, s);
  EXPECT_EQ(m(1, 1), 1);
  EXPECT_EQ(m(0, 1), 1);
  EXPECT_EQ(m(0, 0), 2);
  EXPECT_EQ(m(1, 0), 0);
  EXPECT_EQ(m.row_sums(), counts(s0));
  EXPECT_EQ(m.col_sums(), counts(s));

  const ProportionMatrix d = proportion_matrix(s0, s0);
  EXPECT_EQ(d(0, 0), 3);
  EXPECT_EQ(d(1, 1), 1);
  EXPECT_EQ(d(0, 1) + d(1, 0), 0);

  EXPECT_THROW(proportion_matrix(s0, Configuration(g, {1, 0})), Error);
}

TEST(Statistics, SNonExamples) {
  auto z2 = make("Z2");
  Configuration half(z2, {1, 1, 0, 0});
  EXPECT_TRUE(in_S_non(half, Ratio{1, 2}));
  EXPECT_FALSE(in_S_non(half, Ratio{3, 4}));

  auto z6 = make("Z6");
  Configuration c(z6, {1, 2, 2, 2, 2, 2});
  Subgroup h = z6->closure(element_mask(std::vector<Element>{2}));
  EXPECT_EQ(n_non(c, h), 1);
  EXPECT_TRUE(in_S_non(c, Ratio{1, 6}));
  EXPECT_FALSE(in_S_non(c, Ratio{1, 5}));
  EXPECT_TRUE(in_S_non(c, 0.0));
  EXPECT_EQ(min_n_non(*z6, counts(c)), 1);

  // Boundary n_non = n/6 exactly.
  Configuration b(z2, {1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  EXPECT_TRUE(in_S_non(b, Ratio{1, 6}));
  EXPECT_TRUE(in_S_non(b, 1.0 / 6.0));
}

TEST(Statistics, SNonMonotoneInC) {
  auto g = make("S3");
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    Configuration sigma = uniform_tuple(g, 12, rng);
    bool prev = true;
    for (int num = 0; num <= 12; ++num) {
      const bool in = in_S_non(sigma, Ratio{num, 12});
      EXPECT_TRUE(prev || !in);
      prev = in;
    }
  }
}

TEST(Statistics, SStarExamples) {
  auto z2 = make("Z2");
  Configuration v(z2, {0, 0, 0, 1});
  EXPECT_TRUE(in_S_star(v, 0.36));
  EXPECT_FALSE(in_S_star(v, 0.35));
  EXPECT_TRUE(in_S_star_sq(counts(v), Ratio{1, 8}));
  EXPECT_FALSE(in_S_star_sq(counts(v), Ratio{1, 9}));

  auto z3 = make("Z3");
  Configuration u(z3, {0, 1, 2, 0, 1, 2});
  EXPECT_TRUE(in_S_star(u, 0.0));
  EXPECT_EQ(scaled_sq_distance(counts(u), 3), 0);
}

TEST(Statistics, SStarNested) {
  auto g = make("Z3");
  Rng rng(8);
  for (int k = 0; k < 300; ++k) {
    Configuration sigma = uniform_tuple(g, 9, rng);
    bool prev = false;
    for (double d = 0; d < 1.0; d += 0.05) {
      const bool in = in_S_star(sigma, d);
      EXPECT_TRUE(!prev || in);
      prev = in;
    }
  }
}

TEST(Statistics, MatrixSStar) {
  auto z2 = make("Z2");
  Configuration s0(z2, {0, 1, 0, 1});
  const double row = std::sqrt(0.5);
  EXPECT_FALSE(in_S_star_matrix(s0, s0, row - 1e-9));
  EXPECT_TRUE(in_S_star_matrix(s0, s0, row + 1e-9));
  Configuration s(z2, {1, 0, 0, 1});
  EXPECT_TRUE(in_S_star_matrix(s0, s, 0.0));
  Configuration empty_row(z2, {0, 0, 0, 0});
  try {
    in_S_star_matrix(empty_row, s, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRow);
  }
}

TEST(Statistics, TypicalSetsHaveLargeCounts) {
  for (const char* s : {"Z2", "Z3", "S3"}) {
    auto g = make(s);
    const int q = g->order();
    Rng rng(12);
    int members = 0;
    for (int k = 0; k < 2000; ++k) {
      Configuration sigma = uniform_tuple(g, 200, rng);
      if (!in_S_star(sigma, 1.0 / (4 * q))) continue;
      ++members;
      for (int c : counts(sigma)) EXPECT_GE(2 * q * c, 200);
    }
    EXPECT_GT(members, 100) << s;
  }
}

TEST(Statistics, HalfL1Examples) {
  ProportionMatrix a(2, {3, 1, 1, 3}), b(2, {2, 2, 2, 2});
  EXPECT_EQ(half_l1(a, b), 2);
  EXPECT_EQ(half_l1(a, a), 0);
  ProportionMatrix c = a;
  c.move(0, 0, 1);
  EXPECT_EQ(half_l1(a, c), 1);
  ProportionMatrix bad(2, {4, 1, 0, 3});
  try {
    half_l1(a, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RowSumMismatch);
  }
}

TEST(Statistics, HalfL1IsMetric) {
  Rng rng(13);
  const std::vector<int> rows{5, 7, 3};
  for (int k = 0; k < 500; ++k) {
    auto x = random_matrix(rows, rng), y = random_matrix(rows, rng), z = random_matrix(rows, rng);
    EXPECT_LE(half_l1(x, z), half_l1(x, y) + half_l1(y, z));
    EXPECT_EQ(half_l1(x, y), half_l1(y, x));
    EXPECT_EQ(half_l1(x, y) == 0, x == y);
  }
}

TEST(Statistics, CountTrackerFollowsSteps) {
  auto g = make("D4");
  Configuration sigma = star_config(g, 10);
  CountTracker tr(sigma);
  Rng rng(3);
  for (int t = 0; t < 5000; ++t) {
    const StepSample m = sample_move(sigma.n(), rng);
    const Element before = apply_move(sigma, m);
    tr.update(before, sigma[m.i]);
  }
  EXPECT_EQ(tr.counts(), counts(sigma));
}
