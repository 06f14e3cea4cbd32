#include <gtest/gtest.h>

#include <sstream>

#include "prmix/error.hpp"
#include "prmix/group.hpp"

using namespace prmix;

namespace {

GroupPtr make(const char* spec) { return build_group(parse_group_spec(spec)); }

// Subgroups by brute force: every subset closed under multiplication.
std::vector<std::uint64_t> brute_subgroups(const FiniteGroup& g) {
  std::vector<std::uint64_t> out;
  const int q = g.order();
  for (std::uint64_t m = 1; m < (std::uint64_t{1} << q); ++m) {
    if (!(m & 1)) continue;
    bool closed = true;
    for (int a = 0; a < q && closed; ++a)
      for (int b = 0; b < q && closed; ++b)
        if (((m >> a) & 1) && ((m >> b) & 1) && !((m >> g.mul(a, b)) & 1)) closed = false;
    if (closed && m != g.full_mask()) out.push_back(m);
  }
  return out;
}

}  // namespace

TEST(Group, CyclicTwoTable) {
  auto g = make("Z2");
  ASSERT_EQ(g->order(), 2);
  EXPECT_EQ(g->mul(0, 0), 0);
  EXPECT_EQ(g->mul(0, 1), 1);
  EXPECT_EQ(g->mul(1, 1), 0);
  EXPECT_EQ(g->inv(1), 1);
}

TEST(Group, ProductOfCoprimeCyclicIsCyclic) {
  auto g = make("Z2xZ3");
  EXPECT_EQ(g->order(), 6);
  EXPECT_TRUE(g->is_abelian());
  bool has_order_six = false;
  for (int a = 0; a < 6; ++a) has_order_six |= g->element_order(a) == 6;
  EXPECT_TRUE(has_order_six);
}

TEST(Group, SymmetricThreeIsNonabelian) {
  auto g = make("S3");
  EXPECT_EQ(g->order(), 6);
  bool found = false;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) found |= g->mul(a, b) != g->mul(b, a);
  EXPECT_TRUE(found);
  EXPECT_FALSE(g->is_abelian());
}

TEST(Group, GroupAxiomsForEveryBuilder) {
  for (const char* s : {"Z1", "Z2", "Z3", "Z6", "Z2xZ2", "Z2xZ3", "S3", "S4", "D4", "D5", "Z2xS3"}) {
    auto g = make(s);
    const int q = g->order();
    for (int a = 0; a < q; ++a) {
      EXPECT_EQ(g->mul(0, a), a) << s;
      EXPECT_EQ(g->mul(a, 0), a) << s;
      EXPECT_EQ(g->mul(a, g->inv(a)), 0) << s;
      for (int b = 0; b < q; ++b)
        for (int c = 0; c < q; ++c) ASSERT_EQ(g->mul(g->mul(a, b), c), g->mul(a, g->mul(b, c))) << s;
    }
  }
}

TEST(Group, GenerationExamples) {
  auto g = make("Z6");
  const Element two_three[] = {2, 3}, two_four[] = {2, 4}, zero[] = {0};
  EXPECT_TRUE(generates(*g, two_three));
  EXPECT_FALSE(generates(*g, two_four));
  EXPECT_EQ(g->closure(element_mask(two_four)).mask, element_mask(std::vector<Element>{0, 2, 4}));
  EXPECT_FALSE(generates(*g, zero));
  EXPECT_TRUE(generates(*make("Z1"), zero));
  EXPECT_TRUE(g->generates(g->full_mask()));
}

TEST(Group, GenerationIsMonotone) {
  auto g = make("S3");
  for (std::uint64_t m = 0; m < 64; ++m)
    if (g->generates(m))
      for (int a = 0; a < 6; ++a) EXPECT_TRUE(g->generates(m | (std::uint64_t{1} << a)));
}

TEST(Group, ProperSubgroupsMatchBruteForce) {
  for (const char* s : {"Z2", "Z6", "S3", "D4", "Z2xZ2", "Z2xZ3"}) {
    auto g = make(s);
    auto expect = brute_subgroups(*g);
    std::vector<std::uint64_t> got;
    for (const auto& h : g->proper_subgroups()) {
      got.push_back(h.mask);
      EXPECT_EQ(g->order() % h.size(), 0) << s;
      EXPECT_NE(h.mask, g->full_mask());
    }
    std::sort(got.begin(), got.end());
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(got, expect) << s;
  }
}

TEST(Group, SubgroupListsOfSmallGroups) {
  EXPECT_EQ(make("Z2")->proper_subgroups().size(), 1u);
  auto z6 = make("Z6");
  ASSERT_EQ(z6->proper_subgroups().size(), 3u);
  auto g = make("S3");
  const auto& s3 = g->proper_subgroups();
  ASSERT_EQ(s3.size(), 5u);
  int order_two = 0, order_three = 0;
  for (const auto& h : s3) {
    order_two += h.size() == 2;
    order_three += h.size() == 3;
  }
  EXPECT_EQ(order_two, 3);
  EXPECT_EQ(order_three, 1);
}

TEST(Group, MinimalGeneratingSets) {
  EXPECT_EQ(make("Z6")->minimal_generating_set().size(), 1u);
  EXPECT_EQ(make("S3")->minimal_generating_set().size(), 2u);
  EXPECT_EQ(make("Z2xZ2")->minimal_generating_set().size(), 2u);
}

TEST(Group, TableWithShuffledIdentityIsReindexed) {
  auto g = load_group_table(std::string(PRMIX_TEST_DATA) + "/s3_shuffled.txt");
  EXPECT_EQ(g->order(), 6);
  EXPECT_EQ(g->original_label()[0], 3);
  EXPECT_FALSE(g->is_abelian());
  EXPECT_EQ(g->proper_subgroups().size(), 5u);
  for (int a = 0; a < 6; ++a) EXPECT_EQ(g->mul(0, a), a);
}

TEST(Group, TableErrors) {
  EXPECT_THROW(
      {
        try {
          load_group_table(std::string(PRMIX_TEST_DATA) + "/not_a_group.txt");
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::TableInvalid);
          throw;
        }
      },
      Error);
  std::istringstream short_table("2\n0 1\n1");
  EXPECT_THROW(parse_group_table(short_table, "x"), Error);
  std::istringstream big("3\n0 1 2\n1 2 0\n2 0 1\n");
  try {
    parse_group_table(big, "z3", 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OrderCapExceeded);
  }
  std::istringstream ok("3\n0 1 2\n1 2 0\n2 0 1\n");
  EXPECT_EQ(parse_group_table(ok, "z3")->order(), 3);
}

TEST(Group, SpecParsing) {
  EXPECT_EQ(parse_group_spec("Z6").kind, GroupSpec::Kind::Cyclic);
  EXPECT_EQ(parse_group_spec("C4").param, 4);
  EXPECT_EQ(parse_group_spec("Z2xZ3").factors.size(), 2u);
  EXPECT_EQ(parse_group_spec("S3").kind, GroupSpec::Kind::Symmetric);
  EXPECT_EQ(parse_group_spec("D4").kind, GroupSpec::Kind::Dihedral);
  EXPECT_EQ(parse_group_spec("table:foo.txt").path, "foo.txt");
  EXPECT_THROW(parse_group_spec("Q8"), Error);
  EXPECT_EQ(make("D4")->order(), 8);
  EXPECT_EQ(make("S4")->order(), 24);
}
