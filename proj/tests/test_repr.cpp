#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "prmix/chain.hpp"
#include "prmix/error.hpp"
#include "prmix/repr.hpp"
#include "prmix/rng.hpp"
#include "prmix/statistics.hpp"

using namespace prmix;

namespace {

GroupPtr make(const char* spec) { return build_group(parse_group_spec(spec)); }

std::vector<double> random_probs(int q, Rng& rng) {
  std::vector<double> v(q);
  double s = 0;
  for (auto& x : v) s += (x = rng.uniform());
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace

TEST(Irreps, CyclicCharacters) {
  auto z2 = make("Z2");
  auto reps2 = nontrivial_irreps(z2);
  ASSERT_EQ(reps2.size(), 1u);
  EXPECT_EQ(reps2[0](1)(0, 0), Complex(-1.0, 0.0));
  auto reps4 = nontrivial_irreps(make("Z4"));
  EXPECT_EQ(reps4[0](1)(0, 0), Complex(0.0, 1.0));
  EXPECT_EQ(reps4[1](1)(0, 0), Complex(-1.0, 0.0));

  auto z3 = make("Z3");
  auto reps3 = nontrivial_irreps(z3);
  ASSERT_EQ(reps3.size(), 2u);
  const Complex w = std::polar(1.0, 2 * std::numbers::pi / 3);
  for (int a = 0; a < 3; ++a) {
    EXPECT_NEAR(std::abs(reps3[0](a)(0, 0) - std::pow(w, a)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(reps3[1](a)(0, 0) - std::pow(w, 2 * a)), 0.0, 1e-12);
  }
}

TEST(Irreps, BuiltInSetsAreComplete) {
  for (const char* s : {"Z2", "Z5", "Z6", "Z2xZ2", "Z2xZ3", "S3", "S4", "D4", "D5", "Z2xS3"}) {
    auto g = make(s);
    auto reps = nontrivial_irreps(g);
    int total = 0;
    for (const auto& r : reps.irreps()) total += r.dim * r.dim;
    EXPECT_EQ(total, g->order() - 1) << s;
  }
  auto reps = nontrivial_irreps(make("S3"));
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_EQ(reps[0].dim + reps[1].dim, 3);
}

TEST(Irreps, ValidatorRejectsBrokenMatrices) {
  auto g = make("Z3");
  Irrep bad;
  bad.label = "bad";
  bad.dim = 1;
  for (int a = 0; a < 3; ++a) bad.matrices.push_back(CMatrix::Identity(1, 1) * Complex(a == 1 ? -1.0 : 1.0));
  EXPECT_THROW(validate_irrep(*g, bad), Error);
}

TEST(Irreps, JsonRoundTrip) {
  for (const char* s : {"S3", "Z2xZ3", "D4"}) {
    auto g = make(s);
    auto reps = nontrivial_irreps(g);
    auto back = irreps_from_json_text(g, irreps_to_json_text(reps));
    ASSERT_EQ(back.size(), reps.size());
    for (std::size_t k = 0; k < reps.size(); ++k)
      for (int a = 0; a < g->order(); ++a) EXPECT_LT((back[k](a) - reps[k](a)).norm(), 1e-15);
  }
}

TEST(Irreps, TableGroupNeedsFile) {
  const std::string dir = PRMIX_TEST_DATA;
  auto g = load_group_table(dir + "/s3_shuffled.txt");
  try {
    nontrivial_irreps(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RepsUnavailable);
  }
  auto reps = nontrivial_irreps(g, dir + "/s3_shuffled_irreps.json");
  EXPECT_EQ(reps.size(), 2u);
  // Identity sits at label 3 in the file; after loading it is index 0.
  EXPECT_LT((reps[1](0) - CMatrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(Irreps, MalformedFileIsRejected) {
  auto g = make("Z2");
  EXPECT_THROW(irreps_from_json_text(g, "{\"irreps\": [{\"dim\": 1, \"matrices\": [[1]]}]}"), Error);
  EXPECT_THROW(irreps_from_json_text(g, "[{\"dim\": 1, \"matrices\": [[1], [1]]}]"), Error);
  EXPECT_THROW(irreps_from_json_text(g, "not json"), Error);
  EXPECT_NO_THROW(irreps_from_json_text(g, "[{\"dim\": 1, \"matrices\": [[1], [-1]]}]"));
}

TEST(Fourier, CoefficientExamples) {
  auto z2 = make("Z2");
  auto r2 = nontrivial_irreps(z2);
  const std::vector<double> v{0.75, 0.25};
  EXPECT_NEAR(fourier_coeff(v, r2[0])(0, 0).real(), 0.5, 1e-15);

  auto s3 = make("S3");
  auto rs = nontrivial_irreps(s3);
  const std::vector<double> uniform(6, 1.0 / 6), point{1, 0, 0, 0, 0, 0};
  for (const auto& r : rs.irreps()) {
    EXPECT_LT(fourier_coeff(uniform, r).norm(), 1e-12);
    EXPECT_LT((fourier_coeff(point, r) - CMatrix::Identity(r.dim, r.dim)).norm(), 1e-15);
    EXPECT_LT(fourier_row(uniform, r).norm(), 1e-12);
  }

  auto z3 = make("Z3");
  auto r3 = nontrivial_irreps(z3);
  const Complex w = std::polar(1.0, 2 * std::numbers::pi / 3);
  const std::vector<double> row{0.5, 0.5, 0.0};
  EXPECT_LT(std::abs(fourier_row(row, r3[0])(0, 0) - (1.0 + w) / 2.0), 1e-15);
}

TEST(Fourier, PlancherelExamples) {
  auto z2 = make("Z2");
  auto r2 = nontrivial_irreps(z2);
  const std::vector<double> v{0.75, 0.25};
  EXPECT_NEAR(vtilde_norm_sq(fourier_transform(v, r2), r2), 0.125, 1e-15);
  for (const char* s : {"Z3", "S3", "D4"}) {
    auto g = make(s);
    auto reps = nontrivial_irreps(g);
    std::vector<double> point(g->order(), 0.0);
    point[0] = 1.0;
    const double q = g->order();
    EXPECT_NEAR(vtilde_norm_sq(fourier_transform(point, reps), reps), (q - 1) / q, 1e-13) << s;
  }
}

TEST(Fourier, PlancherelOnRandomVectors) {
  Rng rng(11);
  for (const char* s : {"Z4", "Z2xZ2", "S3", "D5", "S4"}) {
    auto g = make(s);
    auto reps = nontrivial_irreps(g);
    const int q = g->order();
    for (int k = 0; k < 200; ++k) {
      auto v = random_probs(q, rng);
      double direct = 0;
      for (double x : v) direct += (x - 1.0 / q) * (x - 1.0 / q);
      EXPECT_NEAR(vtilde_norm_sq(fourier_transform(v, reps), reps), direct, 1e-13) << s;
    }
  }
}

TEST(Fourier, HilbertSchmidtNormAtMostSqrtDim) {
  Rng rng(5);
  auto g = make("S4");
  auto reps = nontrivial_irreps(g);
  for (int k = 0; k < 200; ++k) {
    auto v = random_probs(24, rng);
    for (const auto& r : reps.irreps()) EXPECT_LE(hs_norm(fourier_coeff(v, r)), std::sqrt(r.dim) + 1e-12);
  }
}

TEST(Fourier, ConjugateRepresentationConjugatesCoefficient) {
  Rng rng(3);
  auto g = make("S3");
  auto reps = nontrivial_irreps(g);
  for (const auto& r : reps.irreps()) {
    const Irrep c = conjugate_irrep(r);
    auto v = random_probs(6, rng);
    const CMatrix x = fourier_coeff(v, r), xc = fourier_coeff(v, c);
    EXPECT_LT((xc - x.conjugate()).norm(), 1e-14);
    EXPECT_NEAR(std::abs(xc.trace() - std::conj(x.trace())), 0.0, 1e-14);
  }
}

TEST(Fourier, OperatorNormMatchesEigenOracle) {
  Rng rng(9);
  for (int d = 1; d <= 6; ++d)
    for (int k = 0; k < 20; ++k) {
      CMatrix m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(m.adjoint() * m);
      EXPECT_NEAR(op_norm(m), std::sqrt(es.eigenvalues().maxCoeff()), 1e-12);
    }
}

TEST(Drift, MatrixExamples) {
  const int n = 10;
  CMatrix zero = CMatrix::Zero(2, 2);
  EXPECT_LT((drift_matrix(zero, n) + CMatrix::Identity(2, 2) / n).norm(), 1e-15);
  CMatrix id = CMatrix::Identity(2, 2);
  EXPECT_LT((drift_matrix(id, n) - id / (n * (n - 1.0))).norm(), 1e-15);
  CMatrix m(2, 2);
  m << Complex(0.1, 0.2), Complex(0.3, -0.1), Complex(-0.2, 0.4), Complex(0.5, 0.0);
  const CMatrix x = drift_matrix(m, n);
  EXPECT_LT((x - x.adjoint()).norm(), 1e-15);
}

TEST(Gap, CyclicValues) {
  for (int q = 2; q <= 6; ++q) {
    auto g = build_group(GroupSpec::cyclic(q));
    auto reps = nontrivial_irreps(g);
    const GapCertificate cert = gap_certificate(*g, reps[0], 1.0 / 6.0);
    EXPECT_TRUE(cert.certified);
    EXPECT_NEAR(cert.value, 5.0 / 6.0 + std::cos(2 * std::numbers::pi / q) / 6.0, 1e-9) << q;
  }
}

TEST(Gap, CharacterOfSmallerOrder) {
  // chi_2 on Z6 has order 3.
  auto g = make("Z6");
  auto reps = nontrivial_irreps(g);
  const GapCertificate cert = gap_certificate(*g, reps[1], 1.0 / 6.0);
  EXPECT_NEAR(cert.value, 5.0 / 6.0 + std::cos(2 * std::numbers::pi / 3) / 6.0, 1e-9);
}

TEST(Gap, UniformMeasureGivesZero) {
  auto g = make("S3");
  auto reps = nontrivial_irreps(g);
  const std::vector<double> mu(6, 1.0 / 6);
  for (const auto& r : reps.irreps()) EXPECT_NEAR(lambda_max_h(r, mu), 0.0, 1e-12);
}

TEST(Gap, SearchAgreesWithEnumeration) {
  for (const char* s : {"Z3", "Z5", "S3"}) {
    auto g = make(s);
    auto reps = nontrivial_irreps(g);
    for (const auto& r : reps.irreps()) {
      const GapCertificate exact = gap_certificate(*g, r, 1.0 / 6.0);
      GapOptions opt;
      opt.force_search = true;
      const GapCertificate search = gap_certificate(*g, r, 1.0 / 6.0, opt);
      EXPECT_FALSE(search.certified);
      EXPECT_NEAR(search.value, exact.value, 1e-7) << s << ' ' << r.label;
    }
  }
}

TEST(Gap, NormBoundAtFiniteN) {
  // Sampled states in S_non(1/6), and adversarial boundary states with the
  // finite-n constant 1 - gap n/(n-1).
  Rng rng(21);
  for (const char* s : {"Z2", "Z3", "S3"}) {
    auto g = make(s);
    auto reps = nontrivial_irreps(g);
    for (const auto& r : reps.irreps()) {
      const double gap = gap_certificate(*g, r, 1.0 / 6.0).value;
      for (int n : {12, 30, 60}) {
        const double gamma_n = 1.0 - gap * n / (n - 1.0);
        int tested = 0;
        for (int k = 0; k < 3000 && tested < 200; ++k) {
          Configuration sigma = uniform_tuple(g, n, rng);
          if (!in_S_non(sigma, Ratio{1, 6})) continue;
          ++tested;
          const CMatrix x = fourier_coeff(proportion_vector(sigma), r);
          const CMatrix m = CMatrix::Identity(r.dim, r.dim) + drift_matrix(x, n);
          EXPECT_LE(op_norm(m), 1.0 - gamma_n / n + 1e-12);
        }
      }
    }
  }
  // Z2 boundary state n_1 = n/6: the finite-n constant is tight there.
  auto g = make("Z2");
  auto reps = nontrivial_irreps(g);
  const int n = 12;
  std::vector<double> v{10.0 / 12, 2.0 / 12};
  const CMatrix m = CMatrix::Identity(1, 1) + drift_matrix(fourier_coeff(v, reps[0]), n);
  const double gap = 2.0 / 3.0;
  EXPECT_NEAR(op_norm(m), 1.0 - (1.0 - gap * n / (n - 1.0)) / n, 1e-14);
  EXPECT_GT(op_norm(m), 1.0 - (1.0 - gap) / n);
}
