#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "datos/problems.hpp"
#include "datos/rng.hpp"

using namespace datos;

namespace {

double central_difference_error(const SmoothLoss& f, const Vector& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  const Vector g = f.gradient(x);
  Vector fd(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    fd(j) = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return (fd - g).norm() / std::max(1.0, g.norm());
}

Vector interior_flat(Rng& rng, Eigen::Index side) {
  const Matrix z = rng.normal_matrix(side, side);
  return symflat::flatten(2.0 * Matrix::Identity(side, side) + 0.2 * (z + z.transpose()));
}

}  // namespace

TEST(SymFlat, RoundTripAndIsometry) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = rng.normal_matrix(4, 4), b = rng.normal_matrix(4, 4);
    const Matrix x = a + a.transpose(), y = b + b.transpose();
    EXPECT_LT((symflat::unflatten(symflat::flatten(x)) - x).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(std::abs(x.cwiseProduct(y).sum() - symflat::flatten(x).dot(symflat::flatten(y))), 1e-12);
  }
  EXPECT_EQ(symflat::flat_size(5), 15);
  EXPECT_EQ(symflat::side_from_flat(15), 5);
  EXPECT_THROW(symflat::side_from_flat(14), Error);
}

TEST(Logistic, ValueAtZeroIsLogTwo) {
  const auto shards = synthetic_classification(3, 2, 7, 5);
  const auto p = logistic_l1(shards, 0.1);
  for (const auto& f : p.losses) EXPECT_NEAR(f->value(Vector::Zero(5)), std::log(2.0), 1e-15);
}

TEST(Logistic, SingleSampleClosedForm) {
  Matrix a(1, 2);
  a << 1.0, 0.0;
  Vector b(1);
  b << 1.0;
  const LogisticLoss f(a, b);
  for (double t : {-30.0, -2.0, 0.3, 5.0, 40.0}) {
    Vector x(2);
    x << t, 0.0;
    EXPECT_NEAR(f.value(x), std::log1p(std::exp(-t)), 1e-14 * (1.0 + std::abs(t)));
    EXPECT_LT(central_difference_error(f, x), 1e-6);
  }
}

TEST(Logistic, RejectsLabelsOutsideSigns) {
  Dataset ds;
  ds.features = Matrix::Ones(2, 3);
  ds.labels = Vector::Ones(2);
  ds.labels(1) = 0.0;
  EXPECT_THROW(logistic_l1({ds}, 0.1), Error);
  ds.labels(1) = -1.0;
  EXPECT_NO_THROW(logistic_l1({ds}, 0.1));
  EXPECT_THROW(logistic_l1({ds}, -1.0), Error);
}

TEST(Logistic, ZeroLambdaMeansZeroRegularizer) {
  const auto p = logistic_l1(synthetic_classification(1, 2, 5, 3), 0.0);
  const Vector v = Vector::LinSpaced(3, -1.0, 2.0);
  EXPECT_EQ(reg_value(p.regs[0], v), 0.0);
  EXPECT_TRUE(apply_prox(p.regs[0], v, 0.7).isApprox(v));
}

TEST(Gradients, CentralDifferencesAtRandomInteriorPoints) {
  Rng rng(5);
  const auto logi = logistic_l1(synthetic_classification(2, 3, 12, 6), 1e-5);
  const auto en = elastic_net(3, 3, 8, 6, 1e-5, default_gamma_schedule(3));
  const auto cov = covariance_mle(4, 2, 40, default_covariance(4, 3), 0.1, 10.0);
  const auto cov_neg = covariance_mle(4, 2, 40, default_covariance(4, 3), 0.1, 10.0, -1.0);
  for (int t = 0; t < 20; ++t) {
    for (int i = 0; i < 3; ++i) {
      EXPECT_LT(central_difference_error(*logi.losses[i], rng.normal_vector(6)), 1e-6);
      EXPECT_LT(central_difference_error(*en.losses[i], rng.normal_vector(6)), 1e-6);
    }
    EXPECT_LT(central_difference_error(*cov.losses[t % 2], interior_flat(rng, 3)), 1e-6);
    EXPECT_LT(central_difference_error(*cov_neg.losses[t % 2], interior_flat(rng, 3)), 1e-6);
  }
}

TEST(Convexity, MidpointSpotCheck) {
  Rng rng(6);
  const auto logi = logistic_l1(synthetic_classification(2, 1, 12, 6), 0.0);
  const auto en = elastic_net(3, 1, 8, 6, 0.0, {0.3});
  const auto cov = covariance_mle(4, 1, 40, default_covariance(4, 3), 0.1, 10.0);
  for (int t = 0; t < 50; ++t) {
    const Vector x = rng.normal_vector(6), y = rng.normal_vector(6);
    for (const auto* p : {&logi, &en}) {
      const auto& f = *p->losses[0];
      EXPECT_LE(f.value(0.5 * (x + y)), 0.5 * (f.value(x) + f.value(y)) + 1e-10);
    }
    const Vector u = interior_flat(rng, 3), v = interior_flat(rng, 3);
    const auto& f = *cov.losses[0];
    EXPECT_LE(f.value(0.5 * (u + v)), 0.5 * (f.value(u) + f.value(v)) + 1e-10);
  }
}

TEST(ElasticNet, ClosedFormValueAndGradient) {
  Rng rng(8);
  const Matrix a = rng.normal_matrix(5, 3);
  const Vector b = rng.normal_vector(5);
  const auto p = elastic_net_from_data({a}, {b}, 0.2, {0.4});
  const Vector x = rng.normal_vector(3);
  EXPECT_NEAR(p.losses[0]->value(x), (a * x - b).squaredNorm() / 5.0 + 0.2 * x.squaredNorm(), 1e-13);
  const Vector g = (2.0 / 5.0) * a.transpose() * (a * x - b) + 0.4 * x;
  EXPECT_LT((p.losses[0]->gradient(x) - g).norm(), 1e-13);
  EXPECT_NEAR(reg_value(p.regs[0], x), 0.2 * x.lpNorm<1>(), 1e-15);
}

TEST(ElasticNet, ZeroDataLeavesOnlyRidge) {
  const auto p = elastic_net_from_data({Matrix::Zero(4, 3)}, {Vector::Zero(4)}, 0.0, {0.5});
  const Vector x = Vector::Constant(3, 2.0);
  EXPECT_NEAR(p.losses[0]->value(x), 0.25 * x.squaredNorm(), 1e-15);
  EXPECT_LT(p.losses[0]->gradient(Vector::Zero(3)).norm(), 1e-15);
}

TEST(ElasticNet, SmoothnessMetadataMatchesEigenOracle) {
  const auto p = elastic_net(11, 4, 6, 9, 1e-5, default_gamma_schedule(4));
  for (int i = 0; i < 4; ++i) {
    Rng rng(derive_seed(11, static_cast<std::uint64_t>(i)));
    const Matrix a = rng.normal_matrix(6, 9);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
    const double gamma = 0.1 + 0.1 * i;
    EXPECT_NEAR(p.meta.smoothness[i], (2.0 / 6.0) * es.eigenvalues().maxCoeff() + gamma, 1e-10);
    EXPECT_NEAR(p.meta.strong_convexity[i], gamma, 1e-10);  // d > n: data part is singular
    EXPECT_NEAR(p.meta.gamma[i], gamma, 1e-15);
  }
}

TEST(ElasticNet, DeterministicInSeed) {
  const auto a = elastic_net(3, 2, 4, 3, 0.1, {0.1, 0.2});
  const auto b = elastic_net(3, 2, 4, 3, 0.1, {0.1, 0.2});
  const Vector x = Vector::LinSpaced(3, -1, 1);
  EXPECT_EQ(a.objective(x), b.objective(x));
}

TEST(GammaSchedule, MatchesFormula) {
  const auto g = default_gamma_schedule(20);
  ASSERT_EQ(g.size(), 20u);
  EXPECT_DOUBLE_EQ(g.front(), 0.1);
  EXPECT_NEAR(g.back(), 2.0, 1e-15);
}

TEST(Covariance, IdentityValueAndGradient) {
  const auto p = covariance_from_samples({Matrix::Identity(3, 3)}, 4.0, 0.1, 10.0);
  const Vector id = symflat::identity(3);
  EXPECT_NEAR(p.losses[0]->value(id), 3.0, 1e-14);
  EXPECT_LT((symflat::unflatten(p.losses[0]->gradient(id)) + 3.0 * Matrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(Covariance, InfiniteExactlyOffThePdCone) {
  Rng rng(9);
  const auto p = covariance_mle(1, 1, 20, Matrix::Identity(3, 3), 0.1, 10.0);
  Matrix x = Matrix::Identity(3, 3);
  x(2, 2) = -0.5;
  EXPECT_TRUE(std::isinf(p.losses[0]->value(symflat::flatten(x))));
  x(2, 2) = 0.0;
  EXPECT_TRUE(std::isinf(p.losses[0]->value(symflat::flatten(x))));
  for (int t = 0; t < 50; ++t) {
    const Matrix z = rng.normal_matrix(3, 3);
    const Matrix s = z + z.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const bool pd = es.eigenvalues().minCoeff() > 0.0;
    EXPECT_EQ(std::isfinite(p.losses[0]->value(symflat::flatten(s))), pd);
  }
}

TEST(Covariance, RejectsBadSigmaAndBox) {
  Matrix s = Matrix::Identity(2, 2);
  s(1, 1) = -1.0;
  EXPECT_THROW(covariance_mle(1, 2, 5, s, 0.1, 10.0), Error);
  EXPECT_THROW(covariance_mle(1, 2, 5, Matrix::Identity(2, 2), 0.0, 10.0), Error);
  EXPECT_THROW(covariance_mle(1, 2, 5, Matrix::Identity(2, 2), 3.0, 2.0), Error);
  EXPECT_THROW(covariance_from_samples({Matrix::Identity(2, 2)}, 5.0, 0.1, 10.0, 0.5), Error);
}

TEST(Covariance, SampleSecondMomentConverges) {
  const Matrix sigma = default_covariance(2, 3);
  const auto p = covariance_mle(7, 1, 200000, sigma, 0.1, 100.0);
  const auto& y = static_cast<const LogDetTraceLoss&>(*p.losses[0]).sample_covariance();
  EXPECT_LT((y - sigma).norm() / sigma.norm(), 0.02);
}

TEST(Covariance, DefaultSpectrum) {
  const Matrix s = default_covariance(3, 5);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  EXPECT_NEAR(es.eigenvalues()(0), 8.0, 1e-10);
  EXPECT_NEAR(es.eigenvalues()(4), 32.0, 1e-10);
}

TEST(Libsvm, ParsesFormatDefinition) {
  std::istringstream is("+1 1:0.5 3:2\n");
  const auto ds = read_libsvm(is, 3);
  ASSERT_EQ(ds.rows(), 1);
  EXPECT_EQ(ds.features(0, 0), 0.5);
  EXPECT_EQ(ds.features(0, 1), 0.0);
  EXPECT_EQ(ds.features(0, 2), 2.0);
  EXPECT_EQ(ds.labels(0), 1.0);
}

TEST(Libsvm, EmptyFileIsValid) {
  std::istringstream is("");
  const auto ds = read_libsvm(is, 4);
  EXPECT_EQ(ds.rows(), 0);
  EXPECT_EQ(ds.dim(), 4);
}

TEST(Libsvm, IndexOutOfRangeNamesTheLine) {
  std::istringstream is("1 5:1\n");
  try {
    read_libsvm(is, 3);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("index out of range at line 1"), std::string::npos);
  }
}

TEST(Libsvm, MalformedLinesNameTheLine) {
  for (const char* text : {"0 1:1\n1 2;3\n", "0 1:1\n1 :3\n", "0 1:1\n1 2:\n", "0 1:1\nx 1:1\n", "0 1:1\n1 2:1x\n"}) {
    std::istringstream is(text);
    try {
      read_libsvm(is, 3);
      FAIL() << "expected an error for " << text;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST(Libsvm, LabelRulesAndLimit) {
  const std::string text = "3 1:1\n4 2:1\n+1 1:2\n-1 2:2\n0 1:3\n";
  {
    std::istringstream is(text);
    const auto ds = read_libsvm(is, 2);  // parity for digits, signed tokens kept
    Vector expect(5);
    expect << -1, 1, 1, -1, 1;
    EXPECT_EQ(ds.labels, expect);
  }
  {
    std::istringstream is(text);
    const auto ds = read_libsvm(is, 2, -1, LabelRule::Parity);
    Vector expect(5);
    expect << -1, 1, -1, -1, 1;
    EXPECT_EQ(ds.labels, expect);
  }
  {
    std::istringstream is(text);
    const auto ds = read_libsvm(is, 2, 2, LabelRule::Sign);
    ASSERT_EQ(ds.rows(), 2);
    EXPECT_EQ(ds.labels(0), 1.0);
  }
}

TEST(Libsvm, ReadsFromFile) {
  const std::string path = ::testing::TempDir() + "/tiny.libsvm";
  {
    std::ofstream os(path);
    os << "1 1:1\r\n2 2:1\n\n";
  }
  const auto ds = read_libsvm(path, 2);
  EXPECT_EQ(ds.rows(), 2);
  EXPECT_THROW(read_libsvm(path + ".missing", 2), Error);
}

TEST(SplitDataset, ShardsAndTruncation) {
  Dataset ds;
  ds.features = Matrix(10, 1);
  for (int r = 0; r < 10; ++r) ds.features(r, 0) = r;
  ds.labels = Vector::Ones(10);
  const auto s = split_dataset(ds, 3);
  ASSERT_EQ(s.parts.size(), 3u);
  EXPECT_EQ(s.dropped, 1);
  EXPECT_EQ(s.parts[1].rows(), 3);
  EXPECT_EQ(s.parts[1].features(0, 0), 3.0);
  const auto one = split_dataset(ds, 1);
  EXPECT_EQ(one.parts[0].features, ds.features);
  EXPECT_EQ(one.dropped, 0);
}

TEST(SplitDataset, MnistSizedShards) {
  Dataset ds;
  ds.features = Matrix::Zero(6000, 2);
  ds.labels = Vector::Ones(6000);
  const auto s = split_dataset(ds, 20);
  EXPECT_EQ(s.parts.size(), 20u);
  for (const auto& p : s.parts) EXPECT_EQ(p.rows(), 300);
}

TEST(ProblemInstance, ObjectiveSumsAllTerms) {
  const auto p = elastic_net(2, 3, 4, 5, 0.3, default_gamma_schedule(3));
  const Vector x = Vector::LinSpaced(5, -1.0, 1.0);
  double expect = 0.0;
  for (int i = 0; i < 3; ++i) expect += p.losses[i]->value(x) + 0.3 * x.lpNorm<1>();
  EXPECT_NEAR(p.objective(x), expect, 1e-13);
  EXPECT_TRUE(p.all_l1());
}
