#include <gtest/gtest.h>

#include <cmath>

#include "mfmc/asymptotics/asym_cov.hpp"

using namespace mfmc;

namespace {

JointModel fig1(double r) { return JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 1.0, r); }

AsymOptions location_only() {
  AsymOptions o;
  o.location_only = true;
  o.dependence_known = true;
  return o;
}

double gumbel_var(double s) { return s * s * pi * pi / 6.0; }

}  // namespace

TEST(Information, MarginalClosedForms) {
  auto g = MarginalFamily::gumbel(2.0, 4.0);
  EXPECT_NEAR(fisher_information(g, true)(0, 0), 1.0 / 16.0, 1e-15);
  auto I = fisher_information(MarginalFamily::gumbel(0.0, 1.0));
  EXPECT_NEAR(I(0, 1), euler_gamma - 1.0, 1e-15);
  EXPECT_NEAR(I(1, 1), std::pow(euler_gamma - 1.0, 2) + pi * pi / 6.0, 1e-14);
  auto N = fisher_information(MarginalFamily::gaussian(0.0, 1.0));
  EXPECT_NEAR(N(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(N(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(N(0, 1), 0.0, 1e-15);
}

TEST(Information, JointGaussianClosedForm) {
  // I^{-1} for (mu1, mu2) of a bivariate normal is the covariance matrix
  auto m = JointModel::bivariate_gaussian(1.0, 2.0, -1.0, 3.0, 0.4);
  auto I = fisher_information(m, {0, 2});
  Eigen::Matrix2d S;
  double c = 0.4 * std::sqrt(6.0);
  S << 2.0, c, c, 3.0;
  EXPECT_LT((checked_inverse(I, "t") - S).norm(), 1e-8);
}

TEST(Information, HessianAndOuterProductAgree) {
  auto m = fig1(0.4);
  std::vector<int> all = {0, 1, 2, 3, 4};
  auto I = fisher_information(m, all);
  auto f = [&](double x1, double x2) {
    Eigen::VectorXd g = m.gradient(x1, x2);
    Eigen::MatrixXd o = g * g.transpose();
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(o.data(), 25));
  };
  Eigen::VectorXd v = m.expect(f);
  Eigen::MatrixXd J = Eigen::Map<Eigen::MatrixXd>(v.data(), 5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(I(i, j), J(i, j), 1e-6 * std::max(1.0, std::abs(J(i, j))));
}

TEST(Information, MonteCarloAgreesWithQuadrature) {
  auto m = fig1(0.5);
  InfoOptions mc;
  mc.method = InfoMethod::MonteCarlo;
  mc.draws = 200000;
  mc.seed = 3;
  auto a = fisher_information(m, {0, 1, 4});
  auto b = fisher_information(m, {0, 1, 4}, mc);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(b(i, i) / a(i, i), 1.0, 0.03);
}

TEST(Information, SingularReportsCondition) {
  Eigen::Matrix2d A;
  A << 1, 1, 1, 1;
  try {
    checked_inverse(A, "asymptotics");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularSystem);
    EXPECT_NE(std::string(e.what()).find("condition number"), std::string::npos);
  }
}

TEST(MomentMatrices, GaussianCrossCovariance) {
  auto m = JointModel::bivariate_gaussian(2.0, 16.0, 2.0, 1.0, 0.5);
  auto mm = moment_matrices(m, moment_map(FamilyId::Gaussian).h);
  EXPECT_NEAR(mm.c_hl(0, 0), 2.0, 1e-10);
  // cov(X1, X2^2) = 2 mu2 rho s1 s2, cov(X1^2, X2^2) = 2 rho^2 v1 v2 + 4 mu1 mu2 rho s1 s2
  EXPECT_NEAR(mm.c_hl(0, 1), 8.0, 1e-9);
  EXPECT_NEAR(mm.c_hl(1, 1), 2 * 0.25 * 16 + 4 * 2 * 2 * 2.0, 1e-8);
  EXPECT_NEAR(mm.c_hh(0, 0), 16.0, 1e-9);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_LE(std::abs(mm.c_hl(i, j)), std::sqrt(mm.c_hh(i, i) * mm.c_ll(j, j)));
}

TEST(MomentMatrices, IndependenceHasNoCrossCovariance) {
  auto h = moment_map(FamilyId::Gaussian).h;
  auto g = moment_matrices(JointModel::bivariate_gaussian(1.0, 2.0, 3.0, 4.0, 0.0), h);
  EXPECT_LT(g.c_hl.cwiseAbs().maxCoeff(), 1e-12 * g.c_hh.cwiseAbs().maxCoeff());
  auto u = moment_matrices(fig1(1.0), h);
  EXPECT_LT(u.c_hl.cwiseAbs().maxCoeff(), 1e-8 * u.c_hh.cwiseAbs().maxCoeff());
  auto b = moment_matrices(JointModel::bernoulli_copula(0.3, 0.5, Copula(CopulaId::Independence, 0.0)),
                           [](double x) { return Eigen::VectorXd::Constant(1, x); });
  EXPECT_EQ(b.c_hl(0, 0), 0.0);
}

TEST(MomentMatrices, QuadratureMatchesMonteCarlo) {
  auto m = fig1(0.3);
  auto h = moment_map(FamilyId::Gumbel).h;
  auto q = moment_matrices(m, h);
  MomentOptions mc;
  mc.method = MomentMethod::MonteCarlo;
  mc.draws = 10000000;
  mc.seed = 11;
  auto s = moment_matrices(m, h, mc);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(s.c_hl(i, j) / q.c_hl(i, j), 1.0, 0.005) << i << j;
      EXPECT_NEAR(s.c_hh(i, j) / q.c_hh(i, j), 1.0, 0.005) << i << j;
      EXPECT_NEAR(s.c_ll(i, j) / q.c_ll(i, j), 1.0, 0.005) << i << j;
    }
}

TEST(AsymCov, LocationOnlyIndependenceEndpoints) {
  auto o = location_only();
  auto m = fig1(1.0);
  EXPECT_NEAR(asym_cov(Method::BaselineMl, m, o)(0, 0), 16.0, 1e-12);
  EXPECT_NEAR(asym_cov(Method::JointMl, m, o)(0, 0), 16.0, 1e-6);
  EXPECT_NEAR(asym_cov(Method::MarginalMlMf, m, o)(0, 0), 16.0, 1e-6);
  EXPECT_NEAR(asym_cov(Method::BaselineMoment, m, o)(0, 0), gumbel_var(4.0), 1e-6);
  EXPECT_NEAR(asym_cov(Method::MomentMf, m, o)(0, 0), gumbel_var(4.0), 1e-6);
  EXPECT_NEAR(gumbel_var(4.0), 26.3189, 1e-4);
}

TEST(AsymCov, TwoParameterBaseline) {
  auto S = asym_cov(Method::BaselineMl, fig1(0.5));
  double s11 = 16.0 * (1.0 + 6.0 * std::pow(euler_gamma - 1.0, 2) / (pi * pi));
  EXPECT_NEAR(S(0, 0), s11, 1e-10);
  EXPECT_NEAR(s11, 17.7387, 1e-4);
  // the moment baseline is G Var(h) G' at the true moments
  auto M = asym_cov(Method::BaselineMoment, fig1(0.5));
  auto B = asym_cov(Method::BaselineMoment, fig1(0.9));
  EXPECT_NEAR(M(0, 0), B(0, 0), 1e-8);
}

TEST(AsymCov, OrderingAcrossDependence) {
  auto o = location_only();
  for (double r : {0.1, 0.3, 0.6, 0.9}) {
    auto m = fig1(r);
    double ml = asym_cov(Method::JointMl, m, o)(0, 0), mml = asym_cov(Method::MarginalMlMf, m, o)(0, 0),
           bl = asym_cov(Method::BaselineMl, m, o)(0, 0), mom = asym_cov(Method::MomentMf, m, o)(0, 0),
           blm = asym_cov(Method::BaselineMoment, m, o)(0, 0);
    EXPECT_LE(ml, mml + 1e-9) << r;
    EXPECT_LE(mml, bl + 1e-9) << r;
    EXPECT_LE(mom, blm + 1e-9) << r;
  }
  // location-only moment MF equals Var(X1) (1 - corr^2)
  auto m = fig1(0.4);
  auto mm = moment_matrices(m, [](double x) { return Eigen::VectorXd::Constant(1, x); });
  double corr2 = mm.c_hl(0, 0) * mm.c_hl(0, 0) / (mm.c_hh(0, 0) * mm.c_ll(0, 0));
  EXPECT_NEAR(asym_cov(Method::MomentMf, m, o)(0, 0), gumbel_var(4.0) * (1 - corr2), 1e-8);
}

TEST(AsymCov, MarginalMlDecomposition) {
  // Sigma_ll = var(h1_l) (1 - corr(h1_l, h2_l)^2) from raw score moments
  auto m = fig1(0.35);
  auto s1 = m.marginal(1), s2 = m.marginal(2);
  auto raw = moment_matrices(
      m, [&](double x) { return Eigen::VectorXd(s1.score(x)); }, [&](double x) { return Eigen::VectorXd(s2.score(x)); });
  Eigen::MatrixXd A = s1.fisher_information().inverse(), B = s2.fisher_information().inverse();
  Eigen::MatrixXd chh = A * raw.c_hh * A.transpose(), chl = A * raw.c_hl * B.transpose(),
                  cll = B * raw.c_ll * B.transpose();
  auto S = asym_cov(Method::MarginalMlMf, m);
  for (int l = 0; l < 2; ++l) {
    double corr2 = chl(l, l) * chl(l, l) / (chh(l, l) * cll(l, l));
    EXPECT_NEAR(S(l, l), chh(l, l) * (1 - corr2), 1e-10 * chh(l, l));
  }
}

TEST(AsymCov, GaussianOptimalAlpha) {
  auto m = JointModel::bivariate_gaussian(2.0, 16.0, 2.0, 1.0, 0.5);
  auto spec = moment_map(FamilyId::Gaussian);
  auto mm = moment_matrices(m, spec.h);
  auto G = spec.jacobian(mm.mean_h);
  auto a = optimal_alphas(mm, G);
  EXPECT_NEAR(a[0](0), 2.0, 1e-9);
  EXPECT_NEAR(a[0](1), 0.0, 1e-9);
  EXPECT_NEAR(a[1](0), 4.0, 1e-8);
  EXPECT_NEAR(a[1](1), 4.0, 1e-8);
}

TEST(AsymCov, GaussianFiniteMJointMl) {
  double v1 = 2.5, rho = 0.7, kappa = 0.6;
  auto m = JointModel::bivariate_gaussian(1.0, v1, 0.5, 1.5, rho);
  AsymOptions o;
  o.kappa = kappa;
  auto S = asym_cov(Method::JointMl, m, o);
  EXPECT_NEAR(S(0, 0), v1 * (1 - kappa * rho * rho), 1e-6);
  EXPECT_NEAR(S(1, 1), 2 * v1 * v1 * (1 - kappa * std::pow(rho, 4)), 1e-5);
  EXPECT_NEAR(S(0, 1), 0.0, 1e-6);
  // the moment and likelihood routes coincide for the gaussian
  auto M = asym_cov(Method::MomentMf, m, o), L = asym_cov(Method::MarginalMlMf, m, o);
  EXPECT_NEAR(M(0, 0), S(0, 0), 1e-8);
  EXPECT_NEAR(L(1, 1), S(1, 1), 1e-6);
  EXPECT_NEAR(asym_cov(Method::MfmcMean, m, o)(0, 0), S(0, 0), 1e-9);
}

TEST(AsymCov, BernoulliCopula) {
  auto m = JointModel::bernoulli_copula(0.3, 0.5, Copula(CopulaId::Gaussian, 0.7));
  double C = m.copula()(0.3, 0.5);
  double cov = C - 0.15, corr2 = cov * cov / (0.21 * 0.25);
  auto mf = asym_cov(Method::MomentMf, m)(0, 0), mml = asym_cov(Method::MarginalMlMf, m)(0, 0);
  EXPECT_NEAR(mf, 0.21 * (1 - corr2), 1e-12);
  EXPECT_NEAR(mml, mf, 1e-12);
  AsymOptions o;
  o.dependence_known = true;
  EXPECT_LE(asym_cov(Method::JointMl, m, o)(0, 0), mf);
  EXPECT_NEAR(asym_cov(Method::BaselineMl, m)(0, 0), 0.21, 1e-15);
}

TEST(AsymCov, MixtureBaseline) {
  auto m = JointModel::bernoulli_mixture(0.5);
  EXPECT_NEAR(asym_cov(Method::BaselineMl, m)(0, 0), 0.75, 1e-15);
  EXPECT_NEAR(asym_cov(Method::BaselineMoment, m)(0, 0), 0.75, 1e-14);
  EXPECT_LT(asym_cov(Method::JointMl, JointModel::bernoulli_mixture(0.9))(0, 0),
            asym_cov(Method::BaselineMl, JointModel::bernoulli_mixture(0.9))(0, 0));
}

TEST(VarianceCurve, RowsAndMissingPoints) {
  std::vector<double> grid = {0.5, 1.0};
  auto c = variance_curve(fig1(0.5), grid, {Method::BaselineMl, Method::JointMl}, location_only());
  ASSERT_EQ(c.rows.size(), 4u);
  EXPECT_EQ(c.rows[0].component, "location");
  EXPECT_NEAR(*c.rows[3].variance, 16.0, 1e-6);
  auto bad = variance_curve(fig1(0.5), {0.5, 1.5}, {Method::BaselineMl});
  EXPECT_FALSE(bad.rows.back().variance.has_value());
  EXPECT_EQ(bad.warnings.size(), 1u);
}
