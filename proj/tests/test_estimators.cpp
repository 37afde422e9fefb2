#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mfmc/estimators.hpp"

using namespace mfmc;

namespace {

MFDataset simulate(const JointModel& m, std::size_t n, std::size_t extra, std::uint64_t seed) {
  RngStream rng(seed);
  auto s = m.sample(n + extra, rng);
  std::vector<double> a, b, l;
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(s[i].first);
    b.push_back(s[i].second);
  }
  for (std::size_t i = n; i < n + extra; ++i) l.push_back(s[i].second);
  return MFDataset(a, b, l);
}

// independent positive-definite random matrix
Eigen::MatrixXd random_spd(int d, RngStream& rng) {
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  return A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

TEST(Dataset, ValidatesInput) {
  EXPECT_THROW(MFDataset({1.0}, {2.0}), Error);
  EXPECT_THROW(MFDataset({1.0, 2.0}, {2.0}), Error);
  EXPECT_THROW(MFDataset({1.0, 2.0}, {2.0, 3.0}, {}, {1.0, -1.0}), Error);
  MFDataset d({1.0, 2.0}, {2.0, 3.0}, {5.0}, {2.0, 6.0});
  EXPECT_DOUBLE_EQ(d.paired_weights()[0], 0.25);
  EXPECT_DOUBLE_EQ(d.paired_weights()[1], 0.75);
  EXPECT_FALSE(d.uniform_weights());
  auto w = d.all_lofi_weights();
  EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-15);
  EXPECT_NEAR(w[2], 1.0 / 3.0, 1e-15);
}

TEST(MfmcMean, WorkedExamples) {
  MFDataset d({1.0, 3.0}, {2.0, 4.0}, {6.0, 8.0});
  MfOptions one;
  one.coef = CoefficientChoice::fixed_alpha({Eigen::VectorXd::Constant(1, 1.0)});
  EXPECT_NEAR(mfmc_mean(d, one).theta1(0), 4.0, 1e-14);
  MfOptions zero;
  zero.coef = CoefficientChoice::fixed_alpha({Eigen::VectorXd::Constant(1, 0.0)});
  EXPECT_NEAR(mfmc_mean(d, zero).theta1(0), 2.0, 1e-14);

  MFDataset twice({1.0, 2.0, 4.0, 7.0}, {2.0, 4.0, 8.0, 14.0});
  auto e = mfmc_mean(twice);
  EXPECT_NEAR(e.coefficients->alpha[0](0), 0.5, 1e-14);
  EXPECT_EQ(e.coefficients->mode, "optimal-plugin");
}

TEST(MfmcMean, ZeroLowFidelityVarianceIsDegenerate) {
  MFDataset d({1.0, 3.0}, {2.0, 2.0}, {2.0});
  try {
    mfmc_mean(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateData);
  }
}

TEST(MfmcMean, VarianceFormula) {
  auto m = JointModel::bivariate_gaussian(0.0, 4.0, 1.0, 1.0, 0.9);
  MfOptions o;
  o.coef = CoefficientChoice::truth(m);
  auto d = simulate(m, 50, 450, 3);
  auto e = mfmc_mean(d, o);
  // sigma1^2 (1 - kappa rho^2)
  EXPECT_NEAR(e.sigma(0, 0), 4.0 * (1.0 - 0.9 * 0.81), 1e-8);
  EXPECT_NEAR(e.coefficients->alpha[0](0), 0.9 * 2.0, 1e-8);
}

TEST(BaselineMl, GaussianClosedForm) {
  std::vector<double> x = {0.0, 2.0};
  auto e = baseline_ml(x, FamilyId::Gaussian);
  EXPECT_DOUBLE_EQ(e.theta1(0), 1.0);
  EXPECT_DOUBLE_EQ(e.theta1(1), 1.0);
  EXPECT_NEAR(e.sigma(1, 1), 2.0, 1e-14);
}

TEST(BaselineMl, UniformWeightsMatchUnweighted) {
  RngStream rng(4);
  std::vector<double> x;
  auto g = JointModel::bivariate_gumbel(2, 4, 2, 1, 1.0);
  for (auto [a, b] : g.sample(300, rng)) x.push_back(a);
  std::vector<double> w(x.size(), 7.0);
  MFDataset d(x, x, {}, w);
  for (auto f : {FamilyId::Gaussian, FamilyId::Gumbel}) {
    auto a = baseline_ml(x, f);
    auto b = baseline_ml(d.x1(), d.paired_weights(), f);
    EXPECT_NEAR((a.theta1 - b.theta1).norm(), 0.0, 1e-13);
  }
}

TEST(BaselineMl, GumbelMatchesDirectMaximisation) {
  RngStream rng(8);
  std::vector<double> x;
  auto g = JointModel::bivariate_gumbel(2, 4, 2, 1, 1.0);
  for (auto [a, b] : g.sample(500, rng)) x.push_back(a);
  auto e = baseline_ml(x, FamilyId::Gumbel);
  Objective nll = [&](const Eigen::VectorXd& u) {
    MarginalFamily f = MarginalFamily::gumbel(u(0), std::exp(u(1)));
    double s = 0;
    for (double v : x) s -= f.log_density(v);
    return s / x.size();
  };
  auto r = minimize(nll, Eigen::Vector2d(0.0, 0.0));
  EXPECT_NEAR(e.theta1(0), r.x(0), 1e-6);
  EXPECT_NEAR(e.theta1(1), std::exp(r.x(1)), 1e-6);
  // score equations hold
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  MarginalFamily f(FamilyId::Gumbel, e.theta1);
  for (double v : x) s += f.score(v);
  EXPECT_LT(s.norm() / x.size(), 1e-10);
}

TEST(BaselineMl, BernoulliAndDegenerate) {
  std::vector<double> x = {1, 0, 1, 1};
  auto e = baseline_ml(x, FamilyId::Bernoulli);
  EXPECT_DOUBLE_EQ(e.theta1(0), 0.75);
  EXPECT_NEAR(e.sigma(0, 0), 0.1875, 1e-15);
  std::vector<double> same = {3, 3, 3};
  EXPECT_THROW(baseline_ml(same, FamilyId::Gaussian), Error);
  EXPECT_THROW(baseline_ml(same, FamilyId::Gumbel), Error);
}

TEST(BaselineMoment, GumbelTwoPoints) {
  std::vector<double> x = {2.0, 6.0};
  auto e = baseline_moment(x, FamilyId::Gumbel);
  // mean 4, variance 4: scale sqrt(24)/pi, location 4 - gamma scale
  double s = std::sqrt(24.0) / pi;
  EXPECT_NEAR(e.theta1(1), s, 1e-14);
  EXPECT_NEAR(e.theta1(0), 4.0 - euler_gamma * s, 1e-14);
  EXPECT_NEAR(e.theta1(0), 3.0998935849086107, 1e-12);
  EXPECT_NEAR(e.theta1(1), 1.5593936024673523, 1e-12);
}

TEST(BaselineMoment, BernoulliAndCovariance) {
  std::vector<double> x = {1, 0, 1, 1};
  auto e = baseline_moment(x, FamilyId::Bernoulli);
  EXPECT_DOUBLE_EQ(e.theta1(0), 0.75);
  EXPECT_NEAR(e.sigma(0, 0), 0.1875, 1e-15);
  // gaussian: Sigma = G Var(h) G' equals the delta method by hand
  std::vector<double> y = {0.0, 1.0, 3.0, 4.0};
  auto g = baseline_moment(y, FamilyId::Gaussian);
  EXPECT_NEAR(g.theta1(0), 2.0, 1e-14);
  EXPECT_NEAR(g.theta1(1), 2.5, 1e-14);
  // central moments: m2 = 2.5, m3 = 0, m4 = (16 + 1 + 1 + 16)/4 = 8.5
  EXPECT_NEAR(g.sigma(0, 0), 2.5, 1e-12);
  EXPECT_NEAR(g.sigma(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(g.sigma(1, 1), 8.5 - 2.5 * 2.5, 1e-12);
}

TEST(JointMlClosed, HandExample) {
  MFDataset d({0.0, 2.0}, {0.0, 2.0}, {1.0, 3.0});
  auto e = gaussian_joint_ml_closed(d);
  EXPECT_NEAR(e.theta1(0), 1.5, 1e-14);
  EXPECT_NEAR(e.theta1(1), 1.25, 1e-14);
  EXPECT_NEAR((*e.theta2)(0), 1.5, 1e-14);
  EXPECT_NEAR((*e.theta2)(1), 1.25, 1e-14);
  EXPECT_NEAR((*e.theta12)(0), 1.0, 1e-14);
}

TEST(JointMlClosed, AgreesWithRegressionAndNumericMl) {
  RngStream pick(17);
  for (int rep = 0; rep < 8; ++rep) {
    double rho = 2 * pick.uniform() - 1;
    auto m = JointModel::bivariate_gaussian(pick.normal(), 0.5 + pick.uniform(), pick.normal(),
                                            0.5 + 2 * pick.uniform(), 0.95 * rho);
    auto d = simulate(m, 20 + rep * 20, rep * 100, 100 + rep);
    auto c = gaussian_joint_ml_closed(d);
    auto r = regression_route_gaussian(d).estimate;
    EXPECT_LT((c.theta1 - r.theta1).lpNorm<Eigen::Infinity>(), 1e-10);
    JointMlOptions o;
    o.theta2_known = false;
    o.compute_covariance = false;
    auto j = joint_ml(d, m, o);
    EXPECT_LT((c.theta1 - j.theta1).lpNorm<Eigen::Infinity>(), 1e-6) << rep;
    EXPECT_LT((*c.theta2 - *j.theta2).lpNorm<Eigen::Infinity>(), 1e-6) << rep;
  }
}

TEST(JointMlClosed, SigmaMatchesReplication) {
  auto m = JointModel::bivariate_gaussian(1.0, 2.0, 0.0, 1.0, 0.8);
  const int n = 200, extra = 600, R = 1500;
  std::vector<double> a, b;
  Eigen::MatrixXd sig;
  for (int r = 0; r < R; ++r) {
    auto e = gaussian_joint_ml_closed(simulate(m, n, extra, 5000 + r));
    a.push_back(e.theta1(0));
    b.push_back(e.theta1(1));
    if (r == 0) sig = detail::gauss_joint_sigma(2.0, 0.8, 0.75);
  }
  EXPECT_NEAR(n * variance(a) / sig(0, 0), 1.0, 0.12);
  EXPECT_NEAR(n * variance(b) / sig(1, 1), 1.0, 0.12);
}

TEST(JointMlClosed, AllEqualLowFidelityIsError) {
  MFDataset d({0.0, 2.0}, {1.0, 1.0}, {1.0});
  EXPECT_THROW(gaussian_joint_ml_closed(d), Error);
}

TEST(Regression, ConsistentAtLargeN) {
  // X2 ~ N(0, 1), X1 = 1 + 2 X2 + 0.5 eps
  RngStream rng(21);
  std::vector<double> x1, x2;
  for (int i = 0; i < 10000; ++i) {
    double b = rng.normal();
    x2.push_back(b);
    x1.push_back(1.0 + 2.0 * b + 0.5 * rng.normal());
  }
  auto r = regression_route_gaussian(MFDataset(x1, x2));
  EXPECT_NEAR(r.a, 1.0, 0.02);
  EXPECT_NEAR(r.b, 2.0, 0.02);
  EXPECT_NEAR(r.resid_var, 0.25, 0.01);
}

TEST(JointMl, GaussianKnownLowFidelityMatchesConditionalFit) {
  // theta2 known: the ML is least squares plus the known X2 law
  auto m = JointModel::bivariate_gaussian(1.0, 2.0, -1.0, 0.5, 0.7);
  auto d = simulate(m, 300, 0, 9);
  auto j = joint_ml(d, m);
  auto s = detail::gauss_stats(d);
  double b = s.s12 / s.s22, a = s.x1 - b * s.x2n, ve = s.s11 - b * s.s12;
  EXPECT_NEAR(j.theta1(0), a + b * -1.0, 1e-6);
  EXPECT_NEAR(j.theta1(1), b * b * 0.5 + ve, 1e-6);
  // m = infinity asymptotics: diag(v1 (1 - rho^2), 2 v1^2 (1 - rho^4)) at the estimate
  double v1 = j.theta1(1), rho = (*j.theta12)(0);
  EXPECT_NEAR(j.sigma(0, 0), v1 * (1 - rho * rho), 1e-6);
  EXPECT_NEAR(j.sigma(1, 1), 2 * v1 * v1 * (1 - std::pow(rho, 4)), 1e-5);
  EXPECT_NEAR(j.sigma(0, 1), 0.0, 1e-6);
}

TEST(JointMl, GumbelIndependenceEqualsBaseline) {
  auto m = JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 1.0, 1.0);
  auto d = simulate(m, 400, 0, 12);
  JointMlOptions o;
  o.dependence_known = true;
  auto j = joint_ml(d, m, o);
  auto b = baseline_ml(d.x1(), FamilyId::Gumbel);
  EXPECT_NEAR(j.theta1(0), b.theta1(0), 1e-6);
  EXPECT_NEAR(j.theta1(1), b.theta1(1), 1e-6);
}

TEST(JointMl, GumbelRecoversParameters) {
  auto m = JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 1.0, 0.3);
  auto d = simulate(m, 5000, 0, 13);
  auto j = joint_ml(d, m);
  for (int i = 0; i < 2; ++i) {
    double se = std::sqrt(j.sigma(i, i) / 5000.0);
    EXPECT_LT(std::abs(j.theta1(i) - m.eta()(i)), 3 * se) << i;
  }
  EXPECT_NEAR((*j.theta12)(0), 0.3, 0.03);
  EXPECT_TRUE(j.warnings.empty());
}

TEST(JointMl, BoundaryWarning) {
  // independent data: the logistic r is pushed to 1
  auto m = JointModel::bivariate_gumbel(0.0, 1.0, 0.0, 1.0, 1.0);
  RngStream rng(2);
  std::vector<double> a, b;
  for (int i = 0; i < 400; ++i) {
    a.push_back(-std::log(rng.exponential()));
    b.push_back(-std::log(rng.exponential()));
  }
  // reverse the order of one column to make the sample discordant
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end(), std::greater<>());
  JointMlOptions o;
  o.compute_covariance = false;
  auto j = joint_ml(MFDataset(a, b), m, o);
  ASSERT_FALSE(j.warnings.empty());
  EXPECT_NE(j.warnings[0].find("boundary"), std::string::npos);
}

TEST(OptimalAlpha, ClosedFormMatchesGeneralAndNumeric) {
  RngStream rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd C = random_spd(4, rng);
    Eigen::MatrixXd chh = C.topLeftCorner(2, 2), chl = C.topRightCorner(2, 2), cll = C.bottomRightCorner(2, 2);
    Eigen::RowVector2d g(rng.normal(), rng.normal());
    Eigen::VectorXd a = optimal_alpha_2x2(chl, cll, g), b = optimal_alpha(chl, cll, g);
    EXPECT_LT((a - b).norm(), 1e-10 * (1 + a.norm()));
    Eigen::MatrixXd G = g;
    Objective var = [&](const Eigen::VectorXd& al) {
      return mf_covariance(chh, chl, cll, G, {al}, 1.0)(0, 0);
    };
    auto r = minimize(var, Eigen::Vector2d::Zero());
    EXPECT_LT((r.x - a).norm(), 1e-6 * (1 + a.norm()));
  }
  // zero Jacobian entry: that alpha is zero and the other solves the reduced system
  Eigen::MatrixXd C = random_spd(4, rng);
  Eigen::RowVector2d g(0.0, 1.5);
  auto a = optimal_alpha_2x2(C.topRightCorner(2, 2), C.bottomRightCorner(2, 2), g);
  EXPECT_EQ(a(0), 0.0);
  EXPECT_NEAR(a(1), C(1, 3) / C(3, 3), 1e-12);
}

TEST(OptimalAlpha, SingularIsReported) {
  Eigen::MatrixXd chl = Eigen::MatrixXd::Ones(2, 2), cll = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_THROW(optimal_alpha(chl, cll, Eigen::RowVector2d(1.0, 1.0)), Error);
}

TEST(MomentMf, NoExtraSamplesEqualsBaseline) {
  auto m = JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 1.0, 0.4);
  auto d = simulate(m, 200, 0, 41);
  auto mf = moment_mf(d, FamilyId::Gumbel);
  auto b = baseline_moment(d.x1(), FamilyId::Gumbel);
  EXPECT_LT((mf.theta1 - b.theta1).norm(), 1e-12);
  EXPECT_LT((mf.sigma - b.sigma).norm(), 1e-10);
}

TEST(MomentMf, PluginSigmaNotAboveBaseline) {
  auto m = JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 1.0, 0.4);
  auto d = simulate(m, 100, 2000, 42);
  auto mf = moment_mf(d, FamilyId::Gumbel);
  auto b = baseline_moment(d.x1(), FamilyId::Gumbel);
  for (int l = 0; l < 2; ++l) EXPECT_LE(mf.sigma(l, l), b.sigma(l, l) + 1e-12);
}

TEST(MarginalMlMf, UnitBetaOnIdenticalFidelities) {
  auto m = JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 4.0, 1.0);
  RngStream rng(50);
  std::vector<double> x, extra;
  for (auto [a, b] : m.sample(300, rng)) x.push_back(a);
  for (auto [a, b] : m.sample(700, rng)) extra.push_back(a);
  MFDataset d(x, x, extra);
  MfOptions o;
  o.coef = CoefficientChoice::fixed_beta(Eigen::Vector2d(1.0, 1.0));
  auto e = marginal_ml_mf(d, FamilyId::Gumbel, o);
  auto all = d.all_lofi();
  auto ref = marginal_mle(all, FamilyId::Gumbel);
  EXPECT_LT((e.theta1 - ref).norm(), 1e-10);
}

TEST(MarginalMlMf, GaussianTrueBeta) {
  double v1 = 3.0, v2 = 0.5, rho = 0.6;
  auto m = JointModel::bivariate_gaussian(0.0, v1, 1.0, v2, rho);
  auto d = simulate(m, 50, 50, 51);
  MfOptions o;
  o.coef = CoefficientChoice::truth(m);
  auto e = marginal_ml_mf(d, FamilyId::Gaussian, o);
  double k = rho * std::sqrt(v1 / v2);
  EXPECT_NEAR(e.coefficients->beta(0), k, 1e-10);
  EXPECT_NEAR(e.coefficients->beta(1), k * k, 1e-10);
}

TEST(MarginalMlMf, PluginSigmaNotAboveBaseline) {
  auto m = JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 1.0, 0.5);
  auto d = simulate(m, 100, 5000, 52);
  auto e = marginal_ml_mf(d, FamilyId::Gumbel);
  auto b = baseline_ml(d.x1(), FamilyId::Gumbel);
  for (int l = 0; l < 2; ++l) EXPECT_LE(e.sigma(l, l), b.sigma(l, l) + 1e-12);
}
