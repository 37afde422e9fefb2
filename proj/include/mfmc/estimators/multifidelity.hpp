#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "mfmc/asymptotics/information.hpp"
#include "mfmc/asymptotics/moment_matrices.hpp"
#include "mfmc/estimators/baseline.hpp"
#include "mfmc/estimators/dataset.hpp"
#include "mfmc/estimators/estimate.hpp"
#include "mfmc/estimators/optimal_alpha.hpp"
#include "mfmc/models/joint.hpp"
#include "mfmc/models/moment_map.hpp"

namespace mfmc {

struct CoefficientChoice {
  enum class Kind { OptimalPlugin, OptimalTrue, Fixed };
  Kind kind = Kind::OptimalPlugin;
  std::optional<JointModel> model;     // OptimalTrue
  std::vector<Eigen::VectorXd> alpha;  // Fixed, moment-based
  Eigen::VectorXd beta;                // Fixed, likelihood-based

  static CoefficientChoice plugin() { return {}; }
  static CoefficientChoice truth(const JointModel& m) {
    CoefficientChoice c;
    c.kind = Kind::OptimalTrue;
    c.model = m;
    return c;
  }
  static CoefficientChoice fixed_alpha(std::vector<Eigen::VectorXd> a) {
    CoefficientChoice c;
    c.kind = Kind::Fixed;
    c.alpha = std::move(a);
    return c;
  }
  static CoefficientChoice fixed_beta(Eigen::VectorXd b) {
    CoefficientChoice c;
    c.kind = Kind::Fixed;
    c.beta = std::move(b);
    return c;
  }
  const char* mode() const {
    switch (kind) {
      case Kind::OptimalPlugin: return "optimal-plugin";
      case Kind::OptimalTrue: return "optimal-true";
      case Kind::Fixed: return "fixed";
    }
    return "?";
  }
};

struct MfOptions {
  CoefficientChoice coef;
  // when set, low-fidelity population quantities come from this model (m = infinity)
  std::optional<JointModel> known_lofi;
  // cached known_lofi moments of the moment features, to skip the quadrature per call
  std::optional<MomentMatrices> lofi_moments;
  QuadratureOptions quad;
};

namespace detail {
inline const JointModel& true_model(const MfOptions& o) {
  if (!o.coef.model) fail(ErrorKind::Usage, "estimators", "optimal-true coefficients need a model");
  return *o.coef.model;
}
}  // namespace detail

// Control-variate mean: x1bar + alpha (x2bar over n+m - x2bar over n).
inline Estimate mfmc_mean(const MFDataset& ds, const MfOptions& o = {}) {
  const auto& wp = ds.paired_weights();
  auto all = ds.all_lofi();
  auto wall = ds.all_lofi_weights();
  double x1 = weighted_mean(ds.x1(), wp), x2n = weighted_mean(ds.x2(), wp);
  double x2all = o.known_lofi ? o.known_lofi->marginal(2).mean() : weighted_mean(all, wall);
  double kappa = o.known_lofi ? 1.0 : ds.kappa();
  double v1 = weighted_cov(ds.x1(), ds.x1(), wp), c12 = weighted_cov(ds.x1(), ds.x2(), wp);
  double v2 = weighted_cov(ds.x2(), ds.x2(), wp);
  double alpha = 0.0;
  switch (o.coef.kind) {
    case CoefficientChoice::Kind::OptimalPlugin:
      if (!(v2 > 0.0)) fail(ErrorKind::DegenerateData, "estimators", "low-fidelity samples have zero variance");
      alpha = c12 / v2;
      break;
    case CoefficientChoice::Kind::OptimalTrue: {
      auto id = [](double x) { return Eigen::VectorXd::Constant(1, x); };
      MomentMatrices mm = moment_matrices(detail::true_model(o), id, MomentOptions{MomentMethod::Quadrature, o.quad});
      v1 = mm.c_hh(0, 0);
      c12 = mm.c_hl(0, 0);
      v2 = mm.c_ll(0, 0);
      alpha = c12 / v2;
      break;
    }
    case CoefficientChoice::Kind::Fixed:
      if (o.coef.alpha.empty() || o.coef.alpha[0].size() != 1)
        fail(ErrorKind::Usage, "estimators", "fixed alpha needs exactly one value");
      alpha = o.coef.alpha[0](0);
      break;
  }
  Estimate e;
  e.method = Method::MfmcMean;
  e.labels = {"mean"};
  e.theta1 = Eigen::VectorXd::Constant(1, x1 + alpha * (x2all - x2n));
  e.sigma = Eigen::MatrixXd::Constant(1, 1, v1 + kappa * (alpha * alpha * v2 - 2.0 * alpha * c12));
  e.n = ds.n();
  e.m = ds.m();
  e.infinite_m = o.known_lofi.has_value();
  e.coefficients = Coefficients{o.coef.mode(), {Eigen::VectorXd::Constant(1, alpha)}, {}};
  return e;
}

// Moment-based multifidelity estimator: component l uses alpha(l) inside g.
inline Estimate moment_mf(const MFDataset& ds, const MomentSpec& spec, const MfOptions& o = {}) {
  const auto& wp = ds.paired_weights();
  auto all = ds.all_lofi();
  auto wall = ds.all_lofi_weights();
  Eigen::MatrixXd H1 = feature_rows(ds.x1(), spec.h), H2 = feature_rows(ds.x2(), spec.h);
  Eigen::VectorXd y1 = weighted_col_mean(H1, wp), y2n = weighted_col_mean(H2, wp);
  Eigen::MatrixXd G = spec.jacobian(y1);

  MomentMatrices plug;
  plug.c_hh = weighted_cross_cov(H1, H1, wp);
  plug.c_hl = weighted_cross_cov(H1, H2, wp);
  // second moments all from the paired block, even when the low-fi law is known: a c_ll that does
  // not match the sample c_hl inflates the variance of the plug-in alpha far beyond Sigma
  plug.c_ll = weighted_cross_cov(H2, H2, wp);
  Eigen::VectorXd y2all;
  if (o.known_lofi) {
    MomentMatrices lm = o.lofi_moments ? *o.lofi_moments
                                       : moment_matrices(*o.known_lofi, spec.h, MomentOptions{MomentMethod::Quadrature, o.quad});
    if (lm.mean_l.size() != spec.dim) fail(ErrorKind::Usage, "estimators", "cached moments do not match the features");
    y2all = lm.mean_l;
  } else {
    y2all = weighted_col_mean(feature_rows(all, spec.h), wall);
  }
  double kappa = o.known_lofi ? 1.0 : ds.kappa();

  std::vector<Eigen::VectorXd> alpha;
  Eigen::MatrixXd sigma;
  switch (o.coef.kind) {
    case CoefficientChoice::Kind::OptimalPlugin:
      alpha = optimal_alphas(plug, G);
      sigma = mf_covariance(plug.c_hh, plug.c_hl, plug.c_ll, G, alpha, kappa);
      break;
    case CoefficientChoice::Kind::OptimalTrue: {
      MomentMatrices mm = moment_matrices(detail::true_model(o), spec.h, MomentOptions{MomentMethod::Quadrature, o.quad});
      Eigen::MatrixXd Gt = spec.jacobian(mm.mean_h);
      alpha = optimal_alphas(mm, Gt);
      sigma = mf_covariance(mm.c_hh, mm.c_hl, mm.c_ll, Gt, alpha, kappa);
      break;
    }
    case CoefficientChoice::Kind::Fixed:
      alpha = o.coef.alpha;
      if (static_cast<int>(alpha.size()) != spec.params)
        fail(ErrorKind::Usage, "estimators", "fixed alpha needs one vector per component");
      for (const auto& a : alpha)
        if (a.size() != spec.dim) fail(ErrorKind::Usage, "estimators", "fixed alpha vector has the wrong length");
      sigma = mf_covariance(plug.c_hh, plug.c_hl, plug.c_ll, G, alpha, kappa);
      break;
  }

  Estimate e;
  e.method = Method::MomentMf;
  e.theta1.resize(spec.params);
  for (int l = 0; l < spec.params; ++l) {
    Eigen::VectorXd mu = y1 + alpha[l].cwiseProduct(y2all - y2n);
    e.theta1(l) = spec.g(mu)(l);
  }
  e.sigma = sigma;
  e.n = ds.n();
  e.m = ds.m();
  e.infinite_m = o.known_lofi.has_value();
  e.coefficients = Coefficients{o.coef.mode(), alpha, {}};
  return e;
}

inline Estimate moment_mf(const MFDataset& ds, FamilyId f, const MfOptions& o = {}) {
  Estimate e = moment_mf(ds, moment_map(f), o);
  e.labels = family_labels(f);
  return e;
}

// Influence function I^{-1} score of a marginal fit.
inline FeatureMap influence_map(const MarginalFamily& fam) {
  Eigen::MatrixXd inv = checked_inverse(fam.fisher_information(), "estimators");
  return [fam, inv](double x) { return Eigen::VectorXd(inv * fam.score(x)); };
}

// Likelihood-based multifidelity estimator: theta1 + beta (theta2 over n+m - theta2 over n).
inline Estimate marginal_ml_mf(const MFDataset& ds, FamilyId f, const MfOptions& o = {}) {
  const auto& wp = ds.paired_weights();
  auto all = ds.all_lofi();
  auto wall = ds.all_lofi_weights();
  Eigen::VectorXd t1 = marginal_mle(ds.x1(), wp, f), t2n = marginal_mle(ds.x2(), wp, f);
  Eigen::VectorXd t2all = o.known_lofi ? o.known_lofi->marginal(2).theta() : marginal_mle(all, wall, f);
  double kappa = o.known_lofi ? 1.0 : ds.kappa();
  const int d = family_dim(f);

  // plug-in second moments: model standard deviations around the joint empirical correlation
  // of the influence functions, PSD by construction
  MarginalFamily F1(f, t1), F2(f, t2all);
  Eigen::MatrixXd i11 = checked_inverse(F1.fisher_information(), "estimators");
  Eigen::MatrixXd i22 = checked_inverse(F2.fisher_information(), "estimators");
  Eigen::MatrixXd AB(ds.n(), 2 * d);
  AB << feature_rows(ds.x1(), influence_map(F1)), feature_rows(ds.x2(), influence_map(F2));
  Eigen::MatrixXd C = weighted_cross_cov(AB, AB, wp);
  Eigen::VectorXd sd(2 * d);
  sd << i11.diagonal().cwiseSqrt(), i22.diagonal().cwiseSqrt();
  Eigen::MatrixXd J(2 * d, 2 * d);
  for (int a = 0; a < 2 * d; ++a)
    for (int b = 0; b < 2 * d; ++b) {
      double den = std::sqrt(C(a, a) * C(b, b));
      J(a, b) = a == b ? sd(a) * sd(a) : den > 0.0 ? C(a, b) / den * sd(a) * sd(b) : 0.0;
    }
  Eigen::MatrixXd c11 = J.topLeftCorner(d, d), c12 = J.topRightCorner(d, d), c22 = J.bottomRightCorner(d, d);

  Eigen::VectorXd beta(d);
  Eigen::MatrixXd h11 = c11, h12 = c12, h22 = c22;
  switch (o.coef.kind) {
    case CoefficientChoice::Kind::OptimalPlugin:
      for (int l = 0; l < d; ++l) beta(l) = c12(l, l) / c22(l, l);
      break;
    case CoefficientChoice::Kind::OptimalTrue: {
      const JointModel& m = detail::true_model(o);
      MomentMatrices mm = moment_matrices(m, influence_map(m.marginal(1)), influence_map(m.marginal(2)),
                                          MomentOptions{MomentMethod::Quadrature, o.quad});
      for (int l = 0; l < d; ++l) beta(l) = mm.c_hl(l, l) / mm.c_ll(l, l);
      h11 = mm.c_hh;
      h12 = mm.c_hl;
      h22 = mm.c_ll;
      break;
    }
    case CoefficientChoice::Kind::Fixed:
      if (o.coef.beta.size() != d) fail(ErrorKind::Usage, "estimators", "fixed beta has the wrong length");
      beta = o.coef.beta;
      break;
  }
  std::vector<Eigen::VectorXd> alpha(d, Eigen::VectorXd::Zero(d));
  for (int l = 0; l < d; ++l) alpha[l](l) = beta(l);

  Estimate e;
  e.method = Method::MarginalMlMf;
  e.labels = family_labels(f);
  e.theta1 = t1 + beta.cwiseProduct(t2all - t2n);
  e.theta2 = t2all;
  e.sigma = mf_covariance(h11, h12, h22, Eigen::MatrixXd::Identity(d, d), alpha, kappa);
  e.n = ds.n();
  e.m = ds.m();
  e.infinite_m = o.known_lofi.has_value();
  e.coefficients = Coefficients{o.coef.mode(), {}, beta};
  return e;
}

}  // namespace mfmc
