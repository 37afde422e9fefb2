#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mfmc/asymptotics/information.hpp"
#include "mfmc/estimators/baseline.hpp"
#include "mfmc/estimators/dataset.hpp"
#include "mfmc/estimators/estimate.hpp"
#include "mfmc/models/joint.hpp"
#include "mfmc/numerics/optimize.hpp"

namespace mfmc {

inline constexpr double min_logistic_r = 1e-3;
inline constexpr double max_abs_rho = 1.0 - 1e-6;

struct JointMlOptions {
  bool theta2_known = true;
  bool dependence_known = false;
  bool compute_covariance = true;
  InfoOptions info;
  OptimOptions optim;
};

// Sample Kendall tau, O(n^2).
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  long long s = 0, tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double p = (x[i] - x[j]) * (y[i] - y[j]);
      s += (p > 0) - (p < 0);
      ++tot;
    }
  return tot ? static_cast<double>(s) / static_cast<double>(tot) : 0.0;
}

namespace detail {

// unconstrained coordinate <-> model coordinate
struct Transform {
  enum Kind { Identity, Log, Interval } kind = Identity;
  double lo = 0.0, hi = 1.0;
  double to_model(double u) const {
    switch (kind) {
      case Log: return std::exp(u);
      case Interval: return lo + (hi - lo) / (1.0 + std::exp(-u));
      default: return u;
    }
  }
  double to_free(double t) const {
    switch (kind) {
      case Log: return std::log(t);
      case Interval: {
        double q = std::clamp((t - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
        return std::log(q / (1.0 - q));
      }
      default: return t;
    }
  }
};

inline Transform interval(double lo, double hi) { return {Transform::Interval, lo, hi}; }

inline std::vector<Transform> transforms(const JointModel& m) {
  switch (m.id()) {
    case ModelId::BivariateGaussian:
      return {{}, {Transform::Log}, {}, {Transform::Log}, interval(-max_abs_rho, max_abs_rho)};
    case ModelId::BivariateGumbel:
      return {{}, {Transform::Log}, {}, {Transform::Log}, interval(min_logistic_r, 1.0)};
    case ModelId::BernoulliCopula: {
      std::vector<Transform> t = {interval(0, 1), interval(0, 1)};
      if (m.size() == 3)
        t.push_back(m.copula_id() == CopulaId::Gaussian ? interval(-max_abs_rho, max_abs_rho)
                                                        : interval(min_logistic_r, 1.0));
      return t;
    }
    case ModelId::BernoulliMixture: return {interval(0, 1)};
  }
  return {};
}

inline double dependence_start(const MFDataset& ds, const JointModel& m) {
  switch (m.id()) {
    case ModelId::BivariateGaussian: {
      const auto& w = ds.paired_weights();
      double c = weighted_cov(ds.x1(), ds.x2(), w);
      double r = c / std::sqrt(weighted_cov(ds.x1(), ds.x1(), w) * weighted_cov(ds.x2(), ds.x2(), w));
      return std::clamp(r, -0.95, 0.95);
    }
    case ModelId::BivariateGumbel:
      // tau = 1 - r for the logistic model
      return std::clamp(1.0 - kendall_tau(ds.x1(), ds.x2()), 0.05, 0.95);
    default: return m.dependence();
  }
}

}  // namespace detail

// Rebuild the full parameter vector of a fitted joint model.
inline JointModel fitted_model(const JointModel& tmpl, const Estimate& e) {
  Eigen::VectorXd eta = tmpl.eta();
  ParamLayout L = tmpl.layout();
  for (std::size_t i = 0; i < L.theta1.size(); ++i) eta(L.theta1[i]) = e.theta1(i);
  if (e.theta2)
    for (std::size_t i = 0; i < L.theta2.size(); ++i) eta(L.theta2[i]) = (*e.theta2)(i);
  if (e.theta12)
    for (std::size_t i = 0; i < L.dependence.size(); ++i) eta(L.dependence[i]) = (*e.theta12)(i);
  return tmpl.with_eta(eta);
}

// Joint maximum likelihood over the paired block (and low-fidelity block when theta2 is free).
// tmpl supplies the model family and any known coordinates.
inline Estimate joint_ml(const MFDataset& ds, const JointModel& tmpl, const JointMlOptions& o = {}) {
  ParamLayout L = tmpl.layout();
  auto tr = detail::transforms(tmpl);
  std::vector<int> free = L.theta1;
  if (!o.theta2_known) free.insert(free.end(), L.theta2.begin(), L.theta2.end());
  if (!o.dependence_known) free.insert(free.end(), L.dependence.begin(), L.dependence.end());

  // data-driven starting values
  Eigen::VectorXd eta0 = tmpl.eta();
  const bool discrete = tmpl.is_discrete();
  if (tmpl.id() == ModelId::BernoulliMixture) {
    double p1 = weighted_mean(ds.x1(), ds.paired_weights());
    eta0(0) = std::clamp(p1 / tmpl.mixing().m1(), 0.02, 0.98);
  } else {
    FamilyId fam = model_family(tmpl.id());
    Eigen::VectorXd t1 = marginal_mle(ds.x1(), ds.paired_weights(), fam);
    for (std::size_t i = 0; i < L.theta1.size(); ++i) eta0(L.theta1[i]) = t1(i);
    if (!o.theta2_known) {
      auto all = ds.all_lofi();
      auto wall = ds.all_lofi_weights();
      Eigen::VectorXd t2 = marginal_mle(all, wall, fam);
      for (std::size_t i = 0; i < L.theta2.size(); ++i) eta0(L.theta2[i]) = t2(i);
    }
    if (!o.dependence_known && !L.dependence.empty() && !discrete)
      eta0(L.dependence[0]) = detail::dependence_start(ds, tmpl);
  }

  const auto& x1 = ds.x1();
  const auto& x2 = ds.x2();
  const auto& wp = ds.paired_weights();
  const auto& lofi = ds.lofi();
  const auto& wl = ds.lofi_weights();
  const double n = static_cast<double>(ds.n()), m = static_cast<double>(ds.m());
  const bool use_lofi = !o.theta2_known && ds.m() > 0;
  const double share = use_lofi ? n / (n + m) : 1.0;

  auto unpack = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd eta = eta0;
    for (std::size_t a = 0; a < free.size(); ++a) eta(free[a]) = tr[free[a]].to_model(u(a));
    return eta;
  };
  Objective nll = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd eta = unpack(u);
    double acc = 0.0;
    try {
      JointModel mdl = tmpl.with_eta(eta);
      std::vector<double> t(x1.size());
      for (std::size_t i = 0; i < x1.size(); ++i) t[i] = wp[i] * mdl.log_density(x1[i], x2[i]);
      acc = share * pairwise_sum(t);
      if (use_lofi) {
        MarginalFamily f2 = mdl.marginal(2);
        std::vector<double> s(lofi.size());
        for (std::size_t j = 0; j < lofi.size(); ++j) s[j] = wl[j] * f2.log_density(lofi[j]);
        acc += (1.0 - share) * pairwise_sum(s);
      }
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
    return std::isfinite(acc) ? -acc : std::numeric_limits<double>::infinity();
  };

  Eigen::VectorXd u0(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) u0(a) = tr[free[a]].to_free(eta0(free[a]));
  OptimResult res = minimize(nll, u0, o.optim);
  if (!res.converged)
    fail(ErrorKind::EstimationFailure, "estimators",
         "joint likelihood optimisation did not converge after " + std::to_string(res.attempts) +
             " attempts (gradient norm " + std::to_string(res.gradient_norm) + ")");
  Eigen::VectorXd eta = unpack(res.x);
  JointModel fit = tmpl.with_eta(eta);

  Estimate e;
  e.method = Method::JointMl;
  e.labels = tmpl.id() == ModelId::BernoulliMixture ? std::vector<std::string>{"p"}
                                                     : family_labels(model_family(tmpl.id()));
  e.theta1.resize(L.theta1.size());
  for (std::size_t i = 0; i < L.theta1.size(); ++i) e.theta1(i) = eta(L.theta1[i]);
  if (!L.theta2.empty()) {
    Eigen::VectorXd t2(L.theta2.size());
    for (std::size_t i = 0; i < L.theta2.size(); ++i) t2(i) = eta(L.theta2[i]);
    e.theta2 = t2;
  }
  if (!L.dependence.empty()) {
    Eigen::VectorXd d(L.dependence.size());
    for (std::size_t i = 0; i < L.dependence.size(); ++i) d(i) = eta(L.dependence[i]);
    e.theta12 = d;
    if (!o.dependence_known) {
      const auto& t = tr[L.dependence[0]];
      double span = t.hi - t.lo;
      if (d(0) - t.lo < 1e-4 * span || t.hi - d(0) < 1e-4 * span)
        e.warnings.push_back("dependence estimate is at the boundary of its domain");
    }
  }
  if (res.attempts > 1) e.warnings.push_back("optimizer needed " + std::to_string(res.attempts) + " attempts");
  e.n = ds.n();
  e.m = ds.m();
  e.infinite_m = true;
  if (o.compute_covariance) {
    std::vector<int> info_idx = L.theta1;
    if (!o.dependence_known) info_idx.insert(info_idx.end(), L.dependence.begin(), L.dependence.end());
    Eigen::MatrixXd inv = checked_inverse(fisher_information(fit, info_idx, o.info), "estimators");
    int k = static_cast<int>(L.theta1.size());
    e.sigma = inv.topLeftCorner(k, k);
  }
  return e;
}

struct RegressionFit {
  double a = 0, b = 0, resid_var = 0, mu2 = 0, var2 = 0;
  Estimate estimate;
};

namespace detail {
struct GaussStats {
  double x1, x2n, x2all, v2all, s11, s12, s22;
};
inline GaussStats gauss_stats(const MFDataset& ds) {
  const auto& wp = ds.paired_weights();
  auto all = ds.all_lofi();
  auto wall = ds.all_lofi_weights();
  GaussStats s;
  s.x1 = weighted_mean(ds.x1(), wp);
  s.x2n = weighted_mean(ds.x2(), wp);
  s.x2all = weighted_mean(all, wall);
  s.v2all = weighted_cov(all, all, wall);
  s.s11 = weighted_cov(ds.x1(), ds.x1(), wp);
  s.s12 = weighted_cov(ds.x1(), ds.x2(), wp);
  s.s22 = weighted_cov(ds.x2(), ds.x2(), wp);
  if (!(s.s22 > 0.0)) fail(ErrorKind::DegenerateData, "estimators", "paired low-fidelity samples are all equal");
  return s;
}

inline Eigen::MatrixXd gauss_joint_sigma(double var1, double rho, double kappa) {
  Eigen::Matrix2d S;
  S << var1 * (1.0 - kappa * rho * rho), 0.0, 0.0, 2.0 * var1 * var1 * (1.0 - kappa * std::pow(rho, 4));
  return S;
}
}  // namespace detail

// Closed-form joint maximum likelihood for the bivariate Gaussian with theta2 unknown.
inline Estimate gaussian_joint_ml_closed(const MFDataset& ds) {
  auto s = detail::gauss_stats(ds);
  double beta = s.s12 / s.s22;
  double mu1 = s.x1 + beta * (s.x2all - s.x2n);
  double var1 = s.s11 + beta * beta * (s.v2all - s.s22);
  double rho = beta * s.v2all / std::sqrt(var1 * s.v2all);
  Estimate e;
  e.method = Method::JointMlClosed;
  e.labels = family_labels(FamilyId::Gaussian);
  e.theta1 = Eigen::Vector2d(mu1, var1);
  e.theta2 = Eigen::Vector2d(s.x2all, s.v2all);
  e.theta12 = Eigen::VectorXd::Constant(1, rho);
  e.sigma = detail::gauss_joint_sigma(var1, rho, ds.kappa());
  e.n = ds.n();
  e.m = ds.m();
  return e;
}

// X1 = a + b X2 + eps on the paired block; X2 law from all n + m samples.
inline RegressionFit regression_route_gaussian(const MFDataset& ds) {
  auto s = detail::gauss_stats(ds);
  RegressionFit r;
  r.b = s.s12 / s.s22;
  r.a = s.x1 - r.b * s.x2n;
  r.resid_var = s.s11 - r.b * s.s12;
  r.mu2 = s.x2all;
  r.var2 = s.v2all;
  double mu1 = r.a + r.b * r.mu2;
  double var1 = r.b * r.b * r.var2 + r.resid_var;
  double rho = r.b * std::sqrt(r.var2 / var1);
  Estimate& e = r.estimate;
  e.method = Method::RegressionGaussian;
  e.labels = family_labels(FamilyId::Gaussian);
  e.theta1 = Eigen::Vector2d(mu1, var1);
  e.theta2 = Eigen::Vector2d(r.mu2, r.var2);
  e.theta12 = Eigen::VectorXd::Constant(1, rho);
  e.sigma = detail::gauss_joint_sigma(var1, rho, ds.kappa());
  e.n = ds.n();
  e.m = ds.m();
  return r;
}

}  // namespace mfmc
