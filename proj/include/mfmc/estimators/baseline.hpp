#pragma once

#include <boost/math/tools/roots.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mfmc/asymptotics/information.hpp"
#include "mfmc/core/error.hpp"
#include "mfmc/estimators/dataset.hpp"
#include "mfmc/estimators/estimate.hpp"
#include "mfmc/models/marginal.hpp"
#include "mfmc/models/moment_map.hpp"

namespace mfmc {

namespace detail {

inline void require_spread(std::span<const double> x) {
  double lo = *std::min_element(x.begin(), x.end()), hi = *std::max_element(x.begin(), x.end());
  if (!(hi > lo)) fail(ErrorKind::DegenerateData, "estimators", "all samples are equal");
}

// Gumbel: the score in mu gives mu(sigma) = -sigma log sum w exp(-x / sigma); sigma solves
// sigma - mean + E_tilted[x] = 0, which is increasing in sigma with a single root.
inline Eigen::Vector2d gumbel_mle(std::span<const double> x, std::span<const double> w) {
  require_spread(x);
  double c = *std::min_element(x.begin(), x.end());
  double xbar = weighted_mean(x, w);
  std::vector<double> t(x.size()), u(x.size());
  auto tilted = [&](double s, double& logB) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e = w[i] * std::exp(-(x[i] - c) / s);
      t[i] = e;
      u[i] = e * x[i];
    }
    double B = pairwise_sum(t);
    logB = std::log(B);
    return pairwise_sum(u) / B;
  };
  auto psi = [&](double s) {
    double lb;
    return s - xbar + tilted(s, lb);
  };
  double s0 = std::sqrt(6.0 * weighted_cov(x, x, w)) / pi;
  double lo = s0, hi = s0;
  int guard = 0;
  while (psi(lo) >= 0.0 && guard++ < 200) lo *= 0.5;
  guard = 0;
  while (psi(hi) <= 0.0 && guard++ < 200) hi *= 2.0;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(psi, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  double s = 0.5 * (r.first + r.second), lb;
  tilted(s, lb);
  return {c - s * lb, s};
}

}  // namespace detail

// Maximum-likelihood fit of a single marginal; weights are normalised.
inline Eigen::VectorXd marginal_mle(std::span<const double> x, std::span<const double> w, FamilyId f) {
  switch (f) {
    case FamilyId::Gaussian: {
      detail::require_spread(x);
      return Eigen::Vector2d(weighted_mean(x, w), weighted_cov(x, x, w));
    }
    case FamilyId::Gumbel: return detail::gumbel_mle(x, w);
    case FamilyId::Bernoulli: {
      for (double v : x)
        if (v != 0.0 && v != 1.0) fail(ErrorKind::Dataset, "estimators", "bernoulli data must be 0 or 1");
      double p = weighted_mean(x, w);
      if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::DegenerateData, "estimators", "bernoulli sample has no variation");
      return Eigen::VectorXd::Constant(1, p);
    }
  }
  return {};
}

inline Eigen::VectorXd marginal_mle(std::span<const double> x, FamilyId f) {
  auto w = uniform_weights(x.size());
  return marginal_mle(x, w, f);
}

// Sigma is the inverse expected information at the estimate.
inline Estimate baseline_ml(std::span<const double> x, std::span<const double> w, FamilyId f) {
  Estimate e;
  e.method = Method::BaselineMl;
  e.labels = family_labels(f);
  e.theta1 = marginal_mle(x, w, f);
  e.sigma = checked_inverse(MarginalFamily(f, e.theta1).fisher_information(), "estimators");
  e.n = x.size();
  return e;
}

inline Estimate baseline_ml(std::span<const double> x, FamilyId f) {
  auto w = uniform_weights(x.size());
  return baseline_ml(x, w, f);
}

// theta = g(mean of h); Sigma = G Var(h) G' with G evaluated at the sample mean.
inline Estimate baseline_moment(std::span<const double> x, std::span<const double> w, const MomentSpec& spec) {
  Eigen::MatrixXd H = feature_rows(x, spec.h);
  Eigen::VectorXd y = weighted_col_mean(H, w);
  Eigen::MatrixXd G = spec.jacobian(y);
  Estimate e;
  e.method = Method::BaselineMoment;
  e.theta1 = spec.g(y);
  e.sigma = G * weighted_cross_cov(H, H, w) * G.transpose();
  e.n = x.size();
  return e;
}

inline Estimate baseline_moment(std::span<const double> x, const MomentSpec& spec) {
  auto w = uniform_weights(x.size());
  return baseline_moment(x, w, spec);
}

inline Estimate baseline_moment(std::span<const double> x, FamilyId f) {
  Estimate e = baseline_moment(x, moment_map(f));
  e.labels = family_labels(f);
  return e;
}

}  // namespace mfmc
