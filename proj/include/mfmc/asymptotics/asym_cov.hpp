#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mfmc/asymptotics/information.hpp"
#include "mfmc/asymptotics/moment_matrices.hpp"
#include "mfmc/core/error.hpp"
#include "mfmc/estimators/estimate.hpp"
#include "mfmc/estimators/optimal_alpha.hpp"
#include "mfmc/models/joint.hpp"
#include "mfmc/models/moment_map.hpp"

namespace mfmc {

struct AsymOptions {
  bool location_only = false;     // only mu1 unknown, scale known
  bool dependence_known = false;  // joint ML with the coupling parameter fixed
  double kappa = 1.0;             // m / (n + m); 1 is the known low-fidelity case
  InfoOptions info;
  QuadratureOptions quad;
};

namespace detail {

inline std::vector<int> theta1_index(const JointModel& m, bool location_only) {
  auto t = m.layout().theta1;
  if (location_only) t.resize(1);
  return t;
}

// Moment map for theta1 under the model; the mixture parameter is p = E X1 / E Y.
inline MomentSpec model_moment_spec(const JointModel& m, bool location_only) {
  if (m.id() == ModelId::BernoulliMixture) return scaled_mean_map(m.mixing().m1());
  MarginalFamily f = m.marginal(1);
  if (location_only) return location_moment_map(f.id(), f.theta()(1));
  return moment_map(f.id());
}

// Influence features I^{-1} score for the marginal ML fits of theta1 and theta2.
inline std::pair<FeatureMap, FeatureMap> influence_features(const JointModel& m, bool location_only) {
  if (m.id() == ModelId::BernoulliMixture) {
    double p1 = m.marginal(1).theta()(0), c = m.mixing().m1();
    return {[p1, c](double x) { return Eigen::VectorXd::Constant(1, (x - p1) / c); },
            [c](double x) { return Eigen::VectorXd::Constant(1, x - c); }};
  }
  auto make = [location_only](const MarginalFamily& f) -> FeatureMap {
    Eigen::MatrixXd inv = checked_inverse(fisher_information(f, location_only), "asymptotics");
    const int k = static_cast<int>(inv.rows());
    return [f, inv, k](double x) { return Eigen::VectorXd(inv * f.score(x).head(k)); };
  };
  return {make(m.marginal(1)), make(m.marginal(2))};
}

inline MomentOptions moment_options(const AsymOptions& o) { return {MomentMethod::Quadrature, o.quad, 0, 1}; }

}  // namespace detail

// n-scaled limiting covariance of the named estimator of theta1 under the true model.
inline Eigen::MatrixXd asym_cov(Method method, const JointModel& m, const AsymOptions& o = {}) {
  if (!(o.kappa >= 0.0 && o.kappa <= 1.0)) fail(ErrorKind::Domain, "asymptotics", "kappa must lie in [0, 1]");
  const bool loc = o.location_only && m.marginal(1).id() != FamilyId::Bernoulli;
  switch (method) {
    case Method::BaselineMl: {
      if (m.id() == ModelId::BernoulliMixture) {
        double p1 = m.marginal(1).theta()(0), c = m.mixing().m1();
        return Eigen::MatrixXd::Constant(1, 1, p1 * (1.0 - p1) / (c * c));
      }
      return checked_inverse(fisher_information(m.marginal(1), loc), "asymptotics");
    }
    case Method::BaselineMoment: {
      MomentSpec spec = detail::model_moment_spec(m, loc);
      MomentMatrices mm = moment_matrices(m, spec.h, detail::moment_options(o));
      Eigen::MatrixXd G = spec.jacobian(mm.mean_h);
      return G * mm.c_hh * G.transpose();
    }
    case Method::MomentMf: {
      MomentSpec spec = detail::model_moment_spec(m, loc);
      MomentMatrices mm = moment_matrices(m, spec.h, detail::moment_options(o));
      Eigen::MatrixXd G = spec.jacobian(mm.mean_h);
      return mf_covariance(mm.c_hh, mm.c_hl, mm.c_ll, G, optimal_alphas(mm, G), o.kappa);
    }
    case Method::MfmcMean: {
      auto id = [](double x) { return Eigen::VectorXd::Constant(1, x); };
      MomentMatrices mm = moment_matrices(m, id, detail::moment_options(o));
      Eigen::MatrixXd G = Eigen::MatrixXd::Identity(1, 1);
      return mf_covariance(mm.c_hh, mm.c_hl, mm.c_ll, G, optimal_alphas(mm, G), o.kappa);
    }
    case Method::MarginalMlMf: {
      auto [h1, h2] = detail::influence_features(m, loc);
      MomentMatrices mm = moment_matrices(m, h1, h2, detail::moment_options(o));
      const int d = static_cast<int>(mm.c_hh.rows());
      std::vector<Eigen::VectorXd> alpha(d, Eigen::VectorXd::Zero(d));
      for (int l = 0; l < d; ++l) alpha[l](l) = mm.c_ll(l, l) > 0.0 ? mm.c_hl(l, l) / mm.c_ll(l, l) : 0.0;
      return mf_covariance(mm.c_hh, mm.c_hl, mm.c_ll, Eigen::MatrixXd::Identity(d, d), alpha, o.kappa);
    }
    case Method::JointMl:
    case Method::JointMlClosed: {
      // parameters: theta1 (or mu1), the dependence unless known, and theta2 when m is finite
      ParamLayout L = m.layout();
      std::vector<int> free = detail::theta1_index(m, loc);
      const int d = static_cast<int>(free.size());
      if (!o.dependence_known)
        for (int i : L.dependence) free.push_back(i);
      const bool finite_m = o.kappa < 1.0 && !L.theta2.empty();
      const int t2_at = static_cast<int>(free.size());
      if (finite_m)
        for (int i : L.theta2) free.push_back(i);
      Eigen::MatrixXd I = fisher_information(m, free, o.info);
      if (finite_m) {
        // the m extra low-fidelity points carry m / n times the marginal information
        Eigen::MatrixXd I2 = fisher_information(m.marginal(2));
        I.block(t2_at, t2_at, I2.rows(), I2.cols()) += o.kappa / (1.0 - o.kappa) * I2;
      }
      return checked_inverse(I, "asymptotics").topLeftCorner(d, d);
    }
    case Method::RegressionGaussian:
      if (m.id() != ModelId::BivariateGaussian)
        fail(ErrorKind::Usage, "asymptotics", "the regression route applies to the bivariate gaussian only");
      return asym_cov(Method::JointMl, m, o);
  }
  fail(ErrorKind::Usage, "asymptotics", "unknown method");
}

struct CurveRow {
  double dependence;
  Method method;
  std::string component;
  std::optional<double> variance;  // missing when the point failed
};

struct VarianceCurve {
  std::vector<CurveRow> rows;
  std::vector<std::string> warnings;
};

// One row per (grid point, method, component); failed points are recorded as missing.
inline VarianceCurve variance_curve(const JointModel& tmpl, const std::vector<double>& grid,
                                    const std::vector<Method>& methods, const AsymOptions& o = {}) {
  VarianceCurve out;
  std::vector<std::string> labels;
  if (tmpl.id() == ModelId::BernoulliMixture)
    labels = {"p"};
  else
    labels = family_labels(tmpl.marginal(1).id());
  if (o.location_only && labels.size() > 1) labels.resize(1);
  for (double v : grid) {
    for (Method meth : methods) {
      try {
        JointModel m = tmpl.id() == ModelId::BernoulliMixture ? tmpl.with_eta(Eigen::VectorXd::Constant(1, v))
                                                              : tmpl.with_dependence(v);
        Eigen::MatrixXd S = asym_cov(meth, m, o);
        for (std::size_t l = 0; l < labels.size(); ++l)
          out.rows.push_back({v, meth, labels[l], S(l, l)});
      } catch (const Error& e) {
        for (const auto& lab : labels) out.rows.push_back({v, meth, lab, std::nullopt});
        out.warnings.push_back(std::string(method_name(meth)) + " at " + std::to_string(v) + ": " + e.what());
      }
    }
  }
  return out;
}

}  // namespace mfmc
