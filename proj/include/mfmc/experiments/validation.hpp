#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfmc/asymptotics/asym_cov.hpp"
#include "mfmc/estimators.hpp"
#include "mfmc/experiments/config.hpp"
#include "mfmc/experiments/figures.hpp"
#include "mfmc/experiments/parallel.hpp"
#include "mfmc/experiments/report.hpp"
#include "mfmc/numerics/summation.hpp"
#include "mfmc/qoi/qoi.hpp"

namespace mfmc {

struct ValidationSetup {
  JointModel truth;
  std::size_t n, m;
  bool known_lofi;
  std::vector<Method> methods;
  std::vector<QoISpec> qois;
  bool dependence_known;
  bool true_coefficients;
  // model-true coefficients resolved once, then passed as fixed values
  std::map<Method, CoefficientChoice> resolved;
};

namespace detail {

inline ValidationSetup validation_setup(const ExperimentConfig& c) {
  ValidationSetup s{c.model.value_or(JointModel::bivariate_gaussian(1.0, 2.0, 0.0, 1.0, 0.8)),
                    c.n ? c.n : 2000,
                    0,
                    c.known_lofi || !c.m,
                    c.methods,
                    c.qois,
                    c.dependence_known.value_or(false),
                    c.true_coefficients};
  if (!s.known_lofi) s.m = *c.m;
  if (s.truth.is_discrete()) fail(ErrorKind::Usage, "experiments", "validation supports the continuous models");
  if (s.methods.empty()) s.methods = gumbel_methods;
  const bool gumbel = s.truth.id() == ModelId::BivariateGumbel;
  if (s.qois.empty() && gumbel) s.qois = {QoISpec::exceedance(6.5), QoISpec::quantile(0.99)};
  if (!gumbel) s.qois.clear();
  return s;
}

// One replication of one method.
inline Estimate validation_fit(const ValidationSetup& s, Method meth, const MFDataset& ds,
                               const std::optional<MomentMatrices>& lofi_moments) {
  FamilyId fam = s.truth.marginal(1).id();
  MfOptions mo;
  if (s.true_coefficients) {
    auto it = s.resolved.find(meth);
    mo.coef = it != s.resolved.end() ? it->second : CoefficientChoice::truth(s.truth);
  }
  if (s.known_lofi) {
    mo.known_lofi = s.truth;
    mo.lofi_moments = lofi_moments;
  }
  switch (meth) {
    case Method::BaselineMl: return baseline_ml(ds.x1(), fam);
    case Method::BaselineMoment: return baseline_moment(ds.x1(), fam);
    case Method::MomentMf: return moment_mf(ds, fam, mo);
    case Method::MarginalMlMf: return marginal_ml_mf(ds, fam, mo);
    case Method::MfmcMean: return mfmc_mean(ds, mo);
    case Method::JointMl: {
      JointMlOptions o;
      o.theta2_known = s.known_lofi;
      o.dependence_known = s.dependence_known;
      o.compute_covariance = false;
      return joint_ml(ds, s.truth, o);
    }
    case Method::JointMlClosed:
      if (s.known_lofi) fail(ErrorKind::Usage, "experiments", "the closed form needs finite m");
      return gaussian_joint_ml_closed(ds);
    case Method::RegressionGaussian:
      if (s.known_lofi) fail(ErrorKind::Usage, "experiments", "the regression route needs finite m");
      return regression_route_gaussian(ds).estimate;
  }
  fail(ErrorKind::Usage, "experiments", "unsupported method");
}

inline Eigen::VectorXd method_truth(const JointModel& m, Method meth) {
  if (meth == Method::MfmcMean) return Eigen::VectorXd::Constant(1, m.marginal(1).mean());
  return m.marginal(1).theta();
}

}  // namespace detail

// Replication study of n-scaled variances against asym_cov; seeds are base + replication index.
inline ExperimentReport run_mc_validation(const ExperimentConfig& c) {
  const std::uint64_t seed = require_seed(c);
  const std::size_t R = c.replications ? c.replications : 10000;
  if (R < 100) fail(ErrorKind::Usage, "experiments", "validation needs at least 100 replications");
  auto t0 = std::chrono::steady_clock::now();
  ValidationSetup s = detail::validation_setup(c);
  const std::size_t K = s.methods.size(), Q = s.qois.size();

  std::optional<MomentMatrices> lofi_moments;
  for (Method m : s.methods)
    if (m == Method::MomentMf && s.known_lofi)
      lofi_moments = moment_matrices(s.truth, moment_map(s.truth.marginal(1).id()).h, moment_map(s.truth.marginal(1).id()).h);

  auto draw = [&](std::size_t r) {
    RngStream rng(seed + r);
    auto sample = s.truth.sample(s.n + s.m, rng);
    std::vector<double> a, b, l;
    for (std::size_t i = 0; i < s.n; ++i) {
      a.push_back(sample[i].first);
      b.push_back(sample[i].second);
    }
    for (std::size_t i = s.n; i < s.n + s.m; ++i) l.push_back(sample[i].second);
    return MFDataset(std::move(a), std::move(b), std::move(l));
  };
  if (s.true_coefficients) {
    // the coefficients do not depend on the data, so any replication yields them
    MFDataset ds0 = draw(0);
    for (Method m : s.methods) {
      if (m != Method::MomentMf && m != Method::MarginalMlMf && m != Method::MfmcMean) continue;
      Coefficients k = *detail::validation_fit(s, m, ds0, lofi_moments).coefficients;
      s.resolved[m] = m == Method::MarginalMlMf ? CoefficientChoice::fixed_beta(k.beta) : CoefficientChoice::fixed_alpha(k.alpha);
    }
  }

  // results[r][k]: theta1 of method k in replication r, empty on failure
  std::vector<std::vector<Eigen::VectorXd>> results(R, std::vector<Eigen::VectorXd>(K));
  std::vector<std::vector<std::string>> errors(R, std::vector<std::string>(K));
  parallel_for(
      R,
      [&](std::size_t r) {
        MFDataset ds = draw(r);
        for (std::size_t k = 0; k < K; ++k) {
          try {
            results[r][k] = detail::validation_fit(s, s.methods[k], ds, lofi_moments).theta1;
          } catch (const Error& e) {
            errors[r][k] = e.what();
          }
        }
      },
      c.threads ? c.threads : thread_count());

  AsymOptions ao;
  ao.dependence_known = s.dependence_known;
  ao.kappa = s.known_lofi ? 1.0 : static_cast<double>(s.m) / static_cast<double>(s.n + s.m);

  ExperimentReport rep;
  rep.id = experiment_name(c.id);
  Table mt{"methods",
           {"method", "component", "replications", "failures", "mean", "truth", "bias_se", "n_var", "predicted",
            "ratio"},
           {}};
  Table qt{"qoi", {"method", "qoi", "mean", "truth", "bias_se", "n_var", "predicted", "ratio"}, {}};
  const double nn = static_cast<double>(s.n);
  std::size_t worst_failures = 0;
  for (std::size_t k = 0; k < K; ++k) {
    Method meth = s.methods[k];
    std::vector<std::size_t> ok;
    for (std::size_t r = 0; r < R; ++r)
      if (results[r][k].size() > 0) ok.push_back(r);
    std::size_t failures = R - ok.size();
    worst_failures = std::max(worst_failures, failures);
    if (failures > 0) {
      std::size_t first = 0;
      while (errors[first][k].empty()) ++first;
      rep.warnings.push_back(std::string(method_name(meth)) + ": " + std::to_string(failures) +
                             " failed replications, first: " + errors[first][k]);
    }
    if (ok.size() < 2) continue;
    Eigen::VectorXd truth = detail::method_truth(s.truth, meth);
    std::optional<Eigen::MatrixXd> sigma;
    try {
      sigma = asym_cov(meth, s.truth, ao);
    } catch (const Error& e) {
      rep.warnings.push_back(std::string(method_name(meth)) + " asymptotics: " + e.what());
    }
    std::vector<std::string> labels =
        meth == Method::MfmcMean ? std::vector<std::string>{"mean"} : family_labels(s.truth.marginal(1).id());
    auto stats = [&](const std::vector<double>& v, double t, std::optional<double> pred) {
      double mu = mean(v), var = variance(v);
      double se = std::sqrt(var / static_cast<double>(v.size()));
      std::vector<std::string> cells = {num(mu), num(t), num(se > 0 ? std::abs(mu - t) / se : 0.0), num(nn * var)};
      cells.push_back(format_optional(pred));
      cells.push_back(pred ? num(nn * var / *pred) : "");
      return cells;
    };
    for (int l = 0; l < truth.size(); ++l) {
      std::vector<double> v;
      for (std::size_t r : ok) v.push_back(results[r][k](l));
      std::optional<double> pred;
      if (sigma) pred = (*sigma)(l, l);
      std::vector<std::string> row = {method_name(meth), labels[l], std::to_string(R), std::to_string(failures)};
      auto st = stats(v, truth(l), pred);
      row.insert(row.end(), st.begin(), st.end());
      mt.add(row);
    }
    if (meth == Method::MfmcMean) continue;
    for (const QoISpec& q : s.qois) {
      std::vector<double> v;
      for (std::size_t r : ok) v.push_back(qoi_value(q, results[r][k]));
      std::optional<double> pred;
      if (sigma) {
        Eigen::VectorXd g = qoi_gradient(q, truth);
        pred = g.dot(*sigma * g);
      }
      std::vector<std::string> row = {method_name(meth), q.label()};
      auto st = stats(v, qoi_value(q, truth), pred);
      row.insert(row.end(), st.begin(), st.end());
      qt.add(row);
    }
  }
  rep.tables.push_back(std::move(mt));
  if (Q > 0) rep.tables.push_back(std::move(qt));

  json qj = json::array();
  for (const auto& q : s.qois) qj.push_back(qoi_json(q));
  rep.config = {{"experiment", rep.id},
                {"seed", seed},
                {"seeding", "replication i uses seed + i"},
                {"model", model_json(s.truth)},
                {"n", s.n},
                {"m", s.known_lofi ? json("infinity") : json(s.m)},
                {"replications", R},
                {"methods", detail::methods_json(s.methods)},
                {"qois", qj},
                {"dependence_known", s.dependence_known},
                {"coefficients", s.true_coefficients ? "optimal-true" : "optimal-plugin"}};
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (static_cast<double>(worst_failures) > 0.01 * static_cast<double>(R))
    fail(ErrorKind::EstimationFailure, "experiments",
         "more than 1% of replications failed (" + std::to_string(worst_failures) + " of " + std::to_string(R) + ")");
  return rep;
}

}  // namespace mfmc
