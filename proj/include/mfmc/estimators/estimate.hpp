#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/models/joint.hpp"

namespace mfmc {

enum class Method {
  BaselineMl,
  BaselineMoment,
  JointMl,
  JointMlClosed,
  MomentMf,
  MarginalMlMf,
  MfmcMean,
  RegressionGaussian,
};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::BaselineMl: return "baseline-ml";
    case Method::BaselineMoment: return "baseline-moment";
    case Method::JointMl: return "joint-ml";
    case Method::JointMlClosed: return "joint-ml-closed";
    case Method::MomentMf: return "moment-mf";
    case Method::MarginalMlMf: return "marginal-ml-mf";
    case Method::MfmcMean: return "mfmc-mean";
    case Method::RegressionGaussian: return "regression-gaussian";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::BaselineMl, Method::BaselineMoment, Method::JointMl, Method::JointMlClosed,
                   Method::MomentMf, Method::MarginalMlMf, Method::MfmcMean, Method::RegressionGaussian})
    if (s == method_name(m)) return m;
  fail(ErrorKind::Usage, "estimators", "unknown method '" + s + "'");
}

inline bool is_multifidelity(Method m) {
  return m == Method::MomentMf || m == Method::MarginalMlMf || m == Method::MfmcMean;
}

struct Coefficients {
  std::string mode;                   // optimal-plugin, optimal-true or fixed
  std::vector<Eigen::VectorXd> alpha;  // moment-based: one vector per component
  Eigen::VectorXd beta;                // likelihood-based: one entry per component
};

struct Estimate {
  Method method = Method::BaselineMl;
  std::vector<std::string> labels;
  Eigen::VectorXd theta1;
  std::optional<Eigen::VectorXd> theta12;
  std::optional<Eigen::VectorXd> theta2;
  Eigen::MatrixXd sigma;  // n-scaled: Var(theta1) ~ sigma / n
  std::size_t n = 0;
  std::size_t m = 0;
  bool infinite_m = false;  // low-fidelity population treated as known
  std::optional<Coefficients> coefficients;
  std::vector<std::string> warnings;
};

inline std::vector<std::string> family_labels(FamilyId f) {
  switch (f) {
    case FamilyId::Gaussian: return {"mean", "variance"};
    case FamilyId::Gumbel: return {"location", "scale"};
    case FamilyId::Bernoulli: return {"p"};
  }
  return {};
}

inline FamilyId model_family(ModelId m) {
  switch (m) {
    case ModelId::BivariateGaussian: return FamilyId::Gaussian;
    case ModelId::BivariateGumbel: return FamilyId::Gumbel;
    default: return FamilyId::Bernoulli;
  }
}

}  // namespace mfmc
