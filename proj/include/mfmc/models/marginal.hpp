#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "mfmc/core/error.hpp"
#include "mfmc/numerics/normal.hpp"

namespace mfmc {

enum class FamilyId { Gaussian, Gumbel, Bernoulli };

inline const char* family_name(FamilyId f) {
  switch (f) {
    case FamilyId::Gaussian: return "gaussian";
    case FamilyId::Gumbel: return "gumbel";
    case FamilyId::Bernoulli: return "bernoulli";
  }
  return "?";
}

inline FamilyId parse_family(const std::string& s) {
  if (s == "gaussian") return FamilyId::Gaussian;
  if (s == "gumbel") return FamilyId::Gumbel;
  if (s == "bernoulli") return FamilyId::Bernoulli;
  fail(ErrorKind::Usage, "models", "unknown family '" + s + "'");
}

inline int family_dim(FamilyId f) { return f == FamilyId::Bernoulli ? 1 : 2; }

struct MarginalEval {
  double log_density;
  double cdf;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
};

// gaussian: (mean, variance); gumbel: (location, scale); bernoulli: (p)
class MarginalFamily {
 public:
  MarginalFamily(FamilyId id, Eigen::VectorXd theta) : id_(id), theta_(std::move(theta)) { validate(); }

  static MarginalFamily gaussian(double mean, double var) { return {FamilyId::Gaussian, Eigen::Vector2d(mean, var)}; }
  static MarginalFamily gumbel(double mu, double sigma) { return {FamilyId::Gumbel, Eigen::Vector2d(mu, sigma)}; }
  static MarginalFamily bernoulli(double p) { return {FamilyId::Bernoulli, Eigen::VectorXd::Constant(1, p)}; }

  FamilyId id() const { return id_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  int dim() const { return static_cast<int>(theta_.size()); }
  MarginalFamily with_theta(const Eigen::VectorXd& t) const { return {id_, t}; }

  double log_density(double x) const {
    switch (id_) {
      case FamilyId::Gaussian: {
        double d = x - theta_(0), v = theta_(1);
        return -0.5 * std::log(2.0 * pi * v) - d * d / (2.0 * v);
      }
      case FamilyId::Gumbel: {
        double z = (x - theta_(0)) / theta_(1);
        return -z - std::log(theta_(1)) - std::exp(-z);
      }
      case FamilyId::Bernoulli:
        check_binary(x);
        return x == 1.0 ? std::log(theta_(0)) : std::log1p(-theta_(0));
    }
    return 0.0;
  }

  double cdf(double x) const {
    switch (id_) {
      case FamilyId::Gaussian: return norm_cdf((x - theta_(0)) / std::sqrt(theta_(1)));
      case FamilyId::Gumbel: return std::exp(-std::exp(-(x - theta_(0)) / theta_(1)));
      case FamilyId::Bernoulli: return x < 0.0 ? 0.0 : (x < 1.0 ? 1.0 - theta_(0) : 1.0);
    }
    return 0.0;
  }

  Eigen::VectorXd score(double x) const {
    Eigen::VectorXd s(dim());
    switch (id_) {
      case FamilyId::Gaussian: {
        double d = x - theta_(0), v = theta_(1);
        s << d / v, d * d / (2.0 * v * v) - 0.5 / v;
        break;
      }
      case FamilyId::Gumbel: {
        double sg = theta_(1), z = (x - theta_(0)) / sg, e = std::exp(-z);
        s << (1.0 - e) / sg, (z - 1.0 - z * e) / sg;
        break;
      }
      case FamilyId::Bernoulli: {
        check_binary(x);
        double p = theta_(0);
        s << (x == 1.0 ? 1.0 / p : -1.0 / (1.0 - p));
        break;
      }
    }
    return s;
  }

  Eigen::MatrixXd hessian(double x) const {
    Eigen::MatrixXd H(dim(), dim());
    switch (id_) {
      case FamilyId::Gaussian: {
        double d = x - theta_(0), v = theta_(1);
        H << -1.0 / v, -d / (v * v), -d / (v * v), 0.5 / (v * v) - d * d / (v * v * v);
        break;
      }
      case FamilyId::Gumbel: {
        double sg = theta_(1), z = (x - theta_(0)) / sg, e = std::exp(-z), s2 = sg * sg;
        double mm = -e / s2;
        double ms = -(1.0 - e + z * e) / s2;
        double ss = (1.0 - 2.0 * z + 2.0 * z * e - z * z * e) / s2;
        H << mm, ms, ms, ss;
        break;
      }
      case FamilyId::Bernoulli: {
        check_binary(x);
        double p = theta_(0);
        H << (x == 1.0 ? -1.0 / (p * p) : -1.0 / ((1.0 - p) * (1.0 - p)));
        break;
      }
    }
    return H;
  }

  MarginalEval eval(double x) const { return {log_density(x), cdf(x), score(x), hessian(x)}; }

  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::Domain, "models", "quantile level must lie in (0,1)");
    switch (id_) {
      case FamilyId::Gaussian: return theta_(0) + std::sqrt(theta_(1)) * norm_quantile(p);
      case FamilyId::Gumbel: return theta_(0) - theta_(1) * std::log(-std::log(p));
      case FamilyId::Bernoulli: return p <= 1.0 - theta_(0) ? 0.0 : 1.0;
    }
    return 0.0;
  }

  Eigen::MatrixXd fisher_information() const {
    Eigen::MatrixXd I(dim(), dim());
    switch (id_) {
      case FamilyId::Gaussian: {
        double v = theta_(1);
        I << 1.0 / v, 0.0, 0.0, 0.5 / (v * v);
        break;
      }
      case FamilyId::Gumbel: {
        double s2 = theta_(1) * theta_(1), g1 = euler_gamma - 1.0;
        I << 1.0, g1, g1, g1 * g1 + pi * pi / 6.0;
        I /= s2;
        break;
      }
      case FamilyId::Bernoulli: {
        double p = theta_(0);
        I << 1.0 / (p * (1.0 - p));
        break;
      }
    }
    return I;
  }

  double mean() const {
    switch (id_) {
      case FamilyId::Gaussian: return theta_(0);
      case FamilyId::Gumbel: return theta_(0) + euler_gamma * theta_(1);
      case FamilyId::Bernoulli: return theta_(0);
    }
    return 0.0;
  }

  double variance() const {
    switch (id_) {
      case FamilyId::Gaussian: return theta_(1);
      case FamilyId::Gumbel: return pi * pi / 6.0 * theta_(1) * theta_(1);
      case FamilyId::Bernoulli: return theta_(0) * (1.0 - theta_(0));
    }
    return 0.0;
  }

 private:
  void validate() const {
    if (theta_.size() != family_dim(id_)) fail(ErrorKind::Domain, "models", "wrong parameter count for family");
    for (int i = 0; i < theta_.size(); ++i)
      if (!std::isfinite(theta_(i))) fail(ErrorKind::Domain, "models", "non-finite parameter");
    switch (id_) {
      case FamilyId::Gaussian:
        if (!(theta_(1) > 0.0)) fail(ErrorKind::Domain, "models", "gaussian variance must be positive");
        break;
      case FamilyId::Gumbel:
        if (!(theta_(1) > 0.0)) fail(ErrorKind::Domain, "models", "gumbel scale must be positive");
        break;
      case FamilyId::Bernoulli:
        if (!(theta_(0) > 0.0 && theta_(0) < 1.0)) fail(ErrorKind::Domain, "models", "bernoulli p must lie in (0,1)");
        break;
    }
  }

  static void check_binary(double x) {
    if (x != 0.0 && x != 1.0) fail(ErrorKind::Domain, "models", "bernoulli observation must be 0 or 1");
  }

  FamilyId id_;
  Eigen::VectorXd theta_;
};

}  // namespace mfmc
