#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "mfmc/core/error.hpp"
#include "mfmc/numerics/normal.hpp"
#include "mfmc/numerics/rng.hpp"

namespace mfmc {

// Logistic Pickands dependence function; r = 1 is independence.
inline double pickands_logistic(double t, double r) {
  if (!(r > 0.0 && r <= 1.0)) fail(ErrorKind::Domain, "models", "logistic dependence r must lie in (0,1]");
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::Domain, "models", "pickands argument must lie in [0,1]");
  if (t == 0.0 || t == 1.0) return 1.0;
  double a = 1.0 / r;
  double la = a * std::log(t), lb = a * std::log1p(-t);
  double mx = std::max(la, lb);
  double ls = mx + std::log(std::exp(la - mx) + std::exp(lb - mx));
  return std::exp(r * ls);
}

// Positive stable variate with Laplace transform exp(-t^alpha), 0 < alpha < 1.
inline double positive_stable(double alpha, RngStream& rng) {
  double th = pi * rng.uniform();
  double w = rng.exponential();
  double a = std::sin(alpha * th) / std::pow(std::sin(th), 1.0 / alpha);
  double b = std::pow(std::sin((1.0 - alpha) * th) / w, (1.0 - alpha) / alpha);
  return a * b;
}

enum class CopulaId { Gaussian, GumbelHougaard, Independence };

inline const char* copula_name(CopulaId c) {
  switch (c) {
    case CopulaId::Gaussian: return "gaussian";
    case CopulaId::GumbelHougaard: return "gumbel-hougaard";
    case CopulaId::Independence: return "independence";
  }
  return "?";
}

class Copula {
 public:
  static Copula gaussian(double rho) { return Copula(CopulaId::Gaussian, rho); }
  static Copula gumbel_hougaard(double r) { return Copula(CopulaId::GumbelHougaard, r); }
  static Copula independence() { return Copula(CopulaId::Independence, 0.0); }

  Copula(CopulaId id, double param) : id_(id), param_(param) {
    if (id == CopulaId::Gaussian && !(param > -1.0 && param < 1.0))
      fail(ErrorKind::Domain, "models", "gaussian copula correlation must lie in (-1,1)");
    if (id == CopulaId::GumbelHougaard && !(param > 0.0 && param <= 1.0))
      fail(ErrorKind::Domain, "models", "gumbel-hougaard parameter must lie in (0,1]");
  }

  CopulaId id() const { return id_; }
  double param() const { return param_; }
  bool has_param() const { return id_ != CopulaId::Independence; }
  Copula with_param(double p) const { return Copula(id_, p); }

  double operator()(double u1, double u2) const {
    check(u1);
    check(u2);
    if (u1 == 0.0 || u2 == 0.0) return 0.0;
    if (u1 == 1.0) return u2;
    if (u2 == 1.0) return u1;
    switch (id_) {
      case CopulaId::Independence: return u1 * u2;
      case CopulaId::Gaussian: return bivariate_norm_cdf(norm_quantile(u1), norm_quantile(u2), param_);
      case CopulaId::GumbelHougaard: {
        double l1 = -std::log(u1), l2 = -std::log(u2);
        double s = l1 + l2;
        return std::exp(-s * pickands_logistic(l1 / s, param_));
      }
    }
    return 0.0;
  }

  // dC/du1 at interior points
  double d1(double u1, double u2) const {
    check(u1);
    check(u2);
    if (u2 == 0.0) return 0.0;
    if (u2 == 1.0) return 1.0;
    switch (id_) {
      case CopulaId::Independence: return u2;
      case CopulaId::Gaussian: {
        double z1 = norm_quantile(u1), z2 = norm_quantile(u2);
        return norm_cdf((z2 - param_ * z1) / std::sqrt(1.0 - param_ * param_));
      }
      case CopulaId::GumbelHougaard: {
        double r = param_, l1 = -std::log(u1), l2 = -std::log(u2);
        double a = 1.0 / r;
        double s = std::pow(l1, a) + std::pow(l2, a);
        double c = std::exp(-std::pow(s, r));
        return c * std::pow(s, r - 1.0) * std::pow(l1, a - 1.0) / u1;
      }
    }
    return 0.0;
  }

  // both families are exchangeable
  double d2(double u1, double u2) const { return d1(u2, u1); }

  std::pair<double, double> sample(RngStream& rng) const {
    switch (id_) {
      case CopulaId::Independence: {
        double a = rng.uniform();
        return {a, rng.uniform()};
      }
      case CopulaId::Gaussian: {
        double z1 = rng.normal(), e = rng.normal();
        double z2 = param_ * z1 + std::sqrt(1.0 - param_ * param_) * e;
        return {norm_cdf(z1), norm_cdf(z2)};
      }
      case CopulaId::GumbelHougaard: {
        if (param_ > 0.999) {
          double a = rng.uniform();
          return {a, rng.uniform()};
        }
        double v = positive_stable(param_, rng);
        double e1 = rng.exponential(), e2 = rng.exponential();
        return {std::exp(-std::pow(e1 / v, param_)), std::exp(-std::pow(e2 / v, param_))};
      }
    }
    return {0.0, 0.0};
  }

 private:
  static void check(double u) {
    if (!(u >= 0.0 && u <= 1.0)) fail(ErrorKind::Domain, "models", "copula arguments must lie in [0,1]");
  }

  CopulaId id_;
  double param_;
};

}  // namespace mfmc
