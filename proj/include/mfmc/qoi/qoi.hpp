#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/estimators/estimate.hpp"
#include "mfmc/numerics/normal.hpp"

namespace mfmc {

enum class QoIKind { Log10Exceedance, Quantile, Custom };

inline const char* qoi_kind_name(QoIKind k) {
  switch (k) {
    case QoIKind::Log10Exceedance: return "log10-exceedance";
    case QoIKind::Quantile: return "quantile";
    case QoIKind::Custom: return "custom";
  }
  return "?";
}

using QoIFunction = std::function<double(const Eigen::VectorXd&)>;
using QoIGradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Scalar function of the Gumbel parameters (location, scale), or a user function.
struct QoISpec {
  QoIKind kind = QoIKind::Quantile;
  double level = 0.99;  // threshold a1 for exceedance, probability p1 for the quantile
  QoIFunction fn;
  QoIGradient grad;

  static QoISpec exceedance(double a1) { return {QoIKind::Log10Exceedance, a1, {}, {}}; }
  static QoISpec quantile(double p1) {
    if (!(p1 > 0.0 && p1 < 1.0)) fail(ErrorKind::Domain, "qoi", "quantile level must lie in (0, 1)");
    return {QoIKind::Quantile, p1, {}, {}};
  }
  static QoISpec custom(QoIFunction f, QoIGradient g = {}) { return {QoIKind::Custom, 0.0, std::move(f), std::move(g)}; }

  std::string label() const {
    if (kind == QoIKind::Custom) return "custom";
    return std::string(qoi_kind_name(kind)) + "(" + std::to_string(level) + ")";
  }
};

namespace detail {

inline void check_gumbel_theta(const Eigen::VectorXd& t) {
  if (t.size() != 2) fail(ErrorKind::Domain, "qoi", "built-in QoIs need (location, scale)");
  if (!(t(1) > 0.0) || !std::isfinite(t(0))) fail(ErrorKind::Domain, "qoi", "scale must be positive");
}

// log P(X > a) = log(1 - exp(-e^{-z})), stable in both tails
inline double log_exceedance(double z) {
  double t = std::exp(-z);
  if (t < 1e-8) return -z + std::log1p(-0.5 * t + t * t / 6.0);
  return std::log(-std::expm1(-t));
}

}  // namespace detail

inline double qoi_value(const QoISpec& s, const Eigen::VectorXd& theta) {
  switch (s.kind) {
    case QoIKind::Log10Exceedance: {
      detail::check_gumbel_theta(theta);
      double z = (s.level - theta(0)) / theta(1);
      double v = detail::log_exceedance(z) / std::log(10.0);
      return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    }
    case QoIKind::Quantile:
      detail::check_gumbel_theta(theta);
      return theta(0) - theta(1) * std::log(-std::log(s.level));
    case QoIKind::Custom:
      if (!s.fn) fail(ErrorKind::Usage, "qoi", "custom QoI has no function");
      return s.fn(theta);
  }
  return 0.0;
}

inline Eigen::VectorXd qoi_gradient(const QoISpec& s, const Eigen::VectorXd& theta) {
  switch (s.kind) {
    case QoIKind::Log10Exceedance: {
      detail::check_gumbel_theta(theta);
      double sig = theta(1), z = (s.level - theta(0)) / sig, t = std::exp(-z);
      // e^{-z - t} / P with P = 1 - e^{-t}, written as e^{-t} t / P
      double ratio = t > 0.0 ? std::exp(-t) * t / -std::expm1(-t) : 1.0;
      double d = ratio / (sig * std::log(10.0));
      return Eigen::Vector2d(d, z * d);
    }
    case QoIKind::Quantile:
      detail::check_gumbel_theta(theta);
      return Eigen::Vector2d(1.0, -std::log(-std::log(s.level)));
    case QoIKind::Custom: {
      if (s.grad) return s.grad(theta);
      Eigen::VectorXd g(theta.size());
      for (int i = 0; i < theta.size(); ++i) {
        double h = 1e-6 * (1.0 + std::abs(theta(i)));
        Eigen::VectorXd a = theta, b = theta;
        a(i) += h;
        b(i) -= h;
        g(i) = (qoi_value(s, a) - qoi_value(s, b)) / (2.0 * h);
      }
      return g;
    }
  }
  return {};
}

enum class Sided { Two, Lower, Upper };

inline Sided parse_sided(const std::string& s) {
  if (s == "two") return Sided::Two;
  if (s == "lower") return Sided::Lower;
  if (s == "upper") return Sided::Upper;
  fail(ErrorKind::Usage, "qoi", "interval side must be two, lower or upper: " + s);
}

inline const char* sided_name(Sided s) {
  switch (s) {
    case Sided::Two: return "two";
    case Sided::Lower: return "lower";
    case Sided::Upper: return "upper";
  }
  return "?";
}

struct Interval {
  double lower, upper;
  double width() const { return upper - lower; }
};

// point +- z sd; a lower one-sided interval is [point - z sd, inf)
inline Interval normal_interval(double point, double variance, double confidence, Sided side) {
  if (!(confidence > 0.0 && confidence < 1.0)) fail(ErrorKind::Domain, "qoi", "confidence must lie in (0, 1)");
  double sd = std::sqrt(std::max(variance, 0.0));
  const double inf = std::numeric_limits<double>::infinity();
  switch (side) {
    case Sided::Two: {
      double z = norm_quantile(0.5 + 0.5 * confidence);
      return {point - z * sd, point + z * sd};
    }
    case Sided::Lower: return {point - norm_quantile(confidence) * sd, inf};
    case Sided::Upper: return {-inf, point + norm_quantile(confidence) * sd};
  }
  return {point, point};
}

struct QoIResult {
  std::string label;
  double point;
  double variance;  // already divided by n
  Interval interval;
  std::vector<std::string> warnings;
};

inline QoIResult qoi_estimate(const QoISpec& s, const Estimate& est, double confidence = 0.95,
                              Sided side = Sided::Two) {
  if (est.n == 0) fail(ErrorKind::Usage, "qoi", "estimate carries no sample size");
  QoIResult r;
  r.label = s.label();
  r.point = qoi_value(s, est.theta1);
  if (!std::isfinite(r.point)) r.warnings.push_back("exceedance probability underflows; value is -inf");
  Eigen::VectorXd g = qoi_gradient(s, est.theta1);
  double nv = g.dot(est.sigma * g);
  double scale = g.cwiseAbs().dot(est.sigma.cwiseAbs() * g.cwiseAbs());
  if (nv < -1e-12 * std::max(scale, 1e-300))
    fail(ErrorKind::NumericalDomain, "qoi", "covariance is not positive semidefinite");
  r.variance = std::max(nv, 0.0) / static_cast<double>(est.n);
  r.interval = normal_interval(r.point, r.variance, confidence, side);
  return r;
}

}  // namespace mfmc
