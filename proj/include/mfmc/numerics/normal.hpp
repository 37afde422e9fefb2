#pragma once

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>

#include "mfmc/core/error.hpp"
#include "mfmc/numerics/quadrature.hpp"

namespace mfmc {

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::Domain, "models", "normal quantile needs p in (0,1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

// P(Z1 <= h, Z2 <= k) for standard normals with correlation rho.
inline double bivariate_norm_cdf(double h, double k, double rho) {
  const double inf = std::numeric_limits<double>::infinity();
  if (h == -inf || k == -inf) return 0.0;
  if (h == inf) return norm_cdf(k);
  if (k == inf) return norm_cdf(h);
  double base = norm_cdf(h) * norm_cdf(k);
  if (rho == 0.0) return base;
  double top = std::asin(rho);
  auto f = [&](double t) {
    double c = std::cos(t);
    return std::exp(-(h * h + k * k - 2.0 * h * k * std::sin(t)) / (2.0 * c * c));
  };
  double v = adaptive_gauss_legendre(f, 0.0, top, 1e-15);
  return base + v / (2.0 * pi);
}

}  // namespace mfmc
