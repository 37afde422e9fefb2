#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mfmc/core/error.hpp"

namespace mfmc {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline Rule build_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

// Golub-Welsch for the weight exp(-x^2/2)/sqrt(2 pi); weights sum to one.
inline Rule build_gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    double v = es.eigenvectors()(0, i);
    r.weights[i] = v * v;
  }
  return r;
}

template <class Builder>
const Rule& cached_rule(int n, std::map<int, std::unique_ptr<Rule>>& cache, Builder build) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<Rule>(build(n))).first;
  return *it->second;
}

}  // namespace detail

// Nodes on [-1, 1].
inline const Rule& gauss_legendre(int n) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  return detail::cached_rule(n, cache, detail::build_gauss_legendre);
}

inline const Rule& gauss_hermite(int n) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  return detail::cached_rule(n, cache, detail::build_gauss_hermite);
}

template <class F>
double fixed_gauss_legendre(const F& f, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < n; ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
  return s * h;
}

namespace detail {
template <class F>
double adapt(const F& f, double a, double b, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double left = fixed_gauss_legendre(f, a, m, 15), right = fixed_gauss_legendre(f, m, b, 15);
  if (std::abs(left + right - whole) <= std::max(tol, 1e-14 * std::abs(left + right))) return left + right;
  if (depth <= 0) fail(ErrorKind::Integration, "asymptotics", "adaptive quadrature did not converge");
  return adapt(f, a, m, left, 0.5 * tol, depth - 1) + adapt(f, m, b, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

template <class F>
double adaptive_gauss_legendre(const F& f, double a, double b, double abs_tol, int max_depth = 40) {
  if (a == b) return 0.0;
  double whole = fixed_gauss_legendre(f, a, b, 15);
  return detail::adapt(f, a, b, whole, abs_tol, max_depth);
}

// Smooth map of (0,1) onto itself that flattens both endpoints.
struct EndpointMap {
  double p = 3.0;
  double value(double u) const {
    double a = std::pow(u, p), b = std::pow(1.0 - u, p);
    return a / (a + b);
  }
  double derivative(double u) const {
    double a = std::pow(u, p), b = std::pow(1.0 - u, p);
    double s = a + b;
    return p * std::pow(u, p - 1.0) * std::pow(1.0 - u, p - 1.0) / (s * s);
  }
  // 1 - value(u), accurate near u = 1
  double complement(double u) const {
    double a = std::pow(u, p), b = std::pow(1.0 - u, p);
    return b / (a + b);
  }
};

struct QuadratureOptions {
  int nodes = 200;
  bool refine = true;
  double rel_tol = 1e-6;
};

}  // namespace mfmc
