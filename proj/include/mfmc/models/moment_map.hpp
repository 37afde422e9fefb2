#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "mfmc/core/error.hpp"
#include "mfmc/models/marginal.hpp"

namespace mfmc {

// theta = g(E h(X)); jacobian is dg/dy.
struct MomentSpec {
  int dim = 0;      // length of h
  int params = 0;   // length of theta
  std::function<Eigen::VectorXd(double)> h;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

namespace detail {
inline double positive_spread(const Eigen::VectorXd& y) {
  double v = y(1) - y(0) * y(0);
  if (!(v > 0.0)) fail(ErrorKind::DegenerateMoments, "models", "second central moment is not positive");
  return v;
}
}  // namespace detail

inline MomentSpec moment_map(FamilyId f) {
  MomentSpec s;
  switch (f) {
    case FamilyId::Gaussian:
      s.dim = s.params = 2;
      s.h = [](double x) { return Eigen::Vector2d(x, x * x).eval(); };
      s.g = [](const Eigen::VectorXd& y) { return Eigen::Vector2d(y(0), detail::positive_spread(y)).eval(); };
      s.jacobian = [](const Eigen::VectorXd& y) {
        detail::positive_spread(y);
        Eigen::Matrix2d G;
        G << 1.0, 0.0, -2.0 * y(0), 1.0;
        return Eigen::MatrixXd(G);
      };
      break;
    case FamilyId::Gumbel:
      s.dim = s.params = 2;
      s.h = [](double x) { return Eigen::Vector2d(x, x * x).eval(); };
      s.g = [](const Eigen::VectorXd& y) {
        double sc = std::sqrt(6.0 / (pi * pi) * detail::positive_spread(y));
        return Eigen::Vector2d(y(0) - euler_gamma * sc, sc).eval();
      };
      s.jacobian = [](const Eigen::VectorXd& y) {
        double v = detail::positive_spread(y);
        double c = std::sqrt(6.0) / pi;
        double ds = c / (2.0 * std::sqrt(v));  // d sqrt(v)/dv times c
        Eigen::Matrix2d G;
        G << 1.0 + euler_gamma * ds * 2.0 * y(0), -euler_gamma * ds, -ds * 2.0 * y(0), ds;
        return Eigen::MatrixXd(G);
      };
      break;
    case FamilyId::Bernoulli:
      s.dim = s.params = 1;
      s.h = [](double x) { return Eigen::VectorXd::Constant(1, x); };
      s.g = [](const Eigen::VectorXd& y) { return y; };
      s.jacobian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(1, 1); };
      break;
  }
  return s;
}

// Location only, scale known: theta = E X - shift.
inline MomentSpec location_moment_map(FamilyId f, double scale) {
  double shift = f == FamilyId::Gumbel ? euler_gamma * scale : 0.0;
  MomentSpec s;
  s.dim = s.params = 1;
  s.h = [](double x) { return Eigen::VectorXd::Constant(1, x); };
  s.g = [shift](const Eigen::VectorXd& y) { return Eigen::VectorXd::Constant(1, y(0) - shift); };
  s.jacobian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(1, 1); };
  return s;
}

// Linear map y -> y / c, used for the mixture's p = E X1 / E Y.
inline MomentSpec scaled_mean_map(double c) {
  MomentSpec s;
  s.dim = s.params = 1;
  s.h = [](double x) { return Eigen::VectorXd::Constant(1, x); };
  s.g = [c](const Eigen::VectorXd& y) { return Eigen::VectorXd::Constant(1, y(0) / c); };
  s.jacobian = [c](const Eigen::VectorXd&) { return Eigen::MatrixXd::Constant(1, 1, 1.0 / c); };
  return s;
}

}  // namespace mfmc
