#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>

#include "mfmc/numerics/rng.hpp"

namespace mfmc {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
  int simplex_iterations = 400;
  double simplex_size = 1e-3;
  double initial_step = 0.25;
  int bfgs_iterations = 300;
  int newton_steps = 4;
  double gradient_tol = 1e-7;
  int restarts = 3;
  double restart_scale = 0.5;
  std::uint64_t seed = 20240601;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
  double gradient_norm = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int attempts = 0;
};

namespace detail {

struct Counted {
  const Objective* f;
  int evals = 0;
  double operator()(const Eigen::VectorXd& x) {
    ++evals;
    double v = (*f)(x);
    return std::isfinite(v) ? v : 1e300;
  }
};

inline Eigen::VectorXd fd_gradient(Counted& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size()), y = x;
  for (int i = 0; i < x.size(); ++i) {
    double h = 1e-6 * (1.0 + std::abs(x(i)));
    y(i) = x(i) + h;
    double fp = f(y);
    y(i) = x(i) - h;
    double fm = f(y);
    y(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(Counted& f, const Eigen::VectorXd& x) {
  const int k = static_cast<int>(x.size());
  Eigen::MatrixXd H(k, k);
  Eigen::VectorXd h(k), y = x;
  for (int i = 0; i < k; ++i) h(i) = 1e-4 * (1.0 + std::abs(x(i)));
  double f0 = f(x);
  for (int i = 0; i < k; ++i) {
    y(i) = x(i) + h(i);
    double fp = f(y);
    y(i) = x(i) - h(i);
    double fm = f(y);
    y(i) = x(i);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    for (int j = 0; j < i; ++j) {
      double s[4];
      int c = 0;
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          y(i) = x(i) + a * h(i);
          y(j) = x(j) + b * h(j);
          s[c++] = f(y);
        }
      y(i) = x(i);
      y(j) = x(j);
      H(i, j) = H(j, i) = (s[0] - s[1] - s[2] + s[3]) / (4.0 * h(i) * h(j));
    }
  }
  return H;
}

inline Eigen::VectorXd to_eigen(const gsl_vector* v) {
  Eigen::VectorXd x(v->size);
  for (size_t i = 0; i < v->size; ++i) x(i) = gsl_vector_get(v, i);
  return x;
}

inline void to_gsl(const Eigen::VectorXd& x, gsl_vector* v) {
  for (int i = 0; i < x.size(); ++i) gsl_vector_set(v, i, x(i));
}

struct VecDel {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using GslVec = std::unique_ptr<gsl_vector, VecDel>;

inline GslVec make_vec(const Eigen::VectorXd& x) {
  GslVec v(gsl_vector_alloc(x.size()));
  to_gsl(x, v.get());
  return v;
}

inline double gsl_f(const gsl_vector* v, void* p) { return (*static_cast<Counted*>(p))(to_eigen(v)); }

inline void gsl_df(const gsl_vector* v, void* p, gsl_vector* g) {
  to_gsl(fd_gradient(*static_cast<Counted*>(p), to_eigen(v)), g);
}

inline void gsl_fdf(const gsl_vector* v, void* p, double* f, gsl_vector* g) {
  *f = gsl_f(v, p);
  gsl_df(v, p, g);
}

inline Eigen::VectorXd simplex(Counted& f, const Eigen::VectorXd& x0, const OptimOptions& o) {
  const size_t k = x0.size();
  gsl_multimin_function fn{&gsl_f, k, &f};
  std::unique_ptr<gsl_multimin_fminimizer, void (*)(gsl_multimin_fminimizer*)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, k), gsl_multimin_fminimizer_free);
  GslVec x = make_vec(x0);
  GslVec step = make_vec(Eigen::VectorXd::Constant(k, o.initial_step));
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
  for (int it = 0; it < o.simplex_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(s.get())) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), o.simplex_size) == GSL_SUCCESS) break;
  }
  return to_eigen(gsl_multimin_fminimizer_x(s.get()));
}

inline Eigen::VectorXd quasi_newton(Counted& f, const Eigen::VectorXd& x0, const OptimOptions& o) {
  const size_t k = x0.size();
  gsl_multimin_function_fdf fn{&gsl_f, &gsl_df, &gsl_fdf, k, &f};
  std::unique_ptr<gsl_multimin_fdfminimizer, void (*)(gsl_multimin_fdfminimizer*)> s(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, k), gsl_multimin_fdfminimizer_free);
  GslVec x = make_vec(x0);
  gsl_multimin_fdfminimizer_set(s.get(), &fn, x.get(), 0.05, 0.1);
  for (int it = 0; it < o.bfgs_iterations; ++it) {
    if (gsl_multimin_fdfminimizer_iterate(s.get())) break;
    if (gsl_multimin_test_gradient(s->gradient, o.gradient_tol) == GSL_SUCCESS) break;
  }
  return to_eigen(gsl_multimin_fdfminimizer_x(s.get()));
}

inline Eigen::VectorXd newton_polish(Counted& f, Eigen::VectorXd x, const OptimOptions& o) {
  double fx = f(x);
  for (int it = 0; it < o.newton_steps; ++it) {
    Eigen::VectorXd g = fd_gradient(f, x);
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
    Eigen::LLT<Eigen::MatrixXd> llt(fd_hessian(f, x));
    if (llt.info() != Eigen::Success) break;
    Eigen::VectorXd d = -llt.solve(g);
    bool moved = false;
    for (double t = 1.0; t > 1e-4; t *= 0.5) {
      Eigen::VectorXd y = x + t * d;
      double fy = f(y);
      if (fy <= fx) {
        x = y;
        fx = fy;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace detail

// Simplex, then BFGS on central-difference gradients, then a few Newton steps.
// Restarts from a perturbed best point when an attempt does not converge.
inline OptimResult minimize(const Objective& objective, const Eigen::VectorXd& x0, const OptimOptions& o = {}) {
  gsl_set_error_handler_off();
  detail::Counted f{&objective};
  OptimResult best;
  RngStream rng(o.seed);
  Eigen::VectorXd start = x0;
  for (int attempt = 0; attempt <= o.restarts; ++attempt) {
    Eigen::VectorXd x = detail::simplex(f, start, o);
    x = detail::quasi_newton(f, x, o);
    x = detail::newton_polish(f, x, o);
    double v = f(x);
    double gn = detail::fd_gradient(f, x).lpNorm<Eigen::Infinity>();
    bool ok = std::isfinite(v) && v < 1e300 && gn <= o.gradient_tol * (1.0 + std::abs(v));
    if (v < best.value || (ok && !best.converged && v <= best.value + 1e-12)) {
      best.x = x;
      best.value = v;
      best.gradient_norm = gn;
      best.converged = ok;
    }
    best.attempts = attempt + 1;
    if (best.converged) break;
    start = best.x;
    for (int i = 0; i < start.size(); ++i) start(i) += o.restart_scale * rng.normal();
  }
  best.evaluations = f.evals;
  return best;
}

}  // namespace mfmc
