#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/models/copula.hpp"
#include "mfmc/models/marginal.hpp"
#include "mfmc/numerics/quadrature.hpp"
#include "mfmc/numerics/rng.hpp"

namespace mfmc {

enum class ModelId { BivariateGaussian, BivariateGumbel, BernoulliCopula, BernoulliMixture };

inline const char* model_name(ModelId m) {
  switch (m) {
    case ModelId::BivariateGaussian: return "bivariate-gaussian";
    case ModelId::BivariateGumbel: return "bivariate-gumbel";
    case ModelId::BernoulliCopula: return "bernoulli-copula";
    case ModelId::BernoulliMixture: return "bernoulli-mixture";
  }
  return "?";
}

inline ModelId parse_model(const std::string& s) {
  if (s == "bivariate-gaussian") return ModelId::BivariateGaussian;
  if (s == "bivariate-gumbel") return ModelId::BivariateGumbel;
  if (s == "bernoulli-copula") return ModelId::BernoulliCopula;
  if (s == "bernoulli-mixture") return ModelId::BernoulliMixture;
  fail(ErrorKind::Usage, "models", "unknown model '" + s + "'");
}

// Beta(a, b) mixing law for the Bernoulli mixture; a = b = 1 is uniform.
struct MixingDensity {
  double a = 1.0;
  double b = 1.0;
  double m1() const { return a / (a + b); }
  double m2() const { return a * (a + 1.0) / ((a + b) * (a + b + 1.0)); }
  double variance() const { return m2() - m1() * m1(); }
};

struct ParamLayout {
  std::vector<int> theta1;
  std::vector<int> theta2;
  std::vector<int> dependence;
};

struct JointEval {
  double log_density;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
};

struct Cell {
  double x1, x2, prob;
};

using Pair = std::pair<double, double>;

class JointModel {
 public:
  static JointModel bivariate_gaussian(double mu1, double var1, double mu2, double var2, double rho) {
    Eigen::VectorXd e(5);
    e << mu1, var1, mu2, var2, rho;
    return JointModel(ModelId::BivariateGaussian, e);
  }
  static JointModel bivariate_gumbel(double mu1, double sigma1, double mu2, double sigma2, double r) {
    Eigen::VectorXd e(5);
    e << mu1, sigma1, mu2, sigma2, r;
    return JointModel(ModelId::BivariateGumbel, e);
  }
  static JointModel bernoulli_copula(double p1, double p2, const Copula& c) {
    Eigen::VectorXd e(c.has_param() ? 3 : 2);
    e(0) = p1;
    e(1) = p2;
    if (c.has_param()) e(2) = c.param();
    return JointModel(ModelId::BernoulliCopula, e, c.id());
  }
  static JointModel bernoulli_mixture(double p, MixingDensity mix = {}) {
    return JointModel(ModelId::BernoulliMixture, Eigen::VectorXd::Constant(1, p), CopulaId::Independence, mix);
  }

  JointModel(ModelId id, Eigen::VectorXd eta, CopulaId copula = CopulaId::Independence, MixingDensity mix = {})
      : id_(id), eta_(std::move(eta)), copula_(copula), mix_(mix) {
    validate();
  }

  ModelId id() const { return id_; }
  const Eigen::VectorXd& eta() const { return eta_; }
  int size() const { return static_cast<int>(eta_.size()); }
  CopulaId copula_id() const { return copula_; }
  const MixingDensity& mixing() const { return mix_; }
  bool is_discrete() const { return id_ == ModelId::BernoulliCopula || id_ == ModelId::BernoulliMixture; }
  JointModel with_eta(const Eigen::VectorXd& e) const { return JointModel(id_, e, copula_, mix_); }

  ParamLayout layout() const {
    switch (id_) {
      case ModelId::BivariateGaussian:
      case ModelId::BivariateGumbel: return {{0, 1}, {2, 3}, {4}};
      case ModelId::BernoulliCopula:
        if (size() == 3) return {{0}, {1}, {2}};
        return {{0}, {1}, {}};
      case ModelId::BernoulliMixture: return {{0}, {}, {}};
    }
    return {};
  }

  bool has_dependence() const { return !layout().dependence.empty(); }
  double dependence() const { return has_dependence() ? eta_(layout().dependence[0]) : 0.0; }
  JointModel with_dependence(double d) const {
    Eigen::VectorXd e = eta_;
    e(layout().dependence.at(0)) = d;
    return with_eta(e);
  }

  // upper end of the admissible range of each coordinate (for one-sided differences)
  double upper_bound(int i) const {
    if (id_ == ModelId::BivariateGumbel && i == 4) return 1.0;
    if (id_ == ModelId::BernoulliCopula && i == 2 && copula_ == CopulaId::GumbelHougaard) return 1.0;
    return std::numeric_limits<double>::infinity();
  }

  MarginalFamily marginal(int j) const {
    if (j != 1 && j != 2) fail(ErrorKind::Domain, "models", "marginal index must be 1 or 2");
    int o = 2 * (j - 1);
    switch (id_) {
      case ModelId::BivariateGaussian: return MarginalFamily::gaussian(eta_(o), eta_(o + 1));
      case ModelId::BivariateGumbel: return MarginalFamily::gumbel(eta_(o), eta_(o + 1));
      case ModelId::BernoulliCopula: return MarginalFamily::bernoulli(eta_(j - 1));
      case ModelId::BernoulliMixture:
        return MarginalFamily::bernoulli(j == 1 ? eta_(0) * mix_.m1() : mix_.m1());
    }
    return MarginalFamily::bernoulli(0.5);
  }

  Copula copula() const {
    if (id_ != ModelId::BernoulliCopula) fail(ErrorKind::Domain, "models", "model has no copula");
    return Copula(copula_, size() == 3 ? eta_(2) : 0.0);
  }

  std::array<Cell, 4> cells() const {
    std::array<Cell, 4> c{};
    if (id_ == ModelId::BernoulliCopula) {
      double p1 = eta_(0), p2 = eta_(1), C = copula()(p1, p2);
      c = {Cell{1, 1, C}, Cell{1, 0, p1 - C}, Cell{0, 1, p2 - C}, Cell{0, 0, 1.0 - p1 - p2 + C}};
    } else if (id_ == ModelId::BernoulliMixture) {
      double p = eta_(0), m1 = mix_.m1(), m2 = mix_.m2();
      c = {Cell{1, 1, p * m2}, Cell{1, 0, p * (m1 - m2)}, Cell{0, 1, m1 - p * m2},
           Cell{0, 0, 1.0 - m1 - p * m1 + p * m2}};
    } else {
      fail(ErrorKind::Domain, "models", "cells are defined for discrete models only");
    }
    return c;
  }

  double log_density(double x1, double x2) const {
    switch (id_) {
      case ModelId::BivariateGaussian: return gaussian_logpdf(eta_, x1, x2);
      case ModelId::BivariateGumbel: return gumbel_logpdf(eta_, x1, x2);
      case ModelId::BernoulliCopula:
      case ModelId::BernoulliMixture: return std::log(cell_prob(x1, x2));
    }
    return 0.0;
  }

  Eigen::VectorXd gradient(double x1, double x2) const {
    switch (id_) {
      case ModelId::BivariateGaussian: return gaussian_grad(x1, x2);
      case ModelId::BivariateGumbel: return gumbel_grad(x1, x2);
      case ModelId::BernoulliCopula: return copula_grad(x1, x2);
      case ModelId::BernoulliMixture: {
        double m1 = mix_.m1(), m2 = mix_.m2();
        double dp = x1 == 1.0 ? (x2 == 1.0 ? m2 : m1 - m2) : (x2 == 1.0 ? -m2 : m2 - m1);
        return Eigen::VectorXd::Constant(1, dp / cell_prob(x1, x2));
      }
    }
    return {};
  }

  // central differences of the analytic gradient, one-sided at an upper edge
  Eigen::MatrixXd hessian(double x1, double x2) const {
    std::vector<int> all(size());
    for (int i = 0; i < size(); ++i) all[i] = i;
    return hessian(x1, x2, all);
  }

  // block of the Hessian over the coordinates in idx
  Eigen::MatrixXd hessian(double x1, double x2, const std::vector<int>& idx) const {
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd H(k, k);
    if (id_ == ModelId::BernoulliMixture) {
      double g = gradient(x1, x2)(0);
      H.setConstant(-g * g);
      return H;
    }
    auto pick = [&](const Eigen::VectorXd& g) {
      Eigen::VectorXd o(k);
      for (int a = 0; a < k; ++a) o(a) = g(idx[a]);
      return o;
    };
    for (int c = 0; c < k; ++c) {
      int i = idx[c];
      double h = 1e-5 * (1.0 + std::abs(eta_(i)));
      Eigen::VectorXd e = eta_;
      if (eta_(i) + h > upper_bound(i)) {
        e(i) = eta_(i) - h;
        Eigen::VectorXd g1 = pick(with_eta(e).gradient(x1, x2));
        e(i) = eta_(i) - 2.0 * h;
        Eigen::VectorXd g2 = pick(with_eta(e).gradient(x1, x2));
        H.col(c) = (3.0 * pick(gradient(x1, x2)) - 4.0 * g1 + g2) / (2.0 * h);
      } else {
        e(i) = eta_(i) + h;
        Eigen::VectorXd gp = pick(with_eta(e).gradient(x1, x2));
        e(i) = eta_(i) - h;
        Eigen::VectorXd gm = pick(with_eta(e).gradient(x1, x2));
        H.col(c) = (gp - gm) / (2.0 * h);
      }
    }
    return 0.5 * (H + H.transpose());
  }

  JointEval eval(double x1, double x2) const { return {log_density(x1, x2), gradient(x1, x2), hessian(x1, x2)}; }

  std::vector<Pair> sample(std::size_t count, RngStream& rng) const {
    std::vector<Pair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(draw(rng));
    return out;
  }

  Pair draw(RngStream& rng) const {
    switch (id_) {
      case ModelId::BivariateGaussian: {
        double z1 = rng.normal(), e = rng.normal(), rho = eta_(4);
        double z2 = rho * z1 + std::sqrt(1.0 - rho * rho) * e;
        return {eta_(0) + std::sqrt(eta_(1)) * z1, eta_(2) + std::sqrt(eta_(3)) * z2};
      }
      case ModelId::BivariateGumbel: {
        double r = eta_(4);
        if (r > 0.999) {
          double e1 = rng.exponential(), e2 = rng.exponential();
          return {eta_(0) - eta_(1) * std::log(e1), eta_(2) - eta_(3) * std::log(e2)};
        }
        double lv = std::log(positive_stable(r, rng));
        double e1 = rng.exponential(), e2 = rng.exponential();
        return {eta_(0) - eta_(1) * r * (std::log(e1) - lv), eta_(2) - eta_(3) * r * (std::log(e2) - lv)};
      }
      case ModelId::BernoulliCopula: {
        auto [u1, u2] = copula().sample(rng);
        return {u1 <= eta_(0) ? 1.0 : 0.0, u2 <= eta_(1) ? 1.0 : 0.0};
      }
      case ModelId::BernoulliMixture: {
        double y = (mix_.a == 1.0 && mix_.b == 1.0) ? rng.uniform() : rng.beta(mix_.a, mix_.b);
        double u1 = rng.uniform(), u2 = rng.uniform();
        return {u1 < eta_(0) * y ? 1.0 : 0.0, u2 < y ? 1.0 : 0.0};
      }
    }
    return {0.0, 0.0};
  }

  // E f(X1, X2) for vector-valued f: exact sums for discrete models, tensor quadrature otherwise.
  template <class F>
  Eigen::VectorXd expect(const F& f, const QuadratureOptions& q = {}) const {
    if (is_discrete()) {
      Eigen::VectorXd acc;
      for (const Cell& c : cells()) {
        if (c.prob <= 0.0) continue;
        Eigen::VectorXd v = f(c.x1, c.x2);
        if (acc.size() == 0) acc = Eigen::VectorXd::Zero(v.size());
        acc += c.prob * v;
      }
      return acc;
    }
    Eigen::VectorXd mag;
    Eigen::VectorXd a = tensor_expect(f, q.nodes, mag);
    if (!q.refine) return a;
    Eigen::VectorXd b = tensor_expect(f, 2 * q.nodes, mag);
    // relative to E|f| so that entries with mean zero are judged sensibly
    double scale = mag.lpNorm<Eigen::Infinity>();
    if ((a - b).lpNorm<Eigen::Infinity>() > q.rel_tol * std::max(scale, 1e-300))
      fail(ErrorKind::Integration, "asymptotics",
           "quadrature refinement changed the result by more than the tolerance");
    return b;
  }

  template <class F>
  Eigen::VectorXd expect_mc(const F& f, std::size_t draws, std::uint64_t seed) const {
    RngStream rng(seed);
    Eigen::VectorXd acc;
    for (std::size_t i = 0; i < draws; ++i) {
      auto [x1, x2] = draw(rng);
      Eigen::VectorXd v = f(x1, x2);
      if (acc.size() == 0) acc = Eigen::VectorXd::Zero(v.size());
      acc += v;
    }
    return acc / static_cast<double>(draws);
  }

  double cell_prob(double x1, double x2) const {
    for (const Cell& c : cells())
      if (c.x1 == x1 && c.x2 == x2) return c.prob;
    fail(ErrorKind::Domain, "models", "binary model observed a value other than 0 or 1");
  }

 private:
  void validate() const {
    auto bad = [](const std::string& m) { fail(ErrorKind::Domain, "models", m); };
    for (int i = 0; i < eta_.size(); ++i)
      if (!std::isfinite(eta_(i))) bad("non-finite model parameter");
    switch (id_) {
      case ModelId::BivariateGaussian:
        if (eta_.size() != 5) bad("bivariate gaussian takes 5 parameters");
        if (!(eta_(1) > 0 && eta_(3) > 0)) bad("variances must be positive");
        if (!(eta_(4) > -1.0 && eta_(4) < 1.0)) bad("correlation must lie in (-1,1)");
        break;
      case ModelId::BivariateGumbel:
        if (eta_.size() != 5) bad("bivariate gumbel takes 5 parameters");
        if (!(eta_(1) > 0 && eta_(3) > 0)) bad("scales must be positive");
        if (!(eta_(4) > 0.0 && eta_(4) <= 1.0)) bad("logistic dependence r must lie in (0,1]");
        break;
      case ModelId::BernoulliCopula: {
        if (eta_.size() != 2 && eta_.size() != 3) bad("bernoulli copula takes 2 or 3 parameters");
        if (!(eta_(0) > 0 && eta_(0) < 1 && eta_(1) > 0 && eta_(1) < 1)) bad("bernoulli p must lie in (0,1)");
        for (const Cell& cell : cells())
          if (!(cell.prob >= 0.0)) bad("copula parameters give a negative cell probability");
        break;
      }
      case ModelId::BernoulliMixture:
        if (eta_.size() != 1) bad("bernoulli mixture takes 1 parameter");
        if (!(eta_(0) > 0 && eta_(0) <= 1)) bad("mixture p must lie in (0,1]");
        if (!(mix_.a > 0 && mix_.b > 0)) bad("mixing beta parameters must be positive");
        break;
    }
  }

  static double gaussian_logpdf(const Eigen::VectorXd& e, double x1, double x2) {
    double z1 = (x1 - e(0)) / std::sqrt(e(1)), z2 = (x2 - e(2)) / std::sqrt(e(3)), rho = e(4);
    double om = 1.0 - rho * rho;
    double q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / om;
    return -std::log(2.0 * pi) - 0.5 * std::log(e(1) * e(3) * om) - 0.5 * q;
  }

  Eigen::VectorXd gaussian_grad(double x1, double x2) const {
    double v1 = eta_(1), v2 = eta_(3), rho = eta_(4);
    double s1 = std::sqrt(v1), s2 = std::sqrt(v2);
    double z1 = (x1 - eta_(0)) / s1, z2 = (x2 - eta_(2)) / s2, om = 1.0 - rho * rho;
    double q = z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2;
    Eigen::VectorXd g(5);
    g(0) = (z1 - rho * z2) / (om * s1);
    g(1) = -0.5 / v1 + z1 * (z1 - rho * z2) / (2.0 * v1 * om);
    g(2) = (z2 - rho * z1) / (om * s2);
    g(3) = -0.5 / v2 + z2 * (z2 - rho * z1) / (2.0 * v2 * om);
    double dq = (-2.0 * z1 * z2 * om + 2.0 * rho * q) / (om * om);
    g(4) = rho / om - 0.5 * dq;
    return g;
  }

  struct GumbelParts {
    double L1, L2, lnS, w1, w2, Q, a;
  };

  static GumbelParts gumbel_parts(const Eigen::VectorXd& e, double x1, double x2) {
    GumbelParts p;
    p.a = 1.0 / e(4);
    p.L1 = -(x1 - e(0)) / e(1);
    p.L2 = -(x2 - e(2)) / e(3);
    double u = p.a * p.L1, v = p.a * p.L2, mx = std::max(u, v);
    p.lnS = mx + std::log(std::exp(u - mx) + std::exp(v - mx));
    p.w1 = std::exp(u - p.lnS);
    p.w2 = std::exp(v - p.lnS);
    p.Q = std::exp(p.lnS / p.a);
    return p;
  }

  static double gumbel_logpdf(const Eigen::VectorXd& e, double x1, double x2) {
    GumbelParts p = gumbel_parts(e, x1, x2);
    return -p.Q + p.a * (p.L1 + p.L2) + (1.0 / p.a - 2.0) * p.lnS + std::log(p.Q + p.a - 1.0) -
           std::log(e(1)) - std::log(e(3));
  }

  Eigen::VectorXd gumbel_grad(double x1, double x2) const {
    GumbelParts p = gumbel_parts(eta_, x1, x2);
    double a = p.a, Q = p.Q, den = Q + a - 1.0;
    double D1 = -Q * p.w1 + a + (1.0 - 2.0 * a) * p.w1 + Q * p.w1 / den;
    double D2 = -Q * p.w2 + a + (1.0 - 2.0 * a) * p.w2 + Q * p.w2 / den;
    double s1 = eta_(1), s2 = eta_(3);
    double t1 = -p.L1, t2 = -p.L2;
    double L = p.w1 * p.L1 + p.w2 * p.L2;
    double Qa = Q * (L / a - p.lnS / (a * a));
    double da = -Qa + p.L1 + p.L2 - p.lnS / (a * a) + (1.0 / a - 2.0) * L + (Qa + 1.0) / den;
    Eigen::VectorXd g(5);
    g(0) = D1 / s1;
    g(1) = (D1 * t1 - 1.0) / s1;
    g(2) = D2 / s2;
    g(3) = (D2 * t2 - 1.0) / s2;
    g(4) = -a * a * da;
    return g;
  }

  Eigen::VectorXd copula_grad(double x1, double x2) const {
    Copula c = copula();
    double p1 = eta_(0), p2 = eta_(1);
    double P = cell_prob(x1, x2);
    double d1 = c.d1(p1, p2), d2 = c.d2(p1, p2);
    // dP/dp1 and dP/dp2 per cell
    double g1 = x2 == 1.0 ? (x1 == 1.0 ? d1 : -d1) : (x1 == 1.0 ? 1.0 - d1 : d1 - 1.0);
    double g2 = x1 == 1.0 ? (x2 == 1.0 ? d2 : -d2) : (x2 == 1.0 ? 1.0 - d2 : d2 - 1.0);
    Eigen::VectorXd g(size());
    g(0) = g1 / P;
    g(1) = g2 / P;
    if (size() == 3) {
      double t = eta_(2), h = 1e-6 * (1.0 + std::abs(t));
      Eigen::VectorXd e = eta_;
      auto lp = [&](double v) {
        e(2) = v;
        return std::log(with_eta(e).cell_prob(x1, x2));
      };
      if (t + h > upper_bound(2))
        g(2) = (3.0 * std::log(P) - 4.0 * lp(t - h) + lp(t - 2.0 * h)) / (2.0 * h);
      else
        g(2) = (lp(t + h) - lp(t - h)) / (2.0 * h);
    }
    return g;
  }

  template <class F>
  Eigen::VectorXd tensor_expect(const F& f, int n, Eigen::VectorXd& mag) const {
    const Rule& rule = id_ == ModelId::BivariateGaussian ? gauss_hermite(n) : gauss_legendre(n);
    Eigen::VectorXd acc;
    auto add = [&](double w, double x1, double x2) {
      if (w == 0.0) return;
      Eigen::VectorXd v = f(x1, x2);
      if (acc.size() == 0) {
        acc = Eigen::VectorXd::Zero(v.size());
        mag = Eigen::VectorXd::Zero(v.size());
      }
      acc += w * v;
      mag += w * v.cwiseAbs();
    };
    if (id_ == ModelId::BivariateGaussian) {
      double s1 = std::sqrt(eta_(1)), s2 = std::sqrt(eta_(3)), rho = eta_(4), c = std::sqrt(1.0 - rho * rho);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double z1 = rule.nodes[i], z2 = rule.nodes[j];
          add(rule.weights[i] * rule.weights[j], eta_(0) + s1 * z1, eta_(2) + s2 * (rho * z1 + c * z2));
        }
      return acc;
    }
    // bivariate gumbel: z1 = s V^r, z2 = s (1-V)^r with V ~ U(0,1) independent of
    // s ~ exp(-s) (1 - r + r s)
    const EndpointMap psi{3.0};
    double r = eta_(4);
    std::vector<double> lv1(n), lv2(n), wv(n), ls(n), ws(n);
    for (int i = 0; i < n; ++i) {
      double u = 0.5 * (1.0 + rule.nodes[i]), w = 0.5 * rule.weights[i];
      lv1[i] = std::log(psi.value(u));
      lv2[i] = std::log(psi.complement(u));
      wv[i] = w * psi.derivative(u);
      double s = -std::log(psi.complement(u));
      ls[i] = std::log(s);
      ws[i] = w * psi.derivative(u) * (1.0 - r + r * s);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double lz1 = ls[j] + r * lv1[i], lz2 = ls[j] + r * lv2[i];
        add(wv[i] * ws[j], eta_(0) - eta_(1) * lz1, eta_(2) - eta_(3) * lz2);
      }
    return acc;
  }

  ModelId id_;
  Eigen::VectorXd eta_;
  CopulaId copula_;
  MixingDensity mix_;
};

}  // namespace mfmc
