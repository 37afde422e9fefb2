#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mfmc/asymptotics/moment_matrices.hpp"
#include "mfmc/core/error.hpp"

namespace mfmc {

// n Cov(theta_l, theta_k) for estimators mu_r = Y1_r + a_r (Y2all_r - Y2_r) pushed through
// g with Jacobian G; kappa = m / (n + m), 1 when the low-fidelity mean is known.
inline Eigen::MatrixXd mf_covariance(const Eigen::MatrixXd& c_hh, const Eigen::MatrixXd& c_hl,
                                     const Eigen::MatrixXd& c_ll, const Eigen::MatrixXd& G,
                                     const std::vector<Eigen::VectorXd>& alpha, double kappa) {
  const int p = static_cast<int>(G.rows()), d = static_cast<int>(G.cols());
  Eigen::MatrixXd S(p, p);
  for (int l = 0; l < p; ++l)
    for (int k = 0; k < p; ++k) {
      const Eigen::VectorXd& al = alpha[l];
      const Eigen::VectorXd& ak = alpha[k];
      double acc = 0.0;
      for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s) {
          double mrs = c_hh(r, s) - kappa * (ak(s) * c_hl(r, s) + al(r) * c_hl(s, r) - al(r) * ak(s) * c_ll(r, s));
          acc += G(l, r) * mrs * G(k, s);
        }
      S(l, k) = acc;
    }
  return S;
}

// Minimiser of component l's variance over alpha. Entries with g_j = 0 do not enter and are zero.
inline Eigen::VectorXd optimal_alpha(const Eigen::MatrixXd& c_hl, const Eigen::MatrixXd& c_ll,
                                     const Eigen::RowVectorXd& g) {
  const int d = static_cast<int>(g.size());
  std::vector<int> J;
  for (int j = 0; j < d; ++j)
    if (g(j) != 0.0) J.push_back(j);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(d);
  if (J.empty()) return alpha;
  Eigen::VectorXd c = c_hl.transpose() * g.transpose();
  const int k = static_cast<int>(J.size());
  Eigen::MatrixXd A(k, k);
  Eigen::VectorXd b(k);
  for (int a = 0; a < k; ++a) {
    b(a) = c(J[a]);
    for (int e = 0; e < k; ++e) A(a, e) = c_ll(J[a], J[e]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cond = sv(0) / sv(k - 1);
  if (!(sv(k - 1) > 0.0) || !(cond < 1e12))
    fail(ErrorKind::SingularSystem, "estimators",
         "low-fidelity covariance block is singular (condition number " + std::to_string(cond) + ")");
  Eigen::VectorXd beta = svd.solve(b);
  for (int a = 0; a < k; ++a) alpha(J[a]) = beta(a) / g(J[a]);
  return alpha;
}

// Two-feature closed form.
inline Eigen::Vector2d optimal_alpha_2x2(const Eigen::MatrixXd& c_hl, const Eigen::MatrixXd& c_ll,
                                         const Eigen::RowVectorXd& g) {
  double g1 = g(0), g2 = g(1);
  double c1 = c_hl(0, 0) * g1 + c_hl(1, 0) * g2;
  double c2 = c_hl(0, 1) * g1 + c_hl(1, 1) * g2;
  double a = c_ll(0, 0), b = c_ll(0, 1), d = c_ll(1, 1);
  if (g1 == 0.0 && g2 == 0.0) return {0.0, 0.0};
  if (g2 == 0.0) return {c1 / (a * g1), 0.0};
  if (g1 == 0.0) return {0.0, c2 / (d * g2)};
  double det = a * d - b * b;
  if (!(det > 0.0)) fail(ErrorKind::SingularSystem, "estimators", "low-fidelity covariance block is singular");
  return {(d * c1 - b * c2) / (det * g1), (a * c2 - b * c1) / (det * g2)};
}

inline std::vector<Eigen::VectorXd> optimal_alphas(const MomentMatrices& mm, const Eigen::MatrixXd& G) {
  std::vector<Eigen::VectorXd> out;
  for (int l = 0; l < G.rows(); ++l) {
    if (G.cols() == 2)
      out.push_back(optimal_alpha_2x2(mm.c_hl, mm.c_ll, G.row(l)));
    else
      out.push_back(optimal_alpha(mm.c_hl, mm.c_ll, G.row(l)));
  }
  return out;
}

}  // namespace mfmc
