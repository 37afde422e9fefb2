#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/models/joint.hpp"
#include "mfmc/models/marginal.hpp"

namespace mfmc {

enum class InfoMethod { Quadrature, MonteCarlo };

struct InfoOptions {
  InfoMethod method = InfoMethod::Quadrature;
  QuadratureOptions quad;
  std::size_t draws = 1000000;
  std::uint64_t seed = 1;
};

// Closed form; location_only keeps the (mu, mu) entry.
inline Eigen::MatrixXd fisher_information(const MarginalFamily& f, bool location_only = false) {
  Eigen::MatrixXd I = f.fisher_information();
  if (location_only) return I.topLeftCorner(1, 1);
  return I;
}

// -E[Hessian] of the joint log density over the coordinates in free.
inline Eigen::MatrixXd fisher_information(const JointModel& m, const std::vector<int>& free,
                                          const InfoOptions& o = {}) {
  const int k = static_cast<int>(free.size());
  if (m.is_discrete()) {
    // sum over cells of the second derivative vanishes, so E[s s'] is exact here
    Eigen::MatrixXd I = Eigen::MatrixXd::Zero(k, k);
    for (const Cell& c : m.cells()) {
      if (c.prob <= 0.0) continue;
      Eigen::VectorXd g = m.gradient(c.x1, c.x2), s(k);
      for (int a = 0; a < k; ++a) s(a) = g(free[a]);
      I += c.prob * s * s.transpose();
    }
    return I;
  }
  auto f = [&](double x1, double x2) {
    Eigen::MatrixXd H = m.hessian(x1, x2, free);
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(H.data(), k * k));
  };
  Eigen::VectorXd v = o.method == InfoMethod::Quadrature ? m.expect(f, o.quad) : m.expect_mc(f, o.draws, o.seed);
  Eigen::MatrixXd I = -Eigen::Map<Eigen::MatrixXd>(v.data(), k, k);
  return 0.5 * (I + I.transpose());
}

// Inverse with a conditioning check; the message carries the condition number.
inline Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& A, const char* module) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  double cond = s(0) / s(s.size() - 1);
  if (!(s(s.size() - 1) > 0.0) || !std::isfinite(cond) || cond > 1e13)
    fail(ErrorKind::SingularSystem, module, "matrix is singular or ill-conditioned (condition number " +
                                                std::to_string(cond) + ")");
  return A.inverse();
}

}  // namespace mfmc
