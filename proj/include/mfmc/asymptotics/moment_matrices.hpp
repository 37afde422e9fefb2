#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "mfmc/models/joint.hpp"

namespace mfmc {

using FeatureMap = std::function<Eigen::VectorXd(double)>;

// Second moments of high-fidelity features h1(X1) and low-fidelity features h2(X2).
// c_hl(i, j) = cov(h1_i, h2_j).
struct MomentMatrices {
  Eigen::VectorXd mean_h, mean_l;
  Eigen::MatrixXd c_hh, c_hl, c_ll;
  Eigen::VectorXd v_h() const { return c_hh.diagonal(); }
  Eigen::VectorXd v_l() const { return c_ll.diagonal(); }
};

enum class MomentMethod { Quadrature, MonteCarlo };

struct MomentOptions {
  MomentMethod method = MomentMethod::Quadrature;
  QuadratureOptions quad;
  std::size_t draws = 1000000;
  std::uint64_t seed = 1;
};

inline MomentMatrices moment_matrices(const JointModel& m, const FeatureMap& h1, const FeatureMap& h2,
                                      const MomentOptions& o = {}) {
  const int d1 = static_cast<int>(h1(0.0).size()), d2 = static_cast<int>(h2(0.0).size());
  MomentMatrices mm;
  if (o.method == MomentMethod::MonteCarlo) {
    RngStream rng(o.seed);
    auto s = m.sample(o.draws, rng);
    Eigen::MatrixXd A(o.draws, d1), B(o.draws, d2);
    for (std::size_t i = 0; i < o.draws; ++i) {
      A.row(i) = h1(s[i].first).transpose();
      B.row(i) = h2(s[i].second).transpose();
    }
    mm.mean_h = A.colwise().mean();
    mm.mean_l = B.colwise().mean();
    A.rowwise() -= mm.mean_h.transpose();
    B.rowwise() -= mm.mean_l.transpose();
    double N = static_cast<double>(o.draws);
    mm.c_hh = A.transpose() * A / N;
    mm.c_hl = A.transpose() * B / N;
    mm.c_ll = B.transpose() * B / N;
    return mm;
  }
  const int len = d1 + d2 + d1 * d1 + d1 * d2 + d2 * d2;
  auto f = [&](double x1, double x2) {
    Eigen::VectorXd a = h1(x1), b = h2(x2), v(len);
    int k = 0;
    for (int i = 0; i < d1; ++i) v(k++) = a(i);
    for (int i = 0; i < d2; ++i) v(k++) = b(i);
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d1; ++j) v(k++) = a(i) * a(j);
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d2; ++j) v(k++) = a(i) * b(j);
    for (int i = 0; i < d2; ++i)
      for (int j = 0; j < d2; ++j) v(k++) = b(i) * b(j);
    return v;
  };
  Eigen::VectorXd e = m.expect(f, o.quad);
  int k = 0;
  mm.mean_h = e.segment(k, d1);
  k += d1;
  mm.mean_l = e.segment(k, d2);
  k += d2;
  mm.c_hh.resize(d1, d1);
  mm.c_hl.resize(d1, d2);
  mm.c_ll.resize(d2, d2);
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j) mm.c_hh(i, j) = e(k++) - mm.mean_h(i) * mm.mean_h(j);
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d2; ++j) mm.c_hl(i, j) = e(k++) - mm.mean_h(i) * mm.mean_l(j);
  for (int i = 0; i < d2; ++i)
    for (int j = 0; j < d2; ++j) mm.c_ll(i, j) = e(k++) - mm.mean_l(i) * mm.mean_l(j);
  return mm;
}

inline MomentMatrices moment_matrices(const JointModel& m, const FeatureMap& h, const MomentOptions& o = {}) {
  return moment_matrices(m, h, h, o);
}

}  // namespace mfmc
