#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/numerics/summation.hpp"

namespace mfmc {

// Paired block (x1, x2) plus a low-fidelity-only block; weights are normalised per block.
class MFDataset {
 public:
  MFDataset(std::vector<double> x1, std::vector<double> x2, std::vector<double> lofi = {},
            std::vector<double> w_paired = {}, std::vector<double> w_lofi = {})
      : x1_(std::move(x1)), x2_(std::move(x2)), lofi_(std::move(lofi)) {
    if (x1_.size() != x2_.size()) fail(ErrorKind::Dataset, "estimators", "paired columns differ in length");
    if (x1_.size() < 2) fail(ErrorKind::Dataset, "estimators", "need at least two paired samples");
    for (double v : x1_)
      if (!std::isfinite(v)) fail(ErrorKind::Dataset, "estimators", "non-finite sample");
    for (double v : x2_)
      if (!std::isfinite(v)) fail(ErrorKind::Dataset, "estimators", "non-finite sample");
    for (double v : lofi_)
      if (!std::isfinite(v)) fail(ErrorKind::Dataset, "estimators", "non-finite sample");
    wp_ = normalise(std::move(w_paired), x1_.size());
    wl_ = normalise(std::move(w_lofi), lofi_.size());
  }

  std::size_t n() const { return x1_.size(); }
  std::size_t m() const { return lofi_.size(); }
  const std::vector<double>& x1() const { return x1_; }
  const std::vector<double>& x2() const { return x2_; }
  const std::vector<double>& lofi() const { return lofi_; }
  const std::vector<double>& paired_weights() const { return wp_; }
  const std::vector<double>& lofi_weights() const { return wl_; }

  // every low-fidelity value, paired block first
  std::vector<double> all_lofi() const {
    std::vector<double> v = x2_;
    v.insert(v.end(), lofi_.begin(), lofi_.end());
    return v;
  }

  // block weights scaled by the block's share of the n + m samples
  std::vector<double> all_lofi_weights() const {
    double N = static_cast<double>(n() + m());
    std::vector<double> w;
    w.reserve(n() + m());
    for (double v : wp_) w.push_back(v * n() / N);
    for (double v : wl_) w.push_back(v * m() / N);
    return w;
  }

  double kappa() const { return static_cast<double>(m()) / static_cast<double>(n() + m()); }

  bool uniform_weights() const { return uniform_; }

 private:
  std::vector<double> normalise(std::vector<double> w, std::size_t count) {
    if (w.empty()) return std::vector<double>(count, count ? 1.0 / count : 0.0);
    if (w.size() != count) fail(ErrorKind::Dataset, "estimators", "weight column length mismatch");
    for (double v : w)
      if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::Dataset, "estimators", "weights must be non-negative");
    double s = pairwise_sum(w);
    if (!(s > 0.0)) fail(ErrorKind::Dataset, "estimators", "weights sum to zero");
    for (double& v : w) {
      v /= s;
      if (std::abs(v * count - 1.0) > 1e-12) uniform_ = false;
    }
    return w;
  }

  std::vector<double> x1_, x2_, lofi_, wp_, wl_;
  bool uniform_ = true;
};

inline double weighted_mean(std::span<const double> x, std::span<const double> w) {
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = w[i] * x[i];
  return pairwise_sum(t);
}

// 1/N-normalised weighted covariance
inline double weighted_cov(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  double mx = weighted_mean(x, w), my = weighted_mean(y, w);
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = w[i] * (x[i] - mx) * (y[i] - my);
  return pairwise_sum(t);
}

inline std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / n); }

// rows are feature vectors at each sample
inline Eigen::MatrixXd feature_rows(std::span<const double> x, const std::function<Eigen::VectorXd(double)>& h) {
  Eigen::VectorXd f0 = h(x[0]);
  Eigen::MatrixXd H(x.size(), f0.size());
  for (std::size_t i = 0; i < x.size(); ++i) H.row(i) = h(x[i]).transpose();
  return H;
}

inline Eigen::VectorXd weighted_col_mean(const Eigen::MatrixXd& H, std::span<const double> w) {
  Eigen::VectorXd m(H.cols());
  std::vector<double> t(H.rows());
  for (int j = 0; j < H.cols(); ++j) {
    for (int i = 0; i < H.rows(); ++i) t[i] = w[i] * H(i, j);
    m(j) = pairwise_sum(t);
  }
  return m;
}

inline Eigen::MatrixXd weighted_cross_cov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::span<const double> w) {
  Eigen::VectorXd ma = weighted_col_mean(A, w), mb = weighted_col_mean(B, w);
  Eigen::MatrixXd C(A.cols(), B.cols());
  std::vector<double> t(A.rows());
  for (int a = 0; a < A.cols(); ++a)
    for (int b = 0; b < B.cols(); ++b) {
      for (int i = 0; i < A.rows(); ++i) t[i] = w[i] * (A(i, a) - ma(a)) * (B(i, b) - mb(b));
      C(a, b) = pairwise_sum(t);
    }
  return C;
}

}  // namespace mfmc
