#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfmc {

// Pairwise summation; result depends only on order of the input.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

inline double mean(std::span<const double> v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

// 1/N normalisation
inline double variance(std::span<const double> v) {
  double mu = mean(v);
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - mu) * (v[i] - mu);
  return mean(d);
}

}  // namespace mfmc
