#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "permfdp/matrix.hpp"
#include "permfdp/resampling.hpp"

namespace testing_support {

// w x m matrix of uniform p-values; the first `signal` columns of row 0 are
// pushed towards zero.
inline permfdp::PermutationPValueMatrix random_matrix(std::mt19937_64& rng, std::size_t w,
                                                      std::size_t m, std::size_t signal = 0,
                                                      double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  permfdp::Matrix<double> v(w, m);
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      double p = u(rng) * scale;
      if (j == 0 && i < signal) p *= 0.01;
      v(j, i) = std::min(p, 1.0);
    }
  }
  return permfdp::PermutationPValueMatrix(std::move(v));
}

// Null p-values uniform on [0, null_scale]; the first `signal` observed
// p-values uniform on [0, signal_scale].
inline permfdp::PermutationPValueMatrix signal_matrix(std::mt19937_64& rng, std::size_t w,
                                                      std::size_t m, std::size_t signal,
                                                      double signal_scale, double null_scale) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  permfdp::Matrix<double> v(w, m);
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      v(j, i) = u(rng) * ((j == 0 && i < signal) ? signal_scale : null_scale);
    }
  }
  return permfdp::PermutationPValueMatrix(std::move(v));
}

inline std::vector<double> sorted_row(const permfdp::PermutationPValueMatrix& pv, std::size_t j) {
  auto r = pv.row(j);
  std::vector<double> out(r.begin(), r.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace testing_support
