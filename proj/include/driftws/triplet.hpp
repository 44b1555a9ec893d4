/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "driftws/corrwin.hpp"

namespace driftws {

struct AccuracyEstimate {
  std::vector<double> p_hat;  // clipped to [clip_lo, clip_hi]
  std::vector<double> raw_p;  // before clipping; may exceed 1
  std::size_t window_used = 0;
};

/// Correlations below this magnitude take the uninformative branch (p = 1/2).
inline constexpr double kZeroCorrelation = 1e-15;

/// C_ij = (2 p_i - 1)(2 p_j - 1) off the diagonal, 1 on it.
inline Matrix exact_correlation_from_p(std::span<const double> p) {
  for (double pi : p) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw std::invalid_argument("exact_correlation_from_p: accuracies must lie in [0, 1]");
  }
  const std::size_t n = p.size();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c(i, j) = i == j ? 1.0 : (2.0 * p[i] - 1.0) * (2.0 * p[j] - 1.0);
  }
  return c;
}

/// Triplet estimator: each labeler's accuracy from its correlations with the
/// most strongly correlated pair of other labelers.
///
/// For labeler h the pair (i, j), i < j, both != h, maximising |C_ij| is used
/// (first pair in lexicographic order on ties), and
///   p_h = (1 + sqrt(|C_ih C_hj / C_ij|)) / 2.
inline AccuracyEstimate recover_accuracies(const Matrix& c, double clip_lo, double clip_hi) {
  const std::size_t n = c.dim();
  if (n < 3) throw std::invalid_argument("recover_accuracies: need n >= 3 labelers");
  if (!(clip_lo <= clip_hi)) throw std::invalid_argument("recover_accuracies: clip_lo > clip_hi");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(c(i, i) - 1.0) > 1e-12) throw std::invalid_argument("recover_accuracies: diagonal must be 1");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(c(i, j) - c(j, i)) > 1e-12) throw std::invalid_argument("recover_accuracies: matrix must be symmetric");
    }
  }

  AccuracyEstimate est;
  est.raw_p.resize(n);
  est.p_hat.resize(n);
  for (std::size_t h = 0; h < n; ++h) {
    std::size_t bi = 0, bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == h) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == h) continue;
        if (std::abs(c(i, j)) > best) {
          best = std::abs(c(i, j));
          bi = i;
          bj = j;
        }
      }
    }
    double p;
    if (best < kZeroCorrelation) {
      p = 0.5;
    } else {
      p = (1.0 + std::sqrt(std::abs(c(bi, h) * c(h, bj) / c(bi, bj)))) / 2.0;
    }
    est.raw_p[h] = p;
    est.p_hat[h] = std::clamp(p, clip_lo, clip_hi);
  }
  return est;
}

}  // namespace driftws
