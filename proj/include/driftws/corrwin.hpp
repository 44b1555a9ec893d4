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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftws/core.hpp"

namespace driftws {

/// Dense row-major square matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Largest absolute entrywise difference.
inline double sup_norm_diff(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("sup_norm_diff: dimension mismatch");
  double out = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) out = std::max(out, std::abs(a.data()[i] - b.data()[i]));
  return out;
}

/// Empirical correlation matrices over the latest r votes, for every r of a
/// fixed set of window sizes.
///
/// A single ring buffer of capacity max(r) holds the retained vote vectors;
/// each window keeps an n x n matrix of exact integer sums of vote products.
/// A push adds the incoming outer product to every window and subtracts the
/// outer product of the vector that falls out of it, so each step costs
/// O(#windows * n^2) and the sums never accumulate rounding error.
class CorrelationBank {
 public:
  CorrelationBank(std::size_t n, std::vector<std::size_t> window_sizes) : n_(n), sizes_(std::move(window_sizes)) {
    if (n_ < 1) throw std::invalid_argument("CorrelationBank: need at least one labeler");
    if (sizes_.empty()) throw std::invalid_argument("CorrelationBank: need at least one window size");
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
      if (sizes_[k] < 1) throw std::invalid_argument("CorrelationBank: window sizes must be positive");
      if (k > 0 && sizes_[k] <= sizes_[k - 1]) {
        throw std::invalid_argument("CorrelationBank: window sizes must be strictly increasing");
      }
    }
    capacity_ = sizes_.back();
    ring_.assign(capacity_ * n_, 0);
    sums_.assign(sizes_.size(), std::vector<std::int64_t>(n_ * n_, 0));
  }

  CorrelationBank(std::size_t n, const WindowSchedule& schedule)
      : CorrelationBank(n, std::vector<std::size_t>(schedule.sizes().begin(), schedule.sizes().end())) {}

  void push(const VoteVector& v) {
    if (v.size() != n_) {
      throw std::invalid_argument("CorrelationBank::push: expected " + std::to_string(n_) + " votes, got " +
                                  std::to_string(v.size()));
    }
    const auto votes = v.votes();
    for (std::size_t w = 0; w < sizes_.size(); ++w) {
      auto& s = sums_[w];
      if (t_ >= sizes_[w]) {
        // The vector pushed sizes_[w] steps ago leaves this window. It is
        // still in the ring because sizes_[w] <= capacity_.
        const Vote* old = slot(t_ - sizes_[w]);
        for (std::size_t i = 0; i < n_; ++i) {
          for (std::size_t j = 0; j < n_; ++j) s[i * n_ + j] -= old[i] * old[j];
        }
      }
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) s[i * n_ + j] += votes[i] * votes[j];
      }
    }
    std::copy(votes.begin(), votes.end(), ring_.begin() + std::ptrdiff_t((t_ % capacity_) * n_));
    ++t_;
  }

  std::size_t labelers() const noexcept { return n_; }
  std::size_t steps() const noexcept { return t_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::span<const std::size_t> window_sizes() const noexcept { return sizes_; }

  /// Number of vote vectors currently held in the ring.
  std::size_t retained() const noexcept { return std::min(t_, capacity_); }

  /// Samples actually covered by window r: min(t, r).
  std::size_t effective_length(std::size_t r) const noexcept { return std::min(t_, r); }

  /// Exact integer sums of v_i * v_j over the window of size r.
  std::span<const std::int64_t> sums(std::size_t r) const { return sums_[index_of(r)]; }

  Matrix correlation(std::size_t r) const {
    if (t_ == 0) throw std::logic_error("CorrelationBank::correlation: no votes observed yet");
    const auto& s = sums_[index_of(r)];
    const double len = double(effective_length(r));
    Matrix c(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) c(i, j) = double(s[i * n_ + j]) / len;
    }
    return c;
  }

  /// The retained vote vector observed `age` steps ago (age 0 = latest).
  VoteVector recent(std::size_t age) const {
    if (age >= retained()) throw std::out_of_range("CorrelationBank::recent: vector no longer retained");
    const Vote* p = slot(t_ - 1 - age);
    return VoteVector(std::vector<Vote>(p, p + n_));
  }

 private:
  std::size_t index_of(std::size_t r) const {
    auto it = std::find(sizes_.begin(), sizes_.end(), r);
    if (it == sizes_.end()) {
      throw std::invalid_argument("CorrelationBank: window size " + std::to_string(r) + " is not tracked");
    }
    return std::size_t(it - sizes_.begin());
  }

  const Vote* slot(std::size_t step) const { return ring_.data() + (step % capacity_) * n_; }

  std::size_t n_;
  std::vector<std::size_t> sizes_;
  std::size_t capacity_ = 0;
  std::size_t t_ = 0;
  std::vector<Vote> ring_;
  std::vector<std::vector<std::int64_t>> sums_;
};

}  // namespace driftws
