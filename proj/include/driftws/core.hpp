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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace driftws {

/// Binary label / vote alphabet. Votes are stored as signed bytes so that
/// products of votes stay in exact integer arithmetic.
using Vote = std::int8_t;
using Label = int;

/// One time step's resolved votes, each exactly -1 or +1.
class VoteVector {
 public:
  VoteVector() = default;

  explicit VoteVector(std::vector<Vote> votes) : votes_(std::move(votes)) {
    for (std::size_t i = 0; i < votes_.size(); ++i) {
      if (votes_[i] != 1 && votes_[i] != -1) {
        throw std::invalid_argument("VoteVector: entry " + std::to_string(i) + " is " +
                                    std::to_string(int(votes_[i])) + ", expected -1 or +1");
      }
    }
  }

  VoteVector(std::initializer_list<int> votes) : VoteVector(std::vector<Vote>(votes.begin(), votes.end())) {}

  std::size_t size() const noexcept { return votes_.size(); }
  Vote operator[](std::size_t i) const { return votes_[i]; }
  std::span<const Vote> votes() const noexcept { return votes_; }

  bool operator==(const VoteVector&) const = default;

 private:
  std::vector<Vote> votes_;
};

/// One time step's votes before abstention resolution: -1, 0 (abstain) or +1.
class RawVoteVector {
 public:
  RawVoteVector() = default;

  explicit RawVoteVector(std::vector<Vote> votes) : votes_(std::move(votes)) {
    for (std::size_t i = 0; i < votes_.size(); ++i) {
      if (votes_[i] < -1 || votes_[i] > 1) {
        throw std::invalid_argument("RawVoteVector: entry " + std::to_string(i) + " is " +
                                    std::to_string(int(votes_[i])) + ", expected -1, 0 or +1");
      }
    }
  }

  RawVoteVector(std::initializer_list<int> votes)
      : RawVoteVector(std::vector<Vote>(votes.begin(), votes.end())) {}

  std::size_t size() const noexcept { return votes_.size(); }
  Vote operator[](std::size_t i) const { return votes_[i]; }
  std::span<const Vote> votes() const noexcept { return votes_; }

  bool has_abstentions() const noexcept {
    for (auto v : votes_) {
      if (v == 0) return true;
    }
    return false;
  }

  bool operator==(const RawVoteVector&) const = default;

 private:
  std::vector<Vote> votes_;
};

/// Geometric ladder of candidate window sizes r_1 < ... < r_m.
class WindowSchedule {
 public:
  explicit WindowSchedule(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) {
      throw std::invalid_argument("WindowSchedule: need at least two window sizes");
    }
    if (sizes_.front() < 1) {
      throw std::invalid_argument("WindowSchedule: window sizes must be positive");
    }
    gamma_min_ = std::numeric_limits<double>::infinity();
    gamma_max_ = 0.0;
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
      if (sizes_[k + 1] <= sizes_[k]) {
        throw std::invalid_argument("WindowSchedule: sizes must be strictly increasing");
      }
      double g = std::sqrt(double(sizes_[k]) / double(sizes_[k + 1]));
      gamma_min_ = std::min(gamma_min_, g);
      gamma_max_ = std::max(gamma_max_, g);
    }
  }

  /// {1, 2, 4, ..., 2^(m-1)}.
  static WindowSchedule powers_of_two(std::size_t m) {
    if (m < 2 || m > 62) {
      throw std::invalid_argument("WindowSchedule: powers_of_two needs 2 <= m <= 62");
    }
    std::vector<std::size_t> sizes(m);
    for (std::size_t k = 0; k < m; ++k) sizes[k] = std::size_t{1} << k;
    return WindowSchedule(std::move(sizes));
  }

  std::size_t m() const noexcept { return sizes_.size(); }
  /// 0-based access; r_1 is size(0).
  std::size_t size(std::size_t k) const { return sizes_.at(k); }
  std::size_t smallest() const noexcept { return sizes_.front(); }
  std::size_t largest() const noexcept { return sizes_.back(); }
  std::span<const std::size_t> sizes() const noexcept { return sizes_; }
  double gamma_min() const noexcept { return gamma_min_; }
  double gamma_max() const noexcept { return gamma_max_; }

  bool contains(std::size_t r) const noexcept {
    for (auto s : sizes_) {
      if (s == r) return true;
    }
    return false;
  }

  bool operator==(const WindowSchedule& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<std::size_t> sizes_;
  double gamma_min_ = 0.0;
  double gamma_max_ = 0.0;
};

/// A = sqrt(2 ln[(2m-1) n(n-1) / delta]), the union-bound concentration constant.
inline double compute_a_const(std::size_t n, std::size_t m, double delta) {
  if (n < 3) throw std::invalid_argument("compute_a_const: need n >= 3 labelers");
  if (m < 2) throw std::invalid_argument("compute_a_const: need m >= 2 window sizes");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("compute_a_const: delta must lie in (0, 1)");
  const double arg = double(2 * m - 1) * double(n) * double(n - 1) / delta;
  return std::sqrt(2.0 * std::log(arg));
}

/// Ratio between the adaptive choice's error and the best window's error.
inline double compute_phi(const WindowSchedule& schedule, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("compute_phi: beta must be positive");
  const double num = 2.0 * beta + 2.0;
  const double tail = 1.0 - schedule.gamma_max();
  return 1.0 + std::max(num / (schedule.gamma_min() * tail), num / (beta * tail));
}

inline double statistical_term(std::size_t r, double a_const) {
  if (r < 1) throw std::invalid_argument("statistical_term: r must be >= 1");
  return a_const / std::sqrt(double(r));
}

struct AdaptiveConfig {
  std::size_t n = 3;
  WindowSchedule schedule = WindowSchedule::powers_of_two(20);
  double beta = 0.1;
  double delta = 0.1;
  double clip_lo = 0.1;
  double clip_hi = 0.9;

  void validate() const {
    if (n < 3) throw std::invalid_argument("AdaptiveConfig: need n >= 3 labelers");
    if (!(beta > 0.0)) throw std::invalid_argument("AdaptiveConfig: beta must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("AdaptiveConfig: delta must lie in (0, 1)");
    if (!(clip_lo > 0.0 && clip_lo < 0.5 && clip_hi > 0.5 && clip_hi < 1.0)) {
      throw std::invalid_argument("AdaptiveConfig: clip bounds must satisfy 0 < lo < 1/2 < hi < 1");
    }
  }

  /// Derived from (n, m, delta) on every call, so it never goes stale.
  double a_const() const { return compute_a_const(n, schedule.m(), delta); }
};

/// Computable constants of the adaptive error guarantee.
struct DiagnosticBound {
  double phi = 1.0;
  double a_const = 0.0;
  std::optional<double> tau;
  std::map<std::size_t, double> bound_per_window;

  /// 5 Phi / (2 tau^2): the factor turning a correlation error into an accuracy error.
  std::optional<double> accuracy_prefactor() const {
    if (!tau) return std::nullopt;
    return 5.0 * phi / (2.0 * *tau * *tau);
  }
};

inline DiagnosticBound make_diagnostic_bound(const AdaptiveConfig& config, std::optional<double> tau = std::nullopt) {
  config.validate();
  if (tau && !(*tau > 0.0 && *tau <= 0.5)) {
    throw std::invalid_argument("DiagnosticBound: tau must lie in (0, 1/2]");
  }
  DiagnosticBound bound;
  bound.a_const = config.a_const();
  bound.phi = compute_phi(config.schedule, config.beta);
  bound.tau = tau;
  for (auto r : config.schedule.sizes()) bound.bound_per_window[r] = statistical_term(r, bound.a_const);
  return bound;
}

}  // namespace driftws
