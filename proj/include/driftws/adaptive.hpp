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
#include <stdexcept>
#include <string_view>
#include <vector>

#include "driftws/core.hpp"
#include "driftws/corrwin.hpp"

namespace driftws {

enum class StopReason {
  threshold_exceeded,  // a consecutive-window gap exceeded its threshold
  schedule_exhausted,  // every window in the schedule passed
  horizon_reached,     // the next window is longer than the stream so far
};

inline std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::threshold_exceeded: return "threshold_exceeded";
    case StopReason::schedule_exhausted: return "schedule_exhausted";
    case StopReason::horizon_reached: return "horizon_reached";
  }
  return "unknown";
}

struct GapTest {
  std::size_t r_small = 0;
  std::size_t r_large = 0;
  double gap = 0.0;
  double threshold = 0.0;
  bool passed() const noexcept { return gap <= threshold; }
};

struct WindowDecision {
  std::size_t chosen_k = 0;  // 0-based index into the schedule
  std::size_t chosen_r = 0;
  StopReason stop_reason = StopReason::horizon_reached;
  std::vector<GapTest> gaps;

  bool operator==(const WindowDecision& o) const {
    if (chosen_k != o.chosen_k || chosen_r != o.chosen_r || stop_reason != o.stop_reason) return false;
    if (gaps.size() != o.gaps.size()) return false;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      if (gaps[i].r_small != o.gaps[i].r_small || gaps[i].gap != o.gaps[i].gap ||
          gaps[i].threshold != o.gaps[i].threshold) {
        return false;
      }
    }
    return true;
  }
};

/// Threshold for comparing windows r_k and r_{k+1}; `k` is 0-based and must be
/// below m-1.
inline double threshold(std::size_t k, const WindowSchedule& schedule, double beta, double a_const) {
  if (k + 1 >= schedule.m()) throw std::out_of_range("threshold: window index out of range");
  const double rk = double(schedule.size(k));
  const double rk1 = double(schedule.size(k + 1));
  return a_const * (2.0 * beta / std::sqrt(rk) + std::sqrt((1.0 - rk / rk1) / rk));
}

inline double threshold(std::size_t k, const AdaptiveConfig& config) {
  return threshold(k, config.schedule, config.beta, config.a_const());
}

/// Sup-norm of Ĉ^[r_large] - Ĉ^[r_small].
///
/// Both matrices are integer sums over their lengths, so the difference is
/// formed exactly over the common denominator and divided once.
inline double window_gap(const CorrelationBank& bank, std::size_t r_small, std::size_t r_large,
                         bool include_diagonal = false) {
  const auto n = bank.labelers();
  const auto a = bank.sums(r_small);
  const auto b = bank.sums(r_large);
  const auto la = std::int64_t(bank.effective_length(r_small));
  const auto lb = std::int64_t(bank.effective_length(r_large));
  if (la == 0 || lb == 0) throw std::logic_error("window_gap: no votes observed yet");
  std::int64_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j && !include_diagonal) continue;
      const auto idx = i * n + j;
      const std::int64_t num = b[idx] * la - a[idx] * lb;
      worst = std::max(worst, num < 0 ? -num : num);
    }
  }
  return double(worst) / (double(la) * double(lb));
}

/// Picks the largest window whose consecutive-window gaps all stayed within
/// threshold, stopping at the first failure.
inline WindowDecision select_window(const CorrelationBank& bank, const AdaptiveConfig& config) {
  const auto& schedule = config.schedule;
  const std::size_t t = bank.steps();
  if (t < schedule.smallest()) {
    throw std::invalid_argument("select_window: stream shorter than the smallest window");
  }
  const double a = config.a_const();
  WindowDecision decision;
  std::size_t k = 0;
  bool broke = false;
  while (k + 1 < schedule.m() && schedule.size(k + 1) <= t) {
    GapTest test;
    test.r_small = schedule.size(k);
    test.r_large = schedule.size(k + 1);
    test.gap = window_gap(bank, test.r_small, test.r_large);
    test.threshold = threshold(k, schedule, config.beta, a);
    decision.gaps.push_back(test);
    if (!test.passed()) {
      broke = true;
      break;
    }
    ++k;
  }
  decision.chosen_k = k;
  decision.chosen_r = schedule.size(k);
  if (broke) {
    decision.stop_reason = StopReason::threshold_exceeded;
  } else if (k + 1 == schedule.m()) {
    decision.stop_reason = StopReason::schedule_exhausted;
  } else {
    decision.stop_reason = StopReason::horizon_reached;
  }
  return decision;
}

}  // namespace driftws
