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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftws/adaptive.hpp"
#include "driftws/core.hpp"
#include "driftws/corrwin.hpp"
#include "driftws/triplet.hpp"

namespace driftws {

/// Log-odds vote weights.
struct WeightVector {
  std::vector<double> w;
};

inline WeightVector weights_from_accuracies(std::span<const double> p_hat) {
  WeightVector out;
  out.w.reserve(p_hat.size());
  for (double p : p_hat) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("weights_from_accuracies: accuracies must lie in (0, 1)");
    out.w.push_back(std::log(p / (1.0 - p)));
  }
  return out;
}

inline WeightVector weights_from_accuracies(const AccuracyEstimate& est) { return weights_from_accuracies(est.p_hat); }

/// Sign of the weighted vote; an exact tie predicts +1.
///
/// The weights behind +1 votes and behind -1 votes are summed separately and
/// compared, so equal weights split evenly always produce an exact tie.
inline Label predict(const VoteVector& votes, const WeightVector& weights) {
  if (votes.size() != weights.w.size()) throw std::invalid_argument("predict: dimension mismatch");
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (votes[i] > 0) {
      pos += weights.w[i];
    } else {
      neg += weights.w[i];
    }
  }
  return pos >= neg ? 1 : -1;
}

inline Label majority_vote(const VoteVector& votes) {
  long sum = 0;
  for (auto v : votes.votes()) sum += v;
  return sum >= 0 ? 1 : -1;
}

struct Strategy {
  enum class Kind { adaptive, fixed, majority };
  Kind kind = Kind::adaptive;
  std::size_t fixed_r = 0;

  static Strategy adaptive() { return {Kind::adaptive, 0}; }
  static Strategy fixed(std::size_t r) { return {Kind::fixed, r}; }
  static Strategy majority() { return {Kind::majority, 0}; }

  /// "adaptive", "majority" or "fixed:R".
  static Strategy parse(const std::string& spec) {
    if (spec == "adaptive") return adaptive();
    if (spec == "majority") return majority();
    if (spec.rfind("fixed:", 0) == 0) {
      const std::string num = spec.substr(6);
      if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos) {
        throw std::invalid_argument("bad strategy '" + spec + "': fixed window must be a positive integer");
      }
      std::size_t r = 0;
      try {
        r = std::stoull(num);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad strategy '" + spec + "': window size out of range");
      }
      if (r == 0) throw std::invalid_argument("bad strategy '" + spec + "': fixed window must be positive");
      return fixed(r);
    }
    throw std::invalid_argument("bad strategy '" + spec + "': expected adaptive, majority or fixed:R");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::adaptive: return "adaptive";
      case Kind::fixed: return "fixed:" + std::to_string(fixed_r);
      case Kind::majority: return "majority";
    }
    return "unknown";
  }

  bool operator==(const Strategy&) const = default;
};

struct StepReport {
  std::size_t t = 0;       // 1-based step index
  std::size_t window = 0;  // samples the estimate was computed from
  std::vector<double> p_hat;
  std::vector<double> weights;
  Label prediction = 1;
  std::optional<Label> truth;
  std::optional<bool> correct;
  std::string stop_reason;

  bool operator==(const StepReport&) const = default;
};

/// One strategy as a sequential state machine over a vote stream.
class StrategyRunner {
 public:
  StrategyRunner(Strategy strategy, AdaptiveConfig config)
      : strategy_(strategy), config_(std::move(config)) {
    config_.validate();
    if (strategy_.kind == Strategy::Kind::fixed) {
      if (strategy_.fixed_r < 1 || strategy_.fixed_r > config_.schedule.largest()) {
        throw std::invalid_argument("fixed window " + std::to_string(strategy_.fixed_r) + " exceeds r_m = " +
                                    std::to_string(config_.schedule.largest()));
      }
      bank_.emplace(config_.n, std::vector<std::size_t>{strategy_.fixed_r});
    } else if (strategy_.kind == Strategy::Kind::adaptive) {
      bank_.emplace(config_.n, config_.schedule);
    }
  }

  StepReport step(const VoteVector& votes, std::optional<Label> truth = std::nullopt) {
    if (votes.size() != config_.n) {
      throw std::invalid_argument("expected " + std::to_string(config_.n) + " votes, got " +
                                  std::to_string(votes.size()));
    }
    ++t_;
    StepReport report;
    report.t = t_;
    if (strategy_.kind == Strategy::Kind::majority) {
      report.window = 1;
      report.prediction = majority_vote(votes);
      report.stop_reason = "majority";
    } else {
      bank_->push(votes);
      std::size_t r;
      if (strategy_.kind == Strategy::Kind::fixed) {
        r = strategy_.fixed_r;
        report.stop_reason = "fixed";
      } else if (t_ < config_.schedule.smallest()) {
        r = config_.schedule.smallest();
        report.stop_reason = std::string(to_string(StopReason::horizon_reached));
      } else {
        const auto decision = select_window(*bank_, config_);
        r = decision.chosen_r;
        report.stop_reason = std::string(to_string(decision.stop_reason));
      }
      auto est = recover_accuracies(bank_->correlation(r), config_.clip_lo, config_.clip_hi);
      auto weights = weights_from_accuracies(est);
      report.window = bank_->effective_length(r);
      report.prediction = predict(votes, weights);
      report.p_hat = std::move(est.p_hat);
      report.weights = std::move(weights.w);
    }
    if (truth) {
      report.truth = truth;
      report.correct = report.prediction == *truth;
    }
    return report;
  }

  const Strategy& strategy() const noexcept { return strategy_; }
  const AdaptiveConfig& config() const noexcept { return config_; }
  std::size_t steps() const noexcept { return t_; }
  /// Absent for the majority strategy, which keeps no history.
  const CorrelationBank* bank() const noexcept { return bank_ ? &*bank_ : nullptr; }

 private:
  Strategy strategy_;
  AdaptiveConfig config_;
  std::optional<CorrelationBank> bank_;
  std::size_t t_ = 0;
};

/// Runs a strategy over a whole stream. `truths` is either empty or aligned
/// with `stream`.
inline std::vector<StepReport> run_strategy(std::span<const VoteVector> stream, const Strategy& strategy,
                                            const AdaptiveConfig& config,
                                            std::span<const std::optional<Label>> truths = {}) {
  if (stream.empty()) throw std::invalid_argument("run_strategy: empty stream");
  if (!truths.empty() && truths.size() != stream.size()) {
    throw std::invalid_argument("run_strategy: truths not aligned with stream");
  }
  StrategyRunner runner(strategy, config);
  std::vector<StepReport> reports;
  reports.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    reports.push_back(runner.step(stream[i], truths.empty() ? std::nullopt : truths[i]));
  }
  return reports;
}

}  // namespace driftws
