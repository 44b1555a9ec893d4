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
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "driftws/aggregate.hpp"
#include "driftws/driftgen.hpp"

using namespace driftws;

namespace {

std::vector<VoteVector> random_stream(std::uint64_t seed, std::size_t n, std::size_t len) {
  std::mt19937_64 rng(seed);
  std::vector<VoteVector> out;
  for (std::size_t t = 0; t < len; ++t) {
    std::vector<Vote> v(n);
    for (auto& x : v) x = (rng() >> 63) ? 1 : -1;
    out.emplace_back(std::move(v));
  }
  return out;
}

}  // namespace

TEST(AggregateTest, logOddsWeights) {
  auto w = weights_from_accuracies(std::vector<double>{0.9, 0.9, 0.6, 0.5});
  EXPECT_NEAR(w.w[0], 2.1972245773362196, 1e-12);
  EXPECT_NEAR(w.w[1], 2.1972245773362196, 1e-12);
  EXPECT_NEAR(w.w[2], 0.4054651081081644, 1e-12);
  EXPECT_EQ(w.w[3], 0.0);
  EXPECT_THROW(weights_from_accuracies(std::vector<double>{0.9, 1.0, 0.6}), std::invalid_argument);
  EXPECT_THROW(weights_from_accuracies(std::vector<double>{0.0, 0.5, 0.6}), std::invalid_argument);
}

TEST(AggregateTest, predict) {
  EXPECT_EQ(predict(VoteVector{1, 1, -1}, WeightVector{{1.0, 1.0, 1.0}}), 1);
  auto w = weights_from_accuracies(std::vector<double>{0.9, 0.9, 0.6});
  EXPECT_EQ(predict(VoteVector{1, -1, -1}, w), -1);
  EXPECT_EQ(predict(VoteVector{1, -1}, WeightVector{{0.7, 0.7}}), 1);
  EXPECT_THROW(predict(VoteVector{1, -1}, w), std::invalid_argument);
}

TEST(AggregateTest, majorityVote) {
  EXPECT_EQ(majority_vote(VoteVector{1, 1, -1}), 1);
  EXPECT_EQ(majority_vote(VoteVector{-1, -1, -1}), -1);
  EXPECT_EQ(majority_vote(VoteVector{1, -1, -1, 1}), 1);
}

TEST(AggregateTest, predictionInvariantUnderPositiveScaling) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> weight(-3.0, 3.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (const auto& votes : random_stream(5, 6, 500)) {
    WeightVector w{std::vector<double>(6)};
    for (auto& x : w.w) x = weight(rng);
    for (double c : {0.25, 2.0, 1024.0, scale(rng)}) {
      WeightVector scaled = w;
      for (auto& x : scaled.w) x *= c;
      EXPECT_EQ(predict(votes, w), predict(votes, scaled));
    }
  }
}

TEST(AggregateTest, strategyParsing) {
  EXPECT_EQ(Strategy::parse("adaptive"), Strategy::adaptive());
  EXPECT_EQ(Strategy::parse("majority"), Strategy::majority());
  EXPECT_EQ(Strategy::parse("fixed:1024"), Strategy::fixed(1024));
  EXPECT_EQ(Strategy::fixed(64).to_string(), "fixed:64");
  EXPECT_THROW(Strategy::parse("fixed:"), std::invalid_argument);
  EXPECT_THROW(Strategy::parse("fixed:0"), std::invalid_argument);
  EXPECT_THROW(Strategy::parse("fixed:-3"), std::invalid_argument);
  EXPECT_THROW(Strategy::parse("oracle"), std::invalid_argument);
}

TEST(AggregateTest, fixedWindowBeyondLargestRejected) {
  AdaptiveConfig c;
  EXPECT_THROW(StrategyRunner(Strategy::fixed(1048576), c), std::invalid_argument);
  EXPECT_NO_THROW(StrategyRunner(Strategy::fixed(524288), c));
  EXPECT_NO_THROW(StrategyRunner(Strategy::fixed(1000), c));
}

TEST(AggregateTest, fixedOneMatchesMajority) {
  AdaptiveConfig c;
  for (std::size_t n : {3u, 4u, 6u}) {
    c.n = n;
    auto stream = random_stream(n, n, 2000);
    auto fixed = run_strategy(stream, Strategy::fixed(1), c);
    auto major = run_strategy(stream, Strategy::majority(), c);
    for (std::size_t t = 0; t < stream.size(); ++t) {
      ASSERT_EQ(fixed[t].prediction, major[t].prediction) << "n=" << n << " t=" << t;
      ASSERT_EQ(fixed[t].prediction, majority_vote(stream[t]));
    }
  }
}

TEST(AggregateTest, majorityIgnoresHistory) {
  AdaptiveConfig c;
  auto stream = random_stream(2, 3, 300);
  auto full = run_strategy(stream, Strategy::majority(), c);
  for (std::size_t t = 0; t < stream.size(); t += 37) {
    auto alone = run_strategy(std::span(stream).subspan(t, 1), Strategy::majority(), c);
    EXPECT_EQ(alone[0].prediction, full[t].prediction);
  }
}

TEST(AggregateTest, adaptiveOnStationaryStreamGrowsToLargestFeasibleWindow) {
  AdaptiveConfig c;
  c.schedule = WindowSchedule::powers_of_two(13);
  int reached = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticStreamConfig gen{{{4096, {0.9, 0.9, 0.6}}}, seed, 3};
    std::vector<VoteVector> votes;
    for (const auto& s : generate_synthetic(gen)) votes.emplace_back(std::vector<Vote>(s.raw.votes().begin(), s.raw.votes().end()));
    auto reports = run_strategy(votes, Strategy::adaptive(), c);
    reached += reports.back().window == 4096;
  }
  EXPECT_GE(reached, 6);
}

TEST(AggregateTest, reportsCarryTruthAndCorrectness) {
  AdaptiveConfig c;
  auto stream = random_stream(8, 3, 50);
  std::vector<std::optional<Label>> truths(stream.size());
  for (std::size_t t = 0; t < truths.size(); ++t) truths[t] = t % 3 ? 1 : -1;
  truths[4].reset();
  auto reports = run_strategy(stream, Strategy::adaptive(), c, truths);
  for (std::size_t t = 0; t < reports.size(); ++t) {
    EXPECT_EQ(reports[t].t, t + 1);
    EXPECT_LE(reports[t].window, t + 1);
    EXPECT_EQ(reports[t].p_hat.size(), 3u);
    if (t == 4) {
      EXPECT_FALSE(reports[t].correct);
    } else {
      ASSERT_TRUE(reports[t].correct);
      EXPECT_EQ(*reports[t].correct, reports[t].prediction == *truths[t]);
    }
    for (double p : reports[t].p_hat) {
      EXPECT_GE(p, 0.1);
      EXPECT_LE(p, 0.9);
    }
  }
  EXPECT_THROW(run_strategy(std::span<const VoteVector>{}, Strategy::adaptive(), c), std::invalid_argument);
  c.n = 4;
  EXPECT_THROW(run_strategy(stream, Strategy::adaptive(), c), std::invalid_argument);
}

TEST(AggregateTest, runnerHandlesScheduleStartingAboveOne) {
  AdaptiveConfig c;
  c.schedule = WindowSchedule({4, 8, 16});
  StrategyRunner runner(Strategy::adaptive(), c);
  auto stream = random_stream(3, 3, 20);
  for (std::size_t t = 0; t < stream.size(); ++t) {
    auto r = runner.step(stream[t]);
    EXPECT_LE(r.window, t + 1);
    if (t < 3) {
      EXPECT_EQ(r.stop_reason, "horizon_reached");
    }
  }
}
