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
#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "driftws/eval.hpp"

using namespace driftws;

namespace {

StepReport rep(std::size_t t, Label pred, std::optional<Label> truth, std::size_t window = 1) {
  StepReport r;
  r.t = t;
  r.prediction = pred;
  r.truth = truth;
  if (truth) r.correct = pred == *truth;
  r.window = window;
  return r;
}

}  // namespace

TEST(EvalTest, rollingAccuracy) {
  std::vector<StepReport> all_right;
  for (std::size_t t = 1; t <= 300; ++t) all_right.push_back(rep(t, 1, 1));
  for (double x : rolling_accuracy(all_right, 128)) EXPECT_EQ(x, 1.0);

  std::vector<StepReport> mixed{rep(1, 1, 1), rep(2, 1, -1), rep(3, -1, -1), rep(4, -1, 1)};
  EXPECT_EQ(rolling_accuracy(mixed, 1), (std::vector<double>{1, 0, 1, 0}));
  EXPECT_EQ(rolling_accuracy(mixed, 2), (std::vector<double>{0.5, 0.5, 0.5, 0.0}));
  EXPECT_EQ(rolling_accuracy(mixed, 3), (std::vector<double>{2.0 / 3, 1.0 / 3, 0.5, 0.0}));
  EXPECT_EQ(rolling_accuracy(mixed, 128).size(), mixed.size());
  EXPECT_THROW(rolling_accuracy(mixed, 0), std::invalid_argument);
  mixed.push_back(rep(5, 1, std::nullopt));
  EXPECT_THROW(rolling_accuracy(mixed, 2), std::invalid_argument);
}

TEST(EvalTest, f1Score) {
  std::vector<StepReport> perfect{rep(1, 1, 1), rep(2, -1, -1), rep(3, 1, 1)};
  EXPECT_EQ(f1_score(perfect), 1.0);
  EXPECT_EQ(accuracy(perfect), 1.0);

  std::vector<StepReport> none{rep(1, -1, -1), rep(2, -1, -1)};
  EXPECT_EQ(f1_score(none), 0.0);

  // precision 1, recall 1/2
  std::vector<StepReport> half{rep(1, 1, 1), rep(2, -1, 1), rep(3, -1, -1)};
  EXPECT_NEAR(f1_score(half), 2.0 / 3.0, 1e-15);
}

TEST(EvalTest, windowHistogram) {
  std::vector<StepReport> reports{rep(1, 1, 1, 1), rep(2, 1, 1, 2), rep(3, 1, 1, 2), rep(4, 1, 1, 4)};
  auto hist = window_histogram(reports);
  EXPECT_EQ(hist.at(1), 1u);
  EXPECT_EQ(hist.at(2), 2u);
  EXPECT_EQ(hist.at(4), 1u);
  std::size_t total = 0;
  for (const auto& [r, c] : hist) total += c;
  EXPECT_EQ(total, reports.size());
  EXPECT_EQ(median_window(reports), 2u);

  auto single = window_histogram(std::vector<StepReport>{rep(1, 1, 1, 1)});
  EXPECT_EQ(single.size(), 1u);
  EXPECT_EQ(single.at(1), 1u);
}

TEST(EvalTest, summaryAndComparison) {
  std::vector<StepReport> a{rep(1, 1, 1), rep(2, 1, -1)};
  std::vector<StepReport> b{rep(1, 1, 1), rep(2, -1, -1)};
  std::vector<RunSummary> runs{summarize("adaptive", a, 128), summarize("fixed:1024", b, 128)};
  EXPECT_EQ(runs[0].accuracy, 0.5);
  EXPECT_EQ(runs[1].accuracy, 1.0);
  EXPECT_EQ(runs[0].rolling_accuracy.size(), 2u);
  auto j = comparison_json(runs);
  ASSERT_EQ(j["table"].size(), 2u);
  EXPECT_EQ(j["table"][0]["name"], "adaptive");
  EXPECT_EQ(j["table"][1]["accuracy"], 1.0);
  EXPECT_EQ(j["runs"][0]["window_histogram"][0]["count"], 2);
  EXPECT_THROW(summarize("empty", std::vector<StepReport>{}), std::invalid_argument);
}

TEST(EvalTest, seriesCsv) {
  auto path = (std::filesystem::temp_directory_path() / "driftws_series_test.csv").string();
  write_series_csv(path, std::vector<double>{1.0, 0.5});
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(content, "step,value\n1,1.0\n2,0.5\n");
  std::filesystem::remove(path);
}
