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
#include <cstddef>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftws/aggregate.hpp"

namespace driftws {

namespace detail {
inline void require_truth(std::span<const StepReport> reports, const char* what) {
  for (const auto& r : reports) {
    if (!r.truth) throw std::invalid_argument(std::string(what) + ": step " + std::to_string(r.t) + " has no truth label");
  }
}
}  // namespace detail

inline double accuracy(std::span<const StepReport> reports) {
  if (reports.empty()) throw std::invalid_argument("accuracy: no reports");
  detail::require_truth(reports, "accuracy");
  std::size_t hits = 0;
  for (const auto& r : reports) hits += r.prediction == *r.truth;
  return double(hits) / double(reports.size());
}

/// F1 for the +1 class; 0 when precision + recall is 0.
inline double f1_score(std::span<const StepReport> reports) {
  detail::require_truth(reports, "f1_score");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& r : reports) {
    if (r.prediction == 1 && *r.truth == 1) ++tp;
    if (r.prediction == 1 && *r.truth == -1) ++fp;
    if (r.prediction == -1 && *r.truth == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  const double precision = double(tp) / double(tp + fp);
  const double recall = double(tp) / double(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

/// Entry i is the mean correctness over steps i .. i+k-1, truncated at the end.
inline std::vector<double> rolling_accuracy(std::span<const StepReport> reports, std::size_t k) {
  if (k < 1) throw std::invalid_argument("rolling_accuracy: k must be >= 1");
  detail::require_truth(reports, "rolling_accuracy");
  const std::size_t n = reports.size();
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (reports[i].prediction == *reports[i].truth);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t end = std::min(n, i + k);
    out[i] = double(prefix[end] - prefix[i]) / double(end - i);
  }
  return out;
}

inline std::map<std::size_t, std::size_t> window_histogram(std::span<const StepReport> reports) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& r : reports) ++hist[r.window];
  return hist;
}

/// Median of the chosen window sizes (lower median for even counts).
inline std::size_t median_window(std::span<const StepReport> reports) {
  if (reports.empty()) throw std::invalid_argument("median_window: no reports");
  std::vector<std::size_t> w;
  w.reserve(reports.size());
  for (const auto& r : reports) w.push_back(r.window);
  auto mid = w.begin() + std::ptrdiff_t((w.size() - 1) / 2);
  std::nth_element(w.begin(), mid, w.end());
  return *mid;
}

struct RunSummary {
  std::string name;
  std::size_t steps = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::map<std::size_t, std::size_t> window_histogram;
  std::size_t rolling_k = 128;
  std::vector<double> rolling_accuracy;
};

inline RunSummary summarize(std::string name, std::span<const StepReport> reports, std::size_t rolling_k = 128) {
  if (reports.empty()) throw std::invalid_argument("summarize: '" + name + "' has no reports");
  RunSummary s;
  s.name = std::move(name);
  s.steps = reports.size();
  s.accuracy = accuracy(reports);
  s.f1 = f1_score(reports);
  s.window_histogram = window_histogram(reports);
  s.rolling_k = rolling_k;
  s.rolling_accuracy = rolling_accuracy(reports, rolling_k);
  return s;
}

/// Summary JSON; the rolling series is left to the CSV writer.
inline nlohmann::ordered_json to_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["steps"] = s.steps;
  j["accuracy"] = s.accuracy;
  j["f1"] = s.f1;
  j["rolling_k"] = s.rolling_k;
  auto hist = nlohmann::ordered_json::array();
  for (const auto& [r, count] : s.window_histogram) hist.push_back({{"window", r}, {"count", count}});
  j["window_histogram"] = hist;
  return j;
}

/// Summaries plus a name/accuracy/f1 comparison table.
inline nlohmann::ordered_json comparison_json(std::span<const RunSummary> runs) {
  nlohmann::ordered_json j;
  j["runs"] = nlohmann::ordered_json::array();
  j["table"] = nlohmann::ordered_json::array();
  for (const auto& s : runs) {
    j["runs"].push_back(to_json(s));
    j["table"].push_back({{"name", s.name}, {"accuracy", s.accuracy}, {"f1", s.f1}});
  }
  return j;
}

/// "step,value" CSV with 1-based steps.
inline void write_series_csv(const std::string& path, std::span<const double> series) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "step,value\n";
  for (std::size_t i = 0; i < series.size(); ++i) out << (i + 1) << ',' << nlohmann::json(series[i]).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace driftws
