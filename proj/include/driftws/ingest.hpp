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
#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftws/aggregate.hpp"
#include "driftws/core.hpp"
#include "driftws/driftgen.hpp"

namespace driftws {

/// Raised for malformed input files; carries the 1-based line number.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// One line of a vote stream file.
struct StreamRecord {
  RawVoteVector votes;
  std::optional<Label> label;
  std::optional<std::size_t> t;

  bool operator==(const StreamRecord&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline Vote check_vote(long long v, const std::string& path, std::size_t line, std::size_t index) {
  if (v < -1 || v > 1) {
    throw IngestError(path, line, "invalid vote " + std::to_string(v) + " at position " + std::to_string(index) +
                                      " (expected -1, 0 or 1)");
  }
  return Vote(v);
}

inline Label check_label(long long v, const std::string& path, std::size_t line) {
  if (v != 1 && v != -1) throw IngestError(path, line, "invalid label " + std::to_string(v) + " (expected -1 or 1)");
  return Label(v);
}

inline StreamRecord parse_json_record(const std::string& text, const std::string& path, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestError(path, line, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw IngestError(path, line, "expected a JSON object");
  auto votes = j.find("votes");
  if (votes == j.end() || !votes->is_array()) throw IngestError(path, line, "missing \"votes\" array");
  std::vector<Vote> parsed;
  for (std::size_t i = 0; i < votes->size(); ++i) {
    const auto& v = (*votes)[i];
    if (!v.is_number_integer()) throw IngestError(path, line, "vote at position " + std::to_string(i) + " is not an integer");
    parsed.push_back(check_vote(v.get<long long>(), path, line, i));
  }
  StreamRecord rec{RawVoteVector(std::move(parsed)), std::nullopt, std::nullopt};
  if (auto label = j.find("label"); label != j.end() && !label->is_null()) {
    if (!label->is_number_integer()) throw IngestError(path, line, "\"label\" is not an integer");
    rec.label = check_label(label->get<long long>(), path, line);
  }
  if (auto t = j.find("t"); t != j.end() && !t->is_null()) {
    if (!t->is_number_integer() || t->get<long long>() < 0) throw IngestError(path, line, "\"t\" is not a non-negative integer");
    rec.t = t->get<std::size_t>();
  }
  return rec;
}

inline bool is_csv_path(const std::string& path) {
  return path.size() >= 4 && std::equal(path.end() - 4, path.end(), ".csv", [](char a, char b) {
           return std::tolower(static_cast<unsigned char>(a)) == b;
         });
}

}  // namespace detail

/// Reads a vote stream. Files ending in .csv are parsed as CSV with a header
/// row (vote columns, then optional "label" and "t" columns); anything else is
/// JSONL with one {"votes": [...], "label": y, "t": k} object per line.
/// Blank lines are skipped.
inline std::vector<StreamRecord> read_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");

  std::vector<StreamRecord> out;
  std::optional<std::size_t> n;
  std::string line;
  std::size_t lineno = 0;
  const bool csv = detail::is_csv_path(path);

  // CSV column roles, from the header.
  std::vector<std::size_t> vote_cols;
  std::optional<std::size_t> label_col, t_col;
  std::size_t ncols = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty()) continue;

    StreamRecord rec;
    if (!csv) {
      rec = detail::parse_json_record(std::string(body), path, lineno);
    } else if (!have_header) {
      auto cols = detail::split_csv(body);
      ncols = cols.size();
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c] == "label") {
          label_col = c;
        } else if (cols[c] == "t") {
          t_col = c;
        } else {
          vote_cols.push_back(c);
        }
      }
      if (vote_cols.empty()) throw IngestError(path, lineno, "CSV header names no vote columns");
      have_header = true;
      continue;
    } else {
      auto cols = detail::split_csv(body);
      if (cols.size() != ncols) {
        throw IngestError(path, lineno, "expected " + std::to_string(ncols) + " columns, got " + std::to_string(cols.size()));
      }
      std::vector<Vote> votes;
      for (std::size_t i = 0; i < vote_cols.size(); ++i) {
        auto v = detail::parse_int(cols[vote_cols[i]]);
        if (!v) throw IngestError(path, lineno, "vote at position " + std::to_string(i) + " is not an integer");
        votes.push_back(detail::check_vote(*v, path, lineno, i));
      }
      rec.votes = RawVoteVector(std::move(votes));
      if (label_col && !cols[*label_col].empty()) {
        auto v = detail::parse_int(cols[*label_col]);
        if (!v) throw IngestError(path, lineno, "label is not an integer");
        rec.label = detail::check_label(*v, path, lineno);
      }
      if (t_col && !cols[*t_col].empty()) {
        auto v = detail::parse_int(cols[*t_col]);
        if (!v || *v < 0) throw IngestError(path, lineno, "t is not a non-negative integer");
        rec.t = std::size_t(*v);
      }
    }

    if (!n) {
      n = rec.votes.size();
    } else if (rec.votes.size() != *n) {
      throw IngestError(path, lineno, "inconsistent labeler count: expected " + std::to_string(*n) + " votes, got " +
                                          std::to_string(rec.votes.size()));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const StreamRecord& rec) {
  nlohmann::ordered_json j;
  j["votes"] = nlohmann::ordered_json::array();
  for (auto v : rec.votes.votes()) j["votes"].push_back(int(v));
  if (rec.label) j["label"] = *rec.label;
  if (rec.t) j["t"] = *rec.t;
  return j;
}

inline void write_stream(const std::string& path, std::span<const StreamRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const auto& rec : records) out << to_json(rec).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// Records carrying a 1-based t; synthetic block ids and accuracies are dropped.
inline std::vector<StreamRecord> to_records(std::span<const StreamStep> steps) {
  std::vector<StreamRecord> out;
  out.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) out.push_back({steps[i].raw, steps[i].truth, i + 1});
  return out;
}

inline std::vector<StreamStep> to_steps(std::span<const StreamRecord> records) {
  std::vector<StreamStep> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.push_back({rec.votes, rec.label, std::nullopt, {}});
  return out;
}

inline nlohmann::ordered_json to_json(const StepReport& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["window"] = r.window;
  j["p_hat"] = r.p_hat;
  j["weights"] = r.weights;
  j["prediction"] = r.prediction;
  if (r.truth) j["truth"] = *r.truth;
  if (r.correct) j["correct"] = *r.correct;
  j["stop_reason"] = r.stop_reason;
  return j;
}

inline StepReport report_from_json(const nlohmann::json& j) {
  StepReport r;
  r.t = j.at("t").get<std::size_t>();
  r.window = j.at("window").get<std::size_t>();
  r.p_hat = j.at("p_hat").get<std::vector<double>>();
  r.weights = j.at("weights").get<std::vector<double>>();
  r.prediction = j.at("prediction").get<Label>();
  if (j.contains("truth")) r.truth = j["truth"].get<Label>();
  if (j.contains("correct")) r.correct = j["correct"].get<bool>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  return r;
}

/// One StepReport per line, fields in a fixed order; "truth" and "correct"
/// are omitted when the step has no ground truth.
inline void write_reports(const std::string& path, std::span<const StepReport> reports) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const auto& r : reports) out << to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<StepReport> read_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<StepReport> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(report_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IngestError(path, lineno, std::string("malformed report: ") + e.what());
    }
  }
  return out;
}

}  // namespace driftws
