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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "driftws/driftws.hpp"

using namespace driftws;
using nlohmann::ordered_json;

namespace {

/// JSON experiment files for --config / --save-config. Top-level keys are
/// subcommand names; their members are long option names.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return dump(app, default_also).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> out;
    collect(j, {}, out);
    return out;
  }

 private:
  static ordered_json dump(const CLI::App* app, bool default_also) {
    ordered_json j = ordered_json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames()[0];
      if (name == "help" || name == "config" || name == "save-config") continue;
      if (opt->get_type_size() == 0) {
        if (opt->count() > 0 || default_also) j[name] = opt->count() > 0;
      } else if (opt->count() == 1) {
        j[name] = opt->results().at(0);
      } else if (opt->count() > 1) {
        j[name] = opt->results();
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      if (sub->parsed()) j[sub->get_name()] = dump(sub, default_also);
    }
    return j;
  }

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("unsupported config value " + v.dump());
  }

  static void collect(const nlohmann::json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_object()) {
        auto sub = parents;
        sub.push_back(it.key());
        collect(*it, sub, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (it->is_array()) {
        for (const auto& v : *it) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(*it));
      }
      out.push_back(std::move(item));
    }
  }
};

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad number '" + item + "' in " + what);
    out.push_back(v);
  }
  return out;
}

/// "LEN:p1,p2,...", several blocks separated by ';'.
std::vector<BlockSpec> parse_blocks(const std::vector<std::string>& specs) {
  std::vector<BlockSpec> blocks;
  for (const auto& spec : specs) {
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ';')) {
      if (part.empty()) continue;
      const auto colon = part.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("bad block '" + part + "': expected LEN:p1,p2,...");
      const std::string len = part.substr(0, colon);
      if (len.empty() || len.find_first_not_of("0123456789") != std::string::npos || std::stoull(len) == 0) {
        throw std::invalid_argument("bad block '" + part + "': length must be a positive integer");
      }
      blocks.push_back({std::stoull(len), parse_doubles(part.substr(colon + 1), "block '" + part + "'")});
    }
  }
  return blocks;
}

struct StreamSource {
  std::string preset;
  std::vector<std::string> blocks;
  std::size_t block_unit = 5000;
  std::uint64_t seed = 1;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "Named stream preset")->check(CLI::IsMember({"paper-synthetic"}));
    cmd->add_option("--blocks", blocks, "Blocks as LEN:p1,p2,... (repeat or separate with ';')");
    cmd->add_option("--block-unit", block_unit, "Block unit T of the paper-synthetic preset")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  bool given() const { return !preset.empty() || !blocks.empty(); }

  SyntheticStreamConfig build() const {
    if (!preset.empty() && !blocks.empty()) throw std::invalid_argument("--preset and --blocks are mutually exclusive");
    if (!preset.empty()) return paper_synthetic_preset(seed, block_unit);
    if (blocks.empty()) throw std::invalid_argument("one of --preset or --blocks is required");
    SyntheticStreamConfig config;
    config.blocks = parse_blocks(blocks);
    config.n = config.blocks.front().accuracies.size();
    config.seed = seed;
    config.validate();
    return config;
  }
};

void write_json(const ordered_json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::pair<double, double> parse_clip(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("bad --clip '" + text + "': expected LO:HI");
  auto lo = parse_doubles(text.substr(0, colon), "--clip");
  auto hi = parse_doubles(text.substr(colon + 1), "--clip");
  if (lo.size() != 1 || hi.size() != 1) throw std::invalid_argument("bad --clip '" + text + "': expected LO:HI");
  return {lo[0], hi[0]};
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  StreamSource source;
  double permute_prob = 0.0;
  std::string out;
};

void cmd_simulate(const SimulateArgs& args) {
  const auto config = args.source.build();
  auto steps = generate_synthetic(config);
  if (args.permute_prob > 0.0) steps = apply_permute_drift(steps, args.permute_prob, config.seed);
  write_stream(args.out, to_records(steps));
}

// run -----------------------------------------------------------------------

struct RunArgs {
  std::string input;
  std::string strategy = "adaptive";
  double beta = 0.1;
  double delta = 0.1;
  std::size_t m = 20;
  std::string clip = "0.1:0.9";
  std::uint64_t abstain_seed = 0;
  double permute_prob = 0.0;
  std::uint64_t permute_seed = 0;
  std::optional<std::size_t> n;
  std::string out;
};

void cmd_run(const RunArgs& args) {
  const auto strategy = Strategy::parse(args.strategy);
  auto records = read_stream(args.input);
  if (records.empty()) throw std::invalid_argument("'" + args.input + "' holds no records");

  AdaptiveConfig config;
  config.n = records.front().votes.size();
  if (args.n && *args.n != config.n) {
    throw std::invalid_argument("--n " + std::to_string(*args.n) + " does not match the " + std::to_string(config.n) +
                                " labelers in '" + args.input + "'");
  }
  config.schedule = WindowSchedule::powers_of_two(args.m);
  config.beta = args.beta;
  config.delta = args.delta;
  std::tie(config.clip_lo, config.clip_hi) = parse_clip(args.clip);
  config.validate();

  auto steps = to_steps(records);
  if (args.permute_prob > 0.0) steps = apply_permute_drift(steps, args.permute_prob, args.permute_seed);

  StrategyRunner runner(strategy, config);
  AbstentionResolver resolver(args.abstain_seed);
  std::vector<StepReport> reports;
  reports.reserve(steps.size());
  for (const auto& s : steps) reports.push_back(runner.step(resolver.resolve(s.raw), s.truth));
  write_reports(args.out, reports);
}

// eval ----------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> reports;
  std::size_t rolling_k = 128;
  std::string out;
  std::string series_dir;
};

void cmd_eval(const EvalArgs& args) {
  std::vector<RunSummary> runs;
  for (const auto& path : args.reports) {
    const auto reports = read_reports(path);
    if (reports.empty()) throw std::invalid_argument("'" + path + "' holds no reports");
    runs.push_back(summarize(path, reports, args.rolling_k));
    if (!args.series_dir.empty()) {
      std::filesystem::create_directories(args.series_dir);
      const auto stem = std::filesystem::path(path).stem().string();
      write_series_csv((std::filesystem::path(args.series_dir) / (stem + ".rolling.csv")).string(),
                       runs.back().rolling_accuracy);
    }
  }
  write_json(comparison_json(runs), args.out);
}

// bound ---------------------------------------------------------------------

struct BoundArgs {
  std::size_t n = 3;
  std::size_t m = 20;
  double delta = 0.1;
  double beta = 0.1;
  std::optional<double> tau;
  bool beta_sweep = false;
  StreamSource source;
  std::optional<std::size_t> t;
  std::string out;
};

void cmd_bound(const BoundArgs& args) {
  AdaptiveConfig config;
  config.n = args.n;
  config.schedule = WindowSchedule::powers_of_two(args.m);
  config.beta = args.beta;
  config.delta = args.delta;
  const auto diag = make_diagnostic_bound(config, args.tau);

  std::optional<SyntheticStreamConfig> stream;
  if (args.source.given()) {
    stream = args.source.build();
    if (stream->n != args.n) throw std::invalid_argument("--n does not match the stream's labeler count");
    if (!args.t) throw std::invalid_argument("--t is required with --preset or --blocks");
  } else if (args.t) {
    throw std::invalid_argument("--t needs a synthetic stream (--preset or --blocks)");
  }

  ordered_json j;
  j["n"] = args.n;
  j["m"] = args.m;
  j["delta"] = args.delta;
  j["beta"] = args.beta;
  j["a_const"] = diag.a_const;
  j["phi"] = diag.phi;
  j["gamma_min"] = config.schedule.gamma_min();
  j["gamma_max"] = config.schedule.gamma_max();
  if (diag.tau) {
    j["tau"] = *diag.tau;
    j["accuracy_prefactor"] = *diag.accuracy_prefactor();
  }
  if (stream) j["t"] = *args.t;

  std::optional<double> best_rhs;
  std::size_t best_r = 0;
  auto windows = ordered_json::array();
  for (std::size_t k = 0; k < config.schedule.m(); ++k) {
    const auto r = config.schedule.size(k);
    ordered_json w;
    w["r"] = r;
    w["statistical_term"] = diag.bound_per_window.at(r);
    if (k + 1 < config.schedule.m()) w["threshold"] = threshold(k, config);
    if (stream && r <= std::min(*args.t, config.schedule.largest())) {
      const auto drift = true_drift_error(*stream, r, *args.t);
      const double rhs = diag.bound_per_window.at(r) + drift.bound;
      w["drift_sum"] = drift.sum;
      w["drift_bound"] = drift.bound;
      w["lemma_rhs"] = rhs;
      if (!best_rhs || rhs < *best_rhs) {
        best_rhs = rhs;
        best_r = r;
      }
    }
    windows.push_back(w);
  }
  j["windows"] = windows;
  if (best_rhs) {
    j["best_window"] = best_r;
    j["best_lemma_rhs"] = *best_rhs;
    if (diag.tau) j["accuracy_guarantee"] = *diag.accuracy_prefactor() * *best_rhs;
  }

  if (args.beta_sweep) {
    auto sweep = ordered_json::array();
    for (double beta : {0.01, 0.025, 0.05, 0.1, 0.25, std::sqrt(2.0) - 1.0, 0.5, 0.75, 1.0}) {
      ordered_json row;
      row["beta"] = beta;
      row["phi"] = compute_phi(config.schedule, beta);
      row["threshold_first"] = driftws::threshold(0, config.schedule, beta, diag.a_const);
      if (diag.tau) row["accuracy_prefactor"] = 5.0 * row["phi"].get<double>() / (2.0 * *diag.tau * *diag.tau);
      sweep.push_back(row);
    }
    j["beta_sweep"] = sweep;
  }
  write_json(j, args.out);
}

std::string one_line(std::string msg) {
  for (auto& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return msg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-window weak supervision on drifting label streams"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON experiment file; command-line flags take precedence");
  std::string save_config;
  app.add_option("--save-config", save_config, "Write the effective configuration as JSON")->configurable(false);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic drifting vote stream (JSONL)");
  sim.source.add_options(simulate);
  simulate->add_option("--seed", sim.source.seed, "Master seed")->capture_default_str();
  simulate->add_option("--permute-prob", sim.permute_prob, "Per-step probability of shuffling labeler identities")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--out", sim.out, "Output stream file")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a labeling strategy over a vote stream");
  run_cmd->add_option("--input", run.input, "Stream file (.jsonl or .csv)")->required();
  run_cmd->add_option("--strategy", run.strategy, "adaptive | fixed:R | majority")->capture_default_str();
  run_cmd->add_option("--beta", run.beta, "Drift sensitivity")->capture_default_str();
  run_cmd->add_option("--delta", run.delta, "Failure probability")->capture_default_str();
  run_cmd->add_option("--m", run.m, "Number of window sizes (powers of two)")->capture_default_str()->check(CLI::Range(2, 62));
  run_cmd->add_option("--clip", run.clip, "Accuracy clip interval LO:HI")->capture_default_str();
  run_cmd->add_option("--abstain-seed", run.abstain_seed, "Seed for resolving abstentions")->capture_default_str();
  run_cmd->add_option("--permute-prob", run.permute_prob, "Per-step probability of shuffling labeler identities")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--permute-seed", run.permute_seed, "Seed for identity shuffles")->capture_default_str();
  run_cmd->add_option("--n", run.n, "Expected number of labelers");
  run_cmd->add_option("--out", run.out, "Output report file (JSONL)")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Summarise report files");
  eval_cmd->add_option("--reports", ev.reports, "Report files")->required();
  eval_cmd->add_option("--rolling-k", ev.rolling_k, "Rolling accuracy lookahead")->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", ev.out, "Summary JSON (default stdout)");
  eval_cmd->add_option("--series-dir", ev.series_dir, "Directory for rolling accuracy CSV series");

  BoundArgs bd;
  auto* bound_cmd = app.add_subcommand("bound", "Print the error-bound constants");
  bound_cmd->add_option("--n", bd.n, "Number of labelers")->capture_default_str()->check(CLI::Range(3, 1 << 20));
  bound_cmd->add_option("--m", bd.m, "Number of window sizes (powers of two)")->capture_default_str()->check(CLI::Range(2, 62));
  bound_cmd->add_option("--delta", bd.delta, "Failure probability")->capture_default_str();
  bound_cmd->add_option("--beta", bd.beta, "Drift sensitivity")->capture_default_str();
  bound_cmd->add_option("--tau", bd.tau, "Accuracy margin above 1/2");
  bound_cmd->add_flag("--beta-sweep", bd.beta_sweep, "Add a table over beta");
  bd.source.add_options(bound_cmd);
  bound_cmd->add_option("--seed", bd.source.seed, "Seed (unused by the bound, kept for config symmetry)");
  bound_cmd->add_option("--t", bd.t, "Time step for the drift term")->check(CLI::PositiveNumber);
  bound_cmd->add_option("--out", bd.out, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "driftws: error: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (!save_config.empty()) {
      std::ofstream cfg(save_config, std::ios::binary | std::ios::trunc);
      if (!cfg) throw std::runtime_error("cannot open '" + save_config + "' for writing");
      cfg << app.config_to_str(true, false);
    }
    if (simulate->parsed()) cmd_simulate(sim);
    if (run_cmd->parsed()) cmd_run(run);
    if (eval_cmd->parsed()) cmd_eval(ev);
    if (bound_cmd->parsed()) cmd_bound(bd);
  } catch (const std::exception& e) {
    std::cerr << "driftws: error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
