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
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftws/core.hpp"

namespace driftws {

/// Stationary stretch of a synthetic stream.
struct BlockSpec {
  std::size_t length = 0;
  std::vector<double> accuracies;
};

struct SyntheticStreamConfig {
  std::vector<BlockSpec> blocks;
  std::uint64_t seed = 0;
  std::size_t n = 3;

  std::size_t total_length() const {
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.length;
    return total;
  }

  void validate() const {
    if (n < 1) throw std::invalid_argument("SyntheticStreamConfig: need at least one labeler");
    if (blocks.empty()) throw std::invalid_argument("SyntheticStreamConfig: need at least one block");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].accuracies.size() != n) {
        throw std::invalid_argument("SyntheticStreamConfig: block " + std::to_string(b) + " has " +
                                    std::to_string(blocks[b].accuracies.size()) + " accuracies, expected " +
                                    std::to_string(n));
      }
      for (double p : blocks[b].accuracies) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw std::invalid_argument("SyntheticStreamConfig: block " + std::to_string(b) +
                                      " accuracy outside [0, 1]");
        }
      }
    }
  }

  /// True accuracies in force at 1-based step t.
  const std::vector<double>& accuracies_at(std::size_t t) const {
    if (t < 1) throw std::out_of_range("accuracies_at: steps are 1-based");
    std::size_t end = 0;
    for (const auto& b : blocks) {
      end += b.length;
      if (t <= end) return b.accuracies;
    }
    throw std::out_of_range("accuracies_at: step beyond the end of the stream");
  }
};

/// Three labelers over blocks of length T, 2T and T. Two labelers have
/// accuracy 0.9 and one 0.6; the weak one changes with every block.
inline SyntheticStreamConfig paper_synthetic_preset(std::uint64_t seed, std::size_t block_unit = 5000) {
  SyntheticStreamConfig config;
  config.n = 3;
  config.seed = seed;
  config.blocks = {
      {block_unit, {0.9, 0.9, 0.6}},
      {2 * block_unit, {0.9, 0.6, 0.9}},
      {block_unit, {0.6, 0.9, 0.9}},
  };
  return config;
}

struct StreamStep {
  RawVoteVector raw;
  std::optional<Label> truth;
  std::optional<std::size_t> block_id;  // synthetic streams only
  std::vector<double> accuracies;       // true per-labeler accuracy, when known

  bool operator==(const StreamStep&) const = default;
};

/// Independent generator streams derived from one master seed.
enum class RngRole : std::uint32_t { truth = 1, votes = 2, abstentions = 3, permutations = 4 };

inline std::mt19937_64 make_rng(std::uint64_t master_seed, RngRole role) {
  std::seed_seq seq{std::uint32_t(master_seed & 0xffffffffu), std::uint32_t(master_seed >> 32),
                    std::uint32_t(role)};
  return std::mt19937_64(seq);
}

/// Truth is uniform on {-1, +1}; labeler i agrees with it with probability
/// p_i of the current block, independently of the others.
inline std::vector<StreamStep> generate_synthetic(const SyntheticStreamConfig& config) {
  config.validate();
  auto truth_rng = make_rng(config.seed, RngRole::truth);
  auto vote_rng = make_rng(config.seed, RngRole::votes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<StreamStep> out;
  out.reserve(config.total_length());
  for (std::size_t b = 0; b < config.blocks.size(); ++b) {
    const auto& block = config.blocks[b];
    for (std::size_t s = 0; s < block.length; ++s) {
      const Label y = (truth_rng() >> 63) ? 1 : -1;
      std::vector<Vote> votes(config.n);
      for (std::size_t i = 0; i < config.n; ++i) votes[i] = Vote(unit(vote_rng) < block.accuracies[i] ? y : -y);
      out.push_back({RawVoteVector(std::move(votes)), y, b, block.accuracies});
    }
  }
  return out;
}

/// Replaces abstentions by independent uniform +/-1 draws.
class AbstentionResolver {
 public:
  explicit AbstentionResolver(std::uint64_t seed) : rng_(make_rng(seed, RngRole::abstentions)) {}

  VoteVector resolve(const RawVoteVector& raw) {
    std::vector<Vote> out(raw.votes().begin(), raw.votes().end());
    for (auto& v : out) {
      if (v == 0) v = (rng_() >> 63) ? 1 : -1;
    }
    return VoteVector(std::move(out));
  }

 private:
  std::mt19937_64 rng_;
};

inline VoteVector resolve_abstentions(const RawVoteVector& raw, AbstentionResolver& resolver) {
  return resolver.resolve(raw);
}

/// Shuffles labeler identities: with probability `prob` per step a fresh
/// uniform permutation replaces the current one, and labeler slot i then
/// reports what source perm[i] voted. Truth is untouched.
inline std::vector<StreamStep> apply_permute_drift(std::span<const StreamStep> stream, double prob, std::uint64_t seed) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("apply_permute_drift: prob must lie in [0, 1]");
  std::vector<StreamStep> out(stream.begin(), stream.end());
  if (stream.empty() || prob == 0.0) return out;

  auto rng = make_rng(seed, RngRole::permutations);
  std::bernoulli_distribution shuffle(prob);
  const std::size_t n = stream.front().raw.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  for (auto& step : out) {
    if (step.raw.size() != n) throw std::invalid_argument("apply_permute_drift: inconsistent labeler count");
    if (shuffle(rng)) std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vote> votes(n);
    for (std::size_t i = 0; i < n; ++i) votes[i] = step.raw[perm[i]];
    step.raw = RawVoteVector(std::move(votes));
    if (step.accuracies.size() == n) {
      std::vector<double> acc(n);
      for (std::size_t i = 0; i < n; ++i) acc[i] = step.accuracies[perm[i]];
      step.accuracies = std::move(acc);
    }
  }
  return out;
}

/// Sum over k in [t-r+1, t-1] of ||p(k) - p(k+1)||_inf, with the window clamped
/// to the start of the stream. `accuracy_at` maps a 1-based step to p.
template <typename AccuracyAt>
double drift_sum(AccuracyAt&& accuracy_at, std::size_t r, std::size_t t) {
  if (r < 1 || t < 1) throw std::invalid_argument("drift_sum: r and t must be >= 1");
  const std::size_t first = t >= r ? t - r + 1 : 1;
  double total = 0.0;
  for (std::size_t k = first; k + 1 <= t; ++k) {
    const auto& a = accuracy_at(k);
    const auto& b = accuracy_at(k + 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    total += worst;
  }
  return total;
}

struct DriftError {
  double sum = 0.0;    // sum of per-step sup-norm accuracy changes
  double bound = 0.0;  // 12 * sum, the drift term of the correlation error bound
};

inline DriftError true_drift_error(const SyntheticStreamConfig& config, std::size_t r, std::size_t t) {
  config.validate();
  if (t > config.total_length()) throw std::out_of_range("true_drift_error: t beyond the end of the stream");
  const double sum = drift_sum([&](std::size_t k) -> const std::vector<double>& { return config.accuracies_at(k); }, r, t);
  return {sum, 12.0 * sum};
}

/// Same, from per-step accuracies recorded on a stream (e.g. after permute drift).
inline DriftError true_drift_error(std::span<const StreamStep> stream, std::size_t r, std::size_t t) {
  if (t < 1 || t > stream.size()) throw std::out_of_range("true_drift_error: t outside the stream");
  const double sum = drift_sum(
      [&](std::size_t k) -> const std::vector<double>& {
        const auto& acc = stream[k - 1].accuracies;
        if (acc.empty()) throw std::invalid_argument("true_drift_error: step " + std::to_string(k) + " has no known accuracies");
        return acc;
      },
      r, t);
  return {sum, 12.0 * sum};
}

}  // namespace driftws
