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
#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "driftws/triplet.hpp"

using namespace driftws;

TEST(TripletTest, exactCorrelationFromP) {
  auto c = exact_correlation_from_p(std::vector<double>{0.8, 0.7, 0.6});
  EXPECT_NEAR(c(0, 1), 0.24, 1e-15);
  EXPECT_NEAR(c(0, 2), 0.12, 1e-15);
  EXPECT_NEAR(c(1, 2), 0.08, 1e-15);
  EXPECT_EQ(c(1, 1), 1.0);

  auto ones = exact_correlation_from_p(std::vector<double>{1, 1, 1});
  for (double x : ones.data()) EXPECT_EQ(x, 1.0);

  auto half = exact_correlation_from_p(std::vector<double>{0.5, 0.9, 0.7});
  EXPECT_EQ(half(0, 1), 0.0);
  EXPECT_EQ(half(2, 0), 0.0);

  EXPECT_THROW(exact_correlation_from_p(std::vector<double>{1.2, 0.5, 0.5}), std::invalid_argument);
}

TEST(TripletTest, recoversPaperAccuracies) {
  auto c = exact_correlation_from_p(std::vector<double>{0.9, 0.9, 0.6});
  EXPECT_NEAR(c(0, 1), 0.64, 1e-15);
  EXPECT_NEAR(c(0, 2), 0.16, 1e-15);
  auto est = recover_accuracies(c, 0.1, 0.9);
  EXPECT_NEAR(est.raw_p[0], 0.9, 1e-12);
  EXPECT_NEAR(est.raw_p[1], 0.9, 1e-12);
  EXPECT_NEAR(est.raw_p[2], 0.6, 1e-12);
  EXPECT_NEAR(est.p_hat[2], 0.6, 1e-12);
}

TEST(TripletTest, zeroCorrelationsGiveOneHalf) {
  auto est = recover_accuracies(Matrix::identity(5), 0.1, 0.9);
  for (std::size_t h = 0; h < 5; ++h) {
    EXPECT_EQ(est.raw_p[h], 0.5);
    EXPECT_EQ(est.p_hat[h], 0.5);
  }
}

TEST(TripletTest, singleSampleWindowClipsToUpperBound) {
  // Outer product of one vote vector: every |C_ij| = 1.
  const std::vector<int> v{1, -1, -1, 1};
  Matrix c(4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) c(i, j) = double(v[i] * v[j]);
  }
  auto est = recover_accuracies(c, 0.1, 0.9);
  for (std::size_t h = 0; h < 4; ++h) {
    EXPECT_EQ(est.raw_p[h], 1.0);
    EXPECT_EQ(est.p_hat[h], 0.9);
  }
}

TEST(TripletTest, rejectsInvalidInput) {
  EXPECT_THROW(recover_accuracies(Matrix::identity(2), 0.1, 0.9), std::invalid_argument);
  Matrix c = Matrix::identity(3);
  c(0, 1) = 0.5;
  EXPECT_THROW(recover_accuracies(c, 0.1, 0.9), std::invalid_argument);
  Matrix d = Matrix::identity(3);
  d(2, 2) = 0.9;
  EXPECT_THROW(recover_accuracies(d, 0.1, 0.9), std::invalid_argument);
}

TEST(TripletTest, roundTripOnExactMatrices) {
  std::mt19937_64 rng(42);
  // Accuracies above 1/2 only: p and 1 - p give the same correlations and the
  // estimator returns the >= 1/2 branch.
  std::uniform_real_distribution<double> acc(0.501, 0.89);
  for (std::size_t n = 3; n <= 8; ++n) {
    for (int draw = 0; draw < 100; ++draw) {
      std::vector<double> p(n);
      for (auto& x : p) x = acc(rng);
      auto est = recover_accuracies(exact_correlation_from_p(p), 0.1, 0.9);
      for (std::size_t h = 0; h < n; ++h) EXPECT_NEAR(est.raw_p[h], p[h], 1e-9);
    }
  }
}

TEST(TripletTest, perturbationStaysWithinStabilityBound) {
  // ||p - p_hat||_inf <= (5/2) eta / tau^2 for ||C_hat - C||_inf <= eta.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> acc(0.6, 0.95);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t n = 3 + draw % 4;
    std::vector<double> p(n);
    for (auto& x : p) x = acc(rng);
    const double tau = *std::min_element(p.begin(), p.end()) - 0.5;
    const double eta = 0.2 * tau * tau * std::abs(unit(rng));
    Matrix c = exact_correlation_from_p(p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        c(i, j) = std::clamp(c(i, j) + eta * unit(rng), -1.0, 1.0);
        c(j, i) = c(i, j);
      }
    }
    auto est = recover_accuracies(c, 0.0, 1.0);
    for (std::size_t h = 0; h < n; ++h) {
      EXPECT_LE(std::abs(est.raw_p[h] - p[h]), 2.5 * eta / (tau * tau) + 1e-12) << "draw " << draw;
    }
  }
}

TEST(TripletTest, permutationEquivariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> acc(0.55, 0.95);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  for (int draw = 0; draw < 50; ++draw) {
    const std::size_t n = 3 + draw % 5;
    std::vector<double> p(n);
    for (auto& x : p) x = acc(rng);
    Matrix c = exact_correlation_from_p(p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) c(j, i) = c(i, j) = std::clamp(c(i, j) + noise(rng), -1.0, 1.0);
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix pc(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) pc(i, j) = c(perm[i], perm[j]);
    }
    auto est = recover_accuracies(c, 0.1, 0.9);
    auto pest = recover_accuracies(pc, 0.1, 0.9);
    for (std::size_t i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(pest.raw_p[i], est.raw_p[perm[i]]);
  }
}

TEST(TripletTest, tiesBreakOnSmallestPair) {
  // For h = 3 the pairs (0,1) and (0,2) tie at 0.5; (0,1) must be used.
  Matrix c = Matrix::identity(4);
  auto set = [&](std::size_t i, std::size_t j, double v) { c(i, j) = c(j, i) = v; };
  set(0, 1, 0.5);
  set(0, 2, 0.5);
  set(1, 2, 0.1);
  set(0, 3, 0.4);
  set(1, 3, 0.2);
  set(2, 3, 0.3);
  auto est = recover_accuracies(c, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(est.raw_p[3], (1.0 + std::sqrt(0.4 * 0.2 / 0.5)) / 2.0);
}
