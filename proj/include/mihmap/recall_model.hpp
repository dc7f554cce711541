// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mihmap/descriptor.hpp"

namespace mihmap {

struct RecallQuery {
  int table_count = 32;
  int epsilon = 0;
  int descriptor_bits = BinaryDescriptor::kBits;
};

/// Probability that epsilon balls thrown uniformly into t bins leave no bin
/// empty. Evaluated by inclusion-exclusion,
///   sum_{j=0..t} (-1)^j C(t, j) ((t - j) / t)^epsilon,
/// with compensated summation, clamped to [0, 1].
double coverage_probability(int table_count, int epsilon);

/// Probability that a query perturbed in epsilon uniformly distributed bits
/// still hits its stored entry in at least one table: 1 - coverage.
double recall_analytic(const RecallQuery& q);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t trials = 0;
};

/// Monte Carlo recall. Under kBallsIntoBins each trial draws epsilon bit
/// positions with replacement from the covered prefix and succeeds if some
/// substring received none of them. Under
/// kDistinctPositions each trial stores a random descriptor in a real
/// MihIndex, queries it with exactly epsilon distinct flipped bits, and
/// succeeds if the stored id comes back. Standard error is binomial.
MonteCarloEstimate recall_monte_carlo(const RecallQuery& q,
                                      PerturbationModel model,
                                      std::int64_t trials, std::uint64_t seed);

struct RecallPoint {
  int epsilon = 0;
  double analytic = 0.0;
  MonteCarloEstimate monte_carlo;
};

struct RecallCurve {
  int table_count = 0;
  PerturbationModel model = PerturbationModel::kBallsIntoBins;
  std::vector<RecallPoint> points;
};

/// Analytic and Monte Carlo recall over a (t, epsilon) grid. Each grid point
/// draws from its own stream derived from seed, so results do not depend on
/// max_threads.
std::vector<RecallCurve> sweep(std::span<const int> table_counts,
                               std::span<const int> epsilons,
                               std::int64_t trials, std::uint64_t seed,
                               PerturbationModel model, int max_threads = 1);

/// Standard error used when comparing Monte Carlo against the analytic value:
/// the larger of the binomial errors at the estimate and at the analytic
/// probability, so degenerate estimates of 0 or 1 are still judged.
double agreement_stderr(const RecallPoint& point);

/// CSV rows: t,epsilon,analytic,mc_estimate,mc_stderr,mc_trials,model.
std::string recall_to_csv(std::span<const RecallCurve> curves);

}  // namespace mihmap
