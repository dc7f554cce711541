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

#include "mihmap/recall_model.hpp"

#include <algorithm>
#include <atomic>
#include <bitset>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "mihmap/mih_index.hpp"

namespace mihmap {

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(long double x) {
    const long double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const { return sum_ + compensation_; }

 private:
  long double sum_ = 0.0L;
  long double compensation_ = 0.0L;
};

// Terms reach ~1e7 near epsilon = t = 64 while the sum is O(1), so they are
// formed in extended precision.
double empty_bin_probability(int t, int epsilon) {
  std::vector<long double> terms;
  terms.reserve(t);
  long double binom = 1.0L;
  for (int j = 1; j <= t; ++j) {
    binom = binom * static_cast<long double>(t - j + 1) / static_cast<long double>(j);
    const long double survive =
        static_cast<long double>(t - j) / static_cast<long double>(t);
    const long double term = binom * std::pow(survive, static_cast<long double>(epsilon));
    terms.push_back(j % 2 == 1 ? term : -term);
  }
  // Largest magnitudes first so cancelling pairs meet early.
  std::sort(terms.begin(), terms.end(),
            [](long double a, long double b) { return std::abs(a) > std::abs(b); });
  CompensatedSum sum;
  for (long double term : terms) sum.add(term);
  return std::clamp(static_cast<double>(sum.value()), 0.0, 1.0);
}

void validate(int t, int epsilon) {
  if (t < 1) throw std::invalid_argument(fmt::format("table count {} < 1", t));
  if (epsilon < 0) {
    throw std::invalid_argument(fmt::format("epsilon {} < 0", epsilon));
  }
}

double binomial_stderr(double p, std::int64_t n) {
  if (n <= 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

MonteCarloEstimate finish(std::int64_t hits, std::int64_t trials) {
  MonteCarloEstimate out;
  out.trials = trials;
  out.estimate = trials > 0 ? static_cast<double>(hits) / trials : 0.0;
  out.stderr_ = binomial_stderr(out.estimate, trials);
  return out;
}

std::int64_t balls_into_bins_hits(int t, int width, int epsilon,
                                  std::int64_t trials, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, t * width - 1);
  std::int64_t hits = 0;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    std::bitset<BinaryDescriptor::kBits> touched;
    int covered = 0;
    for (int ball = 0; ball < epsilon && covered < t; ++ball) {
      const int bin = pick(rng) / width;
      if (!touched.test(bin)) {
        touched.set(bin);
        ++covered;
      }
    }
    if (covered < t) ++hits;
  }
  return hits;
}

std::int64_t distinct_positions_hits(int t, int epsilon, std::int64_t trials,
                                     Rng& rng) {
  constexpr std::int64_t kChunk = 128;
  const PerturbationSpec spec{epsilon, PerturbationModel::kDistinctPositions};
  std::int64_t hits = 0;
  for (std::int64_t done = 0; done < trials; done += kChunk) {
    const std::int64_t n = std::min(kChunk, trials - done);
    // Capacity n means nothing is ever evicted within a chunk.
    MihIndex index(MihConfig{t, static_cast<int>(n)});
    std::vector<BinaryDescriptor> stored;
    stored.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
      stored.push_back(random_descriptor(rng));
      index.insert(static_cast<PointId>(i), stored.back());
    }
    for (std::int64_t i = 0; i < n; ++i) {
      const auto result = index.query(perturb(stored[i], spec, rng));
      if (std::binary_search(result.union_ids.begin(), result.union_ids.end(),
                             static_cast<PointId>(i))) {
        ++hits;
      }
    }
  }
  return hits;
}

}  // namespace

double coverage_probability(int table_count, int epsilon) {
  validate(table_count, epsilon);
  if (epsilon < table_count) return 0.0;
  if (table_count == 1) return 1.0;
  return std::clamp(1.0 - empty_bin_probability(table_count, epsilon), 0.0, 1.0);
}

double recall_analytic(const RecallQuery& q) {
  validate(q.table_count, q.epsilon);
  if (q.epsilon < q.table_count) return 1.0;
  if (q.table_count == 1) return 0.0;
  // Same terms as coverage_probability() without forming 1 - (1 - x), which
  // would erase recalls below machine epsilon.
  return empty_bin_probability(q.table_count, q.epsilon);
}

MonteCarloEstimate recall_monte_carlo(const RecallQuery& q,
                                      PerturbationModel model,
                                      std::int64_t trials, std::uint64_t seed) {
  validate(q.table_count, q.epsilon);
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (q.descriptor_bits != BinaryDescriptor::kBits) {
    throw std::invalid_argument("only 256-bit descriptors are supported");
  }
  const int width = substring_width(q.table_count);
  Rng rng(seed);
  const std::int64_t hits =
      model == PerturbationModel::kBallsIntoBins
          ? balls_into_bins_hits(q.table_count, width, q.epsilon, trials, rng)
          : distinct_positions_hits(q.table_count, q.epsilon, trials, rng);
  return finish(hits, trials);
}

std::vector<RecallCurve> sweep(std::span<const int> table_counts,
                               std::span<const int> epsilons,
                               std::int64_t trials, std::uint64_t seed,
                               PerturbationModel model, int max_threads) {
  std::vector<RecallCurve> curves(table_counts.size());
  for (std::size_t c = 0; c < table_counts.size(); ++c) {
    curves[c].table_count = table_counts[c];
    curves[c].model = model;
    curves[c].points.resize(epsilons.size());
  }
  const std::size_t total = table_counts.size() * epsilons.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const std::size_t c = task / epsilons.size();
      const std::size_t e = task % epsilons.size();
      const RecallQuery q{table_counts[c], epsilons[e]};
      auto& point = curves[c].points[e];
      point.epsilon = epsilons[e];
      point.analytic = recall_analytic(q);
      point.monte_carlo = recall_monte_carlo(q, model, trials, derive_seed(seed, task));
    }
  };
  const int threads =
      std::clamp<int>(max_threads, 1, static_cast<int>(std::max<std::size_t>(total, 1)));
  if (threads == 1) {
    worker();
    return curves;
  }
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return curves;
}

double agreement_stderr(const RecallPoint& point) {
  const auto n = point.monte_carlo.trials;
  return std::max(binomial_stderr(point.monte_carlo.estimate, n),
                  binomial_stderr(point.analytic, n));
}

std::string recall_to_csv(std::span<const RecallCurve> curves) {
  std::string out = "t,epsilon,analytic,mc_estimate,mc_stderr,mc_trials,model\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      out += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{},{}\n", curve.table_count,
                         p.epsilon, p.analytic, p.monte_carlo.estimate,
                         p.monte_carlo.stderr_, p.monte_carlo.trials,
                         to_string(curve.model));
    }
  }
  return out;
}

}  // namespace mihmap
