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

#include "mihmap/table_selection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace mihmap {

TableMatchSets TableMatchSets::build(std::span<const std::vector<FeatureMatch>> per_table,
                                     const CameraPose& pose,
                                     const PinholeModel& model) {
  TableMatchSets sets;
  sets.per_table.resize(per_table.size());
  std::unordered_map<PointId, int> index_of;
  for (std::size_t t = 0; t < per_table.size(); ++t) {
    auto& members = sets.per_table[t];
    for (const auto& match : per_table[t]) {
      auto it = index_of.find(match.point_id);
      if (it == index_of.end()) {
        auto info = pose_info_single(match, pose, model);
        if (!info) continue;
        it = index_of.emplace(match.point_id, sets.match_count()).first;
        sets.match_ids.push_back(match.point_id);
        sets.information.push_back(*info);
      }
      members.push_back(it->second);
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
  }
  return sets;
}

double objective(const TableMatchSets& sets, std::span<const int> tables,
                 double damping) {
  std::vector<char> covered(sets.match_count(), 0);
  Matrix6 sum = Matrix6::Zero();
  for (int t : tables) {
    if (t < 0 || t >= sets.table_count()) {
      throw std::out_of_range(fmt::format("table index {} outside [0, {})", t,
                                          sets.table_count()));
    }
    for (int j : sets.per_table[t]) {
      if (covered[j]) continue;
      covered[j] = 1;
      sum += sets.information[j];
    }
  }
  return logdet_damped(sum, damping);
}

SelectionResult greedy_select(const TableMatchSets& sets,
                              const SelectionConfig& config) {
  if (config.k < 1) throw std::invalid_argument("cardinality k must be at least 1");
  const int t = sets.table_count();
  SelectionResult result;
  result.baseline = logdet_damped(Matrix6::Zero().eval(), config.damping);
  result.final_objective = result.baseline;

  std::vector<char> covered(sets.match_count(), 0);
  std::vector<char> chosen(t, 0);
  Matrix6 running = Matrix6::Zero();
  double previous = result.baseline;
  double d_acc = 0.0;

  while (static_cast<int>(result.selected.size()) < config.k &&
         d_acc < config.d_thres) {
    int best = -1;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < t; ++i) {
      if (chosen[i]) continue;
      Matrix6 candidate = running;
      bool adds = false;
      for (int j : sets.per_table[i]) {
        if (covered[j]) continue;
        candidate += sets.information[j];
        adds = true;
      }
      if (!adds) continue;
      const double value = logdet_damped(candidate, config.damping);
      ++result.objective_evaluations;
      if (value > best_value) {
        best_value = value;
        best = i;
      }
    }
    if (best < 0) break;
    chosen[best] = 1;
    for (int j : sets.per_table[best]) {
      if (covered[j]) continue;
      covered[j] = 1;
      running += sets.information[j];
    }
    d_acc = best_value;
    result.selected.push_back(best);
    result.objective_trace.push_back(best_value);
    result.marginal_gains.push_back(best_value - previous);
    previous = best_value;
    result.final_objective = best_value;
  }
  return result;
}

ExhaustiveResult exhaustive_select(const TableMatchSets& sets, int k,
                                   double damping) {
  const int t = sets.table_count();
  if (t > 12) {
    throw std::invalid_argument(
        fmt::format("exhaustive selection over {} tables exceeds the limit of 12", t));
  }
  if (k < 0) throw std::invalid_argument("cardinality k must be non-negative");
  ExhaustiveResult best;
  best.value = objective(sets, {}, damping);
  std::vector<int> subset;
  for (std::uint32_t mask = 1; mask < (1u << t); ++mask) {
    if (std::popcount(mask) > k) continue;
    subset.clear();
    for (int i = 0; i < t; ++i) {
      if (mask & (1u << i)) subset.push_back(i);
    }
    const double value = objective(sets, subset, damping);
    if (value > best.value) {
      best.value = value;
      best.tables = subset;
    }
  }
  return best;
}

SelectionResult refresh_policy(const SelectionResult& current, bool is_keyframe,
                               const TableMatchSets& sets,
                               const SelectionConfig& config) {
  if (!is_keyframe) return current;
  return greedy_select(sets, config);
}

double normalized_ratio(double greedy, double optimum, double baseline) {
  const double denom = optimum - baseline;
  if (denom <= 0.0) return 1.0;
  return (greedy - baseline) / denom;
}

TableMatchSets random_instance(int table_count, int pool_size, double inclusion,
                               std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> depth(2.0, 12.0);
  std::bernoulli_distribution member(inclusion);

  const PinholeModel model{500.0, 500.0, 320.0, 240.0};
  Vector6 jitter;
  for (int i = 0; i < 6; ++i) jitter(i) = 0.2 * unit(rng);
  const CameraPose pose = CameraPose::Identity().retract(jitter);

  std::vector<FeatureMatch> pool;
  pool.reserve(pool_size);
  for (int i = 0; i < pool_size; ++i) {
    const double z = depth(rng);
    const Vector3 pc(0.6 * z * unit(rng), 0.45 * z * unit(rng), z);
    FeatureMatch m;
    m.point_id = static_cast<PointId>(i);
    m.world_point = pose.rotation.transpose() * (pc - pose.translation);
    m.measurement = *project(pose, model, m.world_point);
    pool.push_back(m);
  }
  std::vector<std::vector<FeatureMatch>> per_table(table_count);
  for (auto& table : per_table) {
    for (const auto& m : pool) {
      if (member(rng)) table.push_back(m);
    }
  }
  return TableMatchSets::build(per_table, pose, model);
}

std::string selection_trace_rows(std::int64_t keyframe_id,
                                 const SelectionResult& result) {
  std::string out;
  for (std::size_t s = 0; s < result.selected.size(); ++s) {
    out += fmt::format("{},{},{},{:.17g},{:.17g}\n", keyframe_id, s,
                       result.selected[s], result.marginal_gains[s],
                       result.objective_trace[s]);
  }
  return out;
}

}  // namespace mihmap
