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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mihmap/geometry.hpp"

namespace mihmap {

/// Per-table subsets F_i of one match pool F. Each distinct match (keyed by
/// point id) carries its precomputed pose information; tables refer to
/// matches by index so overlapping tables share entries.
struct TableMatchSets {
  std::vector<PointId> match_ids;
  std::vector<Matrix6> information;
  /// Sorted, duplicate-free indices into match_ids / information.
  std::vector<std::vector<int>> per_table;

  int table_count() const { return static_cast<int>(per_table.size()); }
  int match_count() const { return static_cast<int>(information.size()); }

  /// Deduplicates matches across tables by point id and evaluates each
  /// match's pose information once. Matches behind the camera are dropped.
  static TableMatchSets build(std::span<const std::vector<FeatureMatch>> per_table,
                              const CameraPose& pose, const PinholeModel& model);
};

struct SelectionConfig {
  int k = 8;
  double d_thres = 80.0;
  double damping = 1e-3;
};

struct SelectionResult {
  /// Table indices in the order they were picked.
  std::vector<int> selected;
  /// Objective value after each pick.
  std::vector<double> objective_trace;
  /// Objective increase of each pick over the previous step.
  std::vector<double> marginal_gains;
  double baseline = 0.0;
  double final_objective = 0.0;
  std::int64_t objective_evaluations = 0;

  friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

/// Damped logDet of the information summed over the union of the chosen
/// tables' matches. Throws std::out_of_range on a bad table index.
double objective(const TableMatchSets& sets, std::span<const int> tables,
                 double damping);

/// Greedy table selection. Each round adds the table whose union with the
/// current selection scores highest (lowest index on ties) and records that
/// score as the accumulated contribution. Rounds continue while fewer than k
/// tables are chosen and the accumulated contribution is below d_thres;
/// selection also ends when no remaining table adds an uncovered match.
SelectionResult greedy_select(const TableMatchSets& sets,
                              const SelectionConfig& config);

struct ExhaustiveResult {
  std::vector<int> tables;
  double value = 0.0;
};

/// Best subset of at most k tables by enumeration. Throws
/// std::invalid_argument for more than 12 tables.
ExhaustiveResult exhaustive_select(const TableMatchSets& sets, int k,
                                   double damping);

/// Reselects at keyframes and keeps the current selection otherwise.
SelectionResult refresh_policy(const SelectionResult& current, bool is_keyframe,
                               const TableMatchSets& sets,
                               const SelectionConfig& config);

/// (greedy - baseline) / (optimum - baseline); 1 when the optimum does not
/// improve on the baseline.
double normalized_ratio(double greedy, double optimum, double baseline);

/// A random instance: pool_size points in front of a perturbed camera, each
/// assigned to each of t tables independently with probability inclusion.
TableMatchSets random_instance(int table_count, int pool_size, double inclusion,
                               std::uint64_t seed);

/// Rows keyframe_id,step,table_index,gain,d_acc without a header.
std::string selection_trace_rows(std::int64_t keyframe_id,
                                 const SelectionResult& result);
inline constexpr const char* kSelectionTraceHeader =
    "keyframe_id,step,table_index,gain,d_acc\n";

}  // namespace mihmap
