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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mihmap/mih_index.hpp"

namespace mihmap {

/// Reference lookup by linear scan over a dump of the index: every entry in
/// a subset table whose recorded bucket address equals the query's substring
/// in that table. Returns sorted, duplicate-free ids.
std::vector<PointId> oracle_query(std::span<const MihDumpRecord> contents,
                                  const BinaryDescriptor& descriptor,
                                  std::span<const int> table_subset,
                                  int table_count);

struct MihWorkloadConfig {
  int table_count = 8;
  int bucket_capacity = 10;
  int operations = 10000;
  /// Distinct point ids in play; reinserting a resident id exercises
  /// move-to-front.
  int id_pool = 400;
  /// Descriptors are drawn near a few prototypes so buckets overflow.
  int prototypes = 16;
  int prototype_spread = 24;
  double query_fraction = 0.5;
  int max_query_flips = 40;
  std::uint64_t seed = 1;
  /// Test hook: drops one id from the first nonempty query result.
  bool inject_fault = false;
};

struct MihWorkloadReport {
  int inserts = 0;
  int queries = 0;
  int moves_to_front = 0;
  int evictions = 0;
  int max_bucket_length = 0;
  /// First disagreement with the reference, if any.
  std::optional<std::string> divergence;

  bool ok() const { return !divergence.has_value(); }
};

/// Random inserts and queries against a MihIndex, checked step by step
/// against a reference model of the buckets (a plain list per bit-string
/// address). Every query must equal oracle_query over the reference
/// contents, every insert must report the same move-to-front and eviction
/// as the reference, and no bucket may exceed its capacity.
MihWorkloadReport run_mih_workload(const MihWorkloadConfig& config);

}  // namespace mihmap
