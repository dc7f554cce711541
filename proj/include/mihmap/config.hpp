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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mihmap/sim_harness.hpp"

namespace mihmap {

/// A malformed or out-of-range configuration value. field() is the dotted
/// JSON path, e.g. "pipeline.bucket_capacity".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct TrajectoryConfig {
  double radius = 3.0;
  int segments_per_loop = 12;
  int loops = 2;
  int frames_per_segment = 10;
  /// When non-empty, used instead of the circle.
  std::vector<Waypoint> waypoints;
};

struct SimulationConfig {
  WorldConfig world;
  TrajectoryConfig trajectory;
  PipelineConfig pipeline;
  SelectionConfig selection;
  std::vector<StrategyKind> strategies = {StrategyKind::kCovisOnly, StrategyKind::kMihAll,
                                          StrategyKind::kMihSelected};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  /// World config for one seed with the trajectory filled in.
  WorldConfig world_for_seed(std::uint64_t seed) const;
  /// Throws ConfigError.
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected. d_thres may
/// be null or "inf" for no threshold. Throws ConfigError.
SimulationConfig parse_config(std::string_view json_text);
SimulationConfig load_config(const std::string& path);

/// Canonical JSON (sorted keys, fixed formatting). Round-trips through
/// parse_config.
std::string config_to_json(const SimulationConfig& config);

/// FNV-1a of the canonical JSON, 16 hex digits.
std::string config_hash(const SimulationConfig& config);

}  // namespace mihmap
