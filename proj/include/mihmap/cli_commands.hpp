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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mihmap/config.hpp"
#include "mihmap/sim_harness.hpp"

namespace mihmap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Options shared by all verbs. Unset optionals take per-verb defaults.
struct CommandOptions {
  std::optional<std::string> config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<std::string> t_list;
  std::optional<std::string> eps_range;
  bool self_check = false;
  int verbosity = 0;
  std::optional<std::string> model;  // recall
  std::optional<int> k;              // select-bench
  bool inject_fault = false;         // oracle-check
};

/// "2,4,8". Throws std::invalid_argument.
std::vector<int> parse_int_list(const std::string& text);
/// "lo:hi:step", "lo:hi" (step 1) or a single value; hi inclusive. Throws
/// std::invalid_argument.
std::vector<int> parse_range(const std::string& text);

struct SimulationRun {
  StrategyKind strategy = StrategyKind::kMihSelected;
  std::uint64_t seed = 0;
  RunResult result;
};

/// Every listed strategy over every seed, ordered by seed then by the
/// strategy list. Rnd and Long draw round(mean MihSelected local-map size)
/// candidates, so MihSelected runs first on each seed even when not listed.
/// Seeds run in parallel on up to max_threads workers; the result does not
/// depend on the thread count.
std::vector<SimulationRun> run_simulation(const SimulationConfig& config,
                                          unsigned max_threads);

/// Aggregate JSON: per strategy, per-seed summaries and means over seeds.
std::string simulation_summary_json(const SimulationConfig& config,
                                    const std::vector<SimulationRun>& runs);

/// Writes recall.csv. --self-check: exit 1 if any grid point's Monte Carlo
/// estimate is more than 4 standard errors from the analytic value.
int cmd_recall(const CommandOptions& opts, std::ostream& log);
/// Writes select_bench.csv; exit 1 if any greedy/optimum ratio falls below
/// 1 - 1/e.
int cmd_select_bench(const CommandOptions& opts, std::ostream& log);
/// Writes metrics_<strategy>_seed<n>.csv, selection_trace_seed<n>.csv,
/// summary.json and config.json. --self-check reruns and compares bytes.
int cmd_simulate(const CommandOptions& opts, std::ostream& log);
/// Randomized index and association workloads against their references;
/// writes oracle_check.csv, exit 1 with the first divergence.
int cmd_oracle_check(const CommandOptions& opts, std::ostream& log);

}  // namespace mihmap
