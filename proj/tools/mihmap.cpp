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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mihmap/cli_commands.hpp"

namespace {

struct Raw {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  std::string t_list;
  std::string eps;
  std::string model;
  int k = 0;
  bool self_check = false;
  bool inject_fault = false;
  int verbosity = 0;
};

struct Handles {
  CLI::Option* config = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* t_list = nullptr;
  CLI::Option* eps = nullptr;
  CLI::Option* model = nullptr;
  CLI::Option* k = nullptr;
};

void add_common(CLI::App* sub, Raw& raw, Handles& h) {
  h.config = sub->add_option("--config", raw.config, "JSON configuration file");
  sub->add_option("--out", raw.out, "output directory")->capture_default_str();
  h.seed = sub->add_option("--seed", raw.seed, "root seed");
  h.trials = sub->add_option("--trials", raw.trials, "trials, instances or operations");
  h.t_list = sub->add_option("--t", raw.t_list, "table counts, comma separated");
  h.eps = sub->add_option("--eps", raw.eps, "epsilon range lo:hi:step");
  sub->add_flag("--self-check", raw.self_check, "verify results and fail on mismatch");
  sub->add_flag("-v", raw.verbosity, "verbose; repeat for more");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-index hashing local maps: recall model, table selection, simulation"};
  app.require_subcommand(1);
  // Each subcommand binds its own storage; CLI11 resets shared flag targets.
  Raw rr, rb, rs, ro;
  Handles hr, hb, hs, ho;

  auto* recall = app.add_subcommand("recall", "analytic vs Monte Carlo recall sweep");
  add_common(recall, rr, hr);
  hr.model = recall->add_option("--model", rr.model, "BallsIntoBins or DistinctPositions");

  auto* bench = app.add_subcommand("select-bench", "greedy vs exhaustive table selection");
  add_common(bench, rb, hb);
  hb.k = bench->add_option("--k", rb.k, "cardinality constraint");

  auto* sim = app.add_subcommand("simulate", "local-map strategies on the synthetic world");
  add_common(sim, rs, hs);

  auto* oracle = app.add_subcommand("oracle-check", "index and association reference checks");
  add_common(oracle, ro, ho);
  oracle->add_flag("--inject-fault", ro.inject_fault, "test hook: corrupt one query result");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mihmap::kExitUsage;
  }

  auto build = [](const Raw& raw, const Handles& hh) {
    mihmap::CommandOptions o;
    if (*hh.config) o.config = raw.config;
    o.out = raw.out;
    if (*hh.seed) o.seed = raw.seed;
    if (*hh.trials) o.trials = raw.trials;
    if (*hh.t_list) o.t_list = raw.t_list;
    if (*hh.eps) o.eps_range = raw.eps;
    if (hh.model && *hh.model) o.model = raw.model;
    if (hh.k && *hh.k) o.k = raw.k;
    o.self_check = raw.self_check;
    o.inject_fault = raw.inject_fault;
    o.verbosity = raw.verbosity;
    return o;
  };

  if (*recall) return mihmap::cmd_recall(build(rr, hr), std::cerr);
  if (*bench) return mihmap::cmd_select_bench(build(rb, hb), std::cerr);
  if (*sim) return mihmap::cmd_simulate(build(rs, hs), std::cerr);
  return mihmap::cmd_oracle_check(build(ro, ho), std::cerr);
}
