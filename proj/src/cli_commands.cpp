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

#include "mihmap/cli_commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "mihmap/io.hpp"
#include "mihmap/mih_oracle.hpp"
#include "mihmap/oracles.hpp"
#include "mihmap/recall_model.hpp"
#include "mihmap/table_selection.hpp"

namespace mihmap {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

int to_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument(fmt::format("not an integer: '{}'", s));
  return v;
}

json series_json(const SeriesSummary& s) {
  return {{"mean", s.mean}, {"q1", s.q1},   {"median", s.median}, {"q3", s.q3},
          {"min", s.min},   {"max", s.max}, {"count", s.count}};
}

json run_json(const RunSummary& s) {
  return {{"seed", s.seed},
          {"frames", s.frames},
          {"track_lost_frames", s.track_lost_frames},
          {"budget", s.budget},
          {"local_map_size", series_json(s.local_map_size)},
          {"table_lookups", series_json(s.table_lookups)},
          {"hamming_comparisons", series_json(s.hamming_comparisons)},
          {"recall", series_json(s.recall)},
          {"pose_error_trans", series_json(s.pose_error_trans)},
          {"pose_error_rot", series_json(s.pose_error_rot)},
          {"mean_selected_tables", s.mean_selected_tables},
          {"selection_lookups", s.selection_lookups},
          {"match_age_histogram", s.match_age_histogram}};
}

void require_no_config(const CommandOptions& opts, std::string_view verb) {
  if (opts.config) throw UsageError(fmt::format("--config is not used by {}", verb));
}

// Runs f(i) for i in [0, n) on up to `threads` workers. The first exception
// is rethrown after all workers stop.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    log << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    log << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleWorld& e) {
    log << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<int> parse_range(const std::string& text) {
  std::vector<int> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(to_int(item));
  if (parts.empty() || parts.size() > 3) {
    throw std::invalid_argument(fmt::format("bad range '{}', want lo:hi:step", text));
  }
  const int lo = parts[0];
  const int hi = parts.size() > 1 ? parts[1] : lo;
  const int step = parts.size() > 2 ? parts[2] : 1;
  if (step < 1 || hi < lo) throw std::invalid_argument(fmt::format("bad range '{}'", text));
  std::vector<int> out;
  for (long v = lo; v <= hi; v += step) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<SimulationRun> run_simulation(const SimulationConfig& config,
                                          unsigned max_threads) {
  config.validate();
  const auto& listed = config.strategies;
  const bool want_budget = std::any_of(listed.begin(), listed.end(), [](StrategyKind k) {
    return k == StrategyKind::kRnd || k == StrategyKind::kLong;
  });
  std::vector<std::vector<SimulationRun>> per_seed(config.seeds.size());
  parallel_for(config.seeds.size(), max_threads, [&](std::size_t i) {
    const std::uint64_t seed = config.seeds[i];
    const World world = generate_world(config.world_for_seed(seed));
    std::map<StrategyKind, RunResult> done;
    auto run = [&](StrategyKind kind, int budget) {
      StrategySpec spec;
      spec.kind = kind;
      spec.budget = budget;
      spec.selection = config.selection;
      RunResult r = run_pipeline(world, spec, config.pipeline);
      r.summary.seed = seed;
      return r;
    };
    int budget = 0;
    const bool listed_selected =
        std::find(listed.begin(), listed.end(), StrategyKind::kMihSelected) != listed.end();
    if (want_budget || listed_selected) {
      done.emplace(StrategyKind::kMihSelected, run(StrategyKind::kMihSelected, 0));
      budget = static_cast<int>(
          std::lround(done.at(StrategyKind::kMihSelected).summary.local_map_size.mean));
    }
    for (StrategyKind kind : listed) {
      if (done.count(kind)) continue;
      const bool budgeted = kind == StrategyKind::kRnd || kind == StrategyKind::kLong;
      done.emplace(kind, run(kind, budgeted ? budget : 0));
    }
    for (StrategyKind kind : listed) {
      per_seed[i].push_back({kind, seed, done.at(kind)});
    }
  });
  std::vector<SimulationRun> runs;
  for (auto& v : per_seed) {
    for (auto& r : v) runs.push_back(std::move(r));
  }
  return runs;
}

std::string simulation_summary_json(const SimulationConfig& config,
                                    const std::vector<SimulationRun>& runs) {
  json doc;
  doc["config_hash"] = config_hash(config);
  doc["seeds"] = config.seeds;
  json strategies = json::object();
  for (StrategyKind kind : config.strategies) {
    const std::string name(to_string(kind));
    json per_run = json::array();
    double size = 0, lookups = 0, recall = 0, trans = 0, rot = 0, tables = 0;
    int lost = 0, n = 0;
    for (const auto& r : runs) {
      if (r.strategy != kind) continue;
      const auto& s = r.result.summary;
      per_run.push_back(run_json(s));
      size += s.local_map_size.mean;
      lookups += s.table_lookups.mean;
      recall += s.recall.mean;
      trans += s.pose_error_trans.mean;
      rot += s.pose_error_rot.mean;
      tables += s.mean_selected_tables;
      lost += s.track_lost_frames;
      ++n;
    }
    const double d = n > 0 ? n : 1;
    strategies[name] = {{"runs", per_run},
                        {"mean_over_seeds",
                         {{"local_map_size", size / d},
                          {"table_lookups", lookups / d},
                          {"recall", recall / d},
                          {"pose_error_trans", trans / d},
                          {"pose_error_rot", rot / d},
                          {"selected_tables", tables / d}}},
                        {"track_lost_frames", lost},
                        {"track_lost", lost > 0}};
  }
  doc["strategies"] = strategies;
  return doc.dump(2) + "\n";
}

int cmd_recall(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    require_no_config(opts, "recall");
    const auto ts = parse_int_list(opts.t_list.value_or("2,4,8,16,32,64"));
    const auto eps = parse_range(opts.eps_range.value_or("0:128:8"));
    for (int t : ts) {
      if (t < 1 || t > BinaryDescriptor::kBits) {
        throw UsageError(fmt::format("--t: table count {} outside [1, 256]", t));
      }
    }
    for (int e : eps) {
      if (e < 0) throw UsageError("--eps: negative epsilon");
    }
    const std::int64_t trials = opts.trials.value_or(100000);
    if (trials < 1) throw UsageError("--trials must be positive");
    const std::uint64_t seed = opts.seed.value_or(1);
    const PerturbationModel model =
        parse_perturbation_model(opts.model.value_or("BallsIntoBins"));
    if (model == PerturbationModel::kDistinctPositions &&
        *std::max_element(eps.begin(), eps.end()) > BinaryDescriptor::kBits) {
      throw UsageError("--eps: DistinctPositions allows at most 256 flips");
    }
    const std::string canon =
        fmt::format("recall t={} eps={} trials={} model={}", fmt::join(ts, ","),
                    fmt::join(eps, ","), trials, to_string(model));
    const std::string hash = hex64(fnv1a64(canon));
    const auto curves = sweep(ts, eps, trials, seed, model, static_cast<int>(worker_threads()));
    write_file_atomic(opts.out / "recall.csv",
                      metadata_header(seed, hash) + recall_to_csv(curves));
    double worst = 0.0;
    int bad = 0;
    for (const auto& c : curves) {
      for (const auto& p : c.points) {
        const double se = agreement_stderr(p);
        const double z = se > 0 ? std::abs(p.monte_carlo.estimate - p.analytic) / se : 0.0;
        worst = std::max(worst, z);
        if (z > 4.0) {
          ++bad;
          if (opts.verbosity > 0 || opts.self_check) {
            log << fmt::format("t={} eps={} analytic={:.6f} mc={:.6f} z={:.2f}\n", c.table_count,
                               p.epsilon, p.analytic, p.monte_carlo.estimate, z);
          }
        }
      }
    }
    if (opts.verbosity > 0) {
      log << fmt::format("recall: {} curves, max |z| = {:.2f}\n", curves.size(), worst);
    }
    if (opts.self_check && bad > 0) {
      log << fmt::format("self-check failed: {} grid points beyond 4 standard errors\n", bad);
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

int cmd_select_bench(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    require_no_config(opts, "select-bench");
    const auto ts = parse_int_list(opts.t_list.value_or("8"));
    if (ts.size() != 1) throw UsageError("--t: select-bench takes a single table count");
    const int t = ts.front();
    if (t < 1 || t > 12) throw UsageError("--t: the exhaustive reference needs 1 <= t <= 12");
    const int k = opts.k.value_or(3);
    if (k < 1) throw UsageError("--k must be at least 1");
    const std::int64_t instances = opts.trials.value_or(200);
    if (instances < 1) throw UsageError("--trials must be positive");
    const std::uint64_t seed = opts.seed.value_or(1);
    const double damping = 1e-3;
    const int pool = 40;
    const double inclusion = 0.25;
    const std::string canon = fmt::format("select-bench t={} k={} instances={} damping={} "
                                          "pool={} inclusion={}",
                                          t, k, instances, damping, pool, inclusion);
    SelectionConfig sc;
    sc.k = k;
    sc.d_thres = std::numeric_limits<double>::infinity();
    sc.damping = damping;
    const double bound = 1.0 - 1.0 / std::exp(1.0);
    struct Row {
      double greedy, optimum, baseline, ratio;
      std::vector<int> greedy_tables, optimal_tables;
    };
    std::vector<Row> rows(static_cast<std::size_t>(instances));
    parallel_for(rows.size(), worker_threads(), [&](std::size_t i) {
      const auto sets = random_instance(t, pool, inclusion, derive_seed(seed, i));
      const auto g = greedy_select(sets, sc);
      const auto best = exhaustive_select(sets, k, damping);
      rows[i] = {g.final_objective, best.value, g.baseline,
                 normalized_ratio(g.final_objective, best.value, g.baseline), g.selected,
                 best.tables};
    });
    std::string csv = metadata_header(seed, hex64(fnv1a64(canon))) +
                      "instance,greedy,optimum,baseline,ratio,greedy_tables,optimal_tables\n";
    int violations = 0;
    double worst = 1.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      csv += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", i, r.greedy, r.optimum,
                         r.baseline, r.ratio, fmt::join(r.greedy_tables, ";"),
                         fmt::join(r.optimal_tables, ";"));
      worst = std::min(worst, r.ratio);
      if (r.ratio < bound - 1e-9) ++violations;
    }
    write_file_atomic(opts.out / "select_bench.csv", csv);
    if (opts.verbosity > 0) {
      log << fmt::format("select-bench: {} instances, min ratio {:.6f}, bound {:.6f}\n",
                         instances, worst, bound);
    }
    if (violations > 0) {
      log << fmt::format("{} instances below the 1 - 1/e bound\n", violations);
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

namespace {

std::map<std::string, std::string> simulation_files(const SimulationConfig& config,
                                                    const std::vector<SimulationRun>& runs) {
  const std::string hash = config_hash(config);
  std::map<std::string, std::string> files;
  for (const auto& r : runs) {
    const std::string name(to_string(r.strategy));
    files[fmt::format("metrics_{}_seed{}.csv", name, r.seed)] =
        metadata_header(r.seed, hash, "strategy=" + name) + metrics_to_csv(r.result.frames);
    if (r.strategy == StrategyKind::kMihSelected) {
      files[fmt::format("selection_trace_seed{}.csv", r.seed)] =
          metadata_header(r.seed, hash) + kSelectionTraceHeader + r.result.selection_trace;
    }
  }
  files["summary.json"] = simulation_summary_json(config, runs);
  files["config.json"] = config_to_json(config);
  return files;
}

}  // namespace

int cmd_simulate(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    SimulationConfig config = opts.config ? load_config(*opts.config) : SimulationConfig{};
    if (opts.seed) config.seeds = {*opts.seed};
    if (opts.trials || opts.t_list || opts.eps_range) {
      throw UsageError("simulate takes its parameters from --config");
    }
    config.validate();
    const unsigned threads = worker_threads();
    const auto runs = run_simulation(config, threads);
    const auto files = simulation_files(config, runs);
    if (opts.self_check) {
      const auto again = simulation_files(config, run_simulation(config, threads));
      for (const auto& [name, bytes] : files) {
        auto it = again.find(name);
        if (it == again.end() || it->second != bytes) {
          log << "self-check failed: " << name << " differs between identical runs\n";
          return kExitCheckFailed;
        }
      }
    }
    for (const auto& [name, bytes] : files) write_file_atomic(opts.out / name, bytes);
    int lost = 0;
    for (const auto& r : runs) lost += r.result.summary.track_lost_frames;
    if (opts.verbosity > 0) {
      log << fmt::format("simulate: {} runs, {} files in {}, {} track-lost frames\n", runs.size(),
                         files.size(), opts.out.string(), lost);
    }
    return kExitOk;
  });
}

namespace {

// Associations on random descriptor clusters; distances tie often, which
// exercises the ratio test.
std::optional<std::string> association_workload(std::uint64_t seed, int rounds) {
  Rng rng(seed);
  std::uniform_int_distribution<int> pos(0, BinaryDescriptor::kBits - 1);
  std::uniform_int_distribution<int> flips(0, 30);
  for (int round = 0; round < rounds; ++round) {
    std::vector<BinaryDescriptor> protos;
    for (int i = 0; i < 8; ++i) protos.push_back(random_descriptor(rng));
    std::vector<MapPointRecord> cands;
    const int n_cands = std::uniform_int_distribution<int>(0, 120)(rng);
    for (int c = 0; c < n_cands; ++c) {
      MapPointRecord rec;
      rec.point_id = static_cast<PointId>(c * 3 + 1);
      rec.descriptor = protos[c % protos.size()];
      for (int f = flips(rng); f > 0; --f) rec.descriptor.flip(pos(rng));
      cands.push_back(rec);
    }
    std::vector<Observation> obs;
    for (int o = 0; o < 60; ++o) {
      Observation ob;
      if (!cands.empty()) {
        const auto& src = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
        ob.descriptor = src.descriptor;
        ob.truth_id = src.point_id;
      } else {
        ob.descriptor = random_descriptor(rng);
      }
      for (int f = flips(rng); f > 0; --f) ob.descriptor.flip(pos(rng));
      obs.push_back(ob);
    }
    AssociationConfig cfg;
    cfg.hamming_threshold = std::uniform_int_distribution<int>(10, 80)(rng);
    cfg.ratio = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
    const auto got = associate(obs, cands, cfg);
    const auto want = associate_oracle(obs, cands, cfg);
    if (got.matches != want.matches || got.true_matches != want.true_matches ||
        got.hamming_comparisons != want.hamming_comparisons) {
      return fmt::format("association round {}: {} matches, reference {}", round,
                         got.matches.size(), want.matches.size());
    }
  }
  return std::nullopt;
}

}  // namespace

int cmd_oracle_check(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    require_no_config(opts, "oracle-check");
    const auto ts = parse_int_list(opts.t_list.value_or("4,8,32"));
    for (int t : ts) {
      if (t < 1 || t > BinaryDescriptor::kBits) {
        throw UsageError(fmt::format("--t: table count {} outside [1, 256]", t));
      }
    }
    const std::int64_t ops = opts.trials.value_or(10000);
    if (ops < 1 || ops > std::numeric_limits<int>::max()) throw UsageError("--trials out of range");
    const std::uint64_t seed = opts.seed.value_or(1);
    const std::string canon = fmt::format("oracle-check t={} ops={} fault={}", fmt::join(ts, ","),
                                          ops, opts.inject_fault);
    std::vector<MihWorkloadReport> reports(ts.size());
    parallel_for(ts.size(), worker_threads(), [&](std::size_t i) {
      MihWorkloadConfig wc;
      wc.table_count = ts[i];
      wc.operations = static_cast<int>(ops);
      wc.seed = derive_seed(seed, i);
      wc.inject_fault = opts.inject_fault;
      reports[i] = run_mih_workload(wc);
    });
    const auto assoc = association_workload(derive_seed(seed, 1000), 50);
    std::string csv = metadata_header(seed, hex64(fnv1a64(canon))) +
                      "workload,tables,inserts,queries,moves_to_front,evictions,"
                      "max_bucket_length,status\n";
    std::optional<std::string> first;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const auto& r = reports[i];
      csv += fmt::format("mih,{},{},{},{},{},{},{}\n", ts[i], r.inserts, r.queries,
                         r.moves_to_front, r.evictions, r.max_bucket_length,
                         r.ok() ? "ok" : "diverged");
      if (!r.ok() && !first) first = fmt::format("t={} {}", ts[i], *r.divergence);
    }
    csv += fmt::format("associate,,,,,,,{}\n", assoc ? "diverged" : "ok");
    if (assoc && !first) first = *assoc;
    write_file_atomic(opts.out / "oracle_check.csv", csv);
    if (first) {
      log << "oracle divergence (seed " << seed << "): " << *first << "\n";
      return kExitCheckFailed;
    }
    if (opts.verbosity > 0) log << "oracle-check: all workloads agree\n";
    return kExitOk;
  });
}

}  // namespace mihmap
