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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "mihmap/oracles.hpp"
#include "mihmap/sim_harness.hpp"

using namespace mihmap;

namespace {

WorldConfig small_world(std::uint64_t seed) {
  WorldConfig c;
  c.point_count = 1500;
  c.features_per_frame = 120;
  c.trajectory = circle_trajectory(3.0, 8, 1, 6);
  c.seed = seed;
  return c;
}

PipelineConfig small_pipeline() {
  PipelineConfig p;
  p.mih.table_count = 32;
  p.mih.bucket_capacity = 10;
  return p;
}

}  // namespace

TEST_CASE("world generation is deterministic per seed") {
  const auto a = generate_world(small_world(5));
  const auto b = generate_world(small_world(5));
  const auto c = generate_world(small_world(6));
  REQUIRE(a.points.size() == 1500);
  CHECK(a.frame_count() == 8 * 6 + 1);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    same = same && a.points[i].position == b.points[i].position &&
           a.points[i].descriptor == b.points[i].descriptor;
    differ = differ || a.points[i].descriptor != c.points[i].descriptor;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("visible points project into the image") {
  const auto w = generate_world(small_world(2));
  for (int f = 0; f < w.frame_count(); f += 7) {
    const auto ids = w.visible(f);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    CHECK(static_cast<int>(ids.size()) >= w.config.features_per_frame);
    for (PointId id : ids) {
      const Vector3 pc = w.trajectory[f].transform(w.points[id].position);
      REQUIRE(pc.z() >= w.config.depth_min);
      CHECK(pc.z() <= w.config.depth_max);
      const double u = w.camera.fx * pc.x() / pc.z() + w.camera.cx;
      const double v = w.camera.fy * pc.y() / pc.z() + w.camera.cy;
      CHECK(u >= 0.0);
      CHECK(u < w.config.image_width);
      CHECK(v >= 0.0);
      CHECK(v < w.config.image_height);
    }
  }
}

TEST_CASE("infeasible worlds are reported") {
  auto c = small_world(1);
  c.point_count = 130;
  CHECK_THROWS_AS(generate_world(c), InfeasibleWorld);
  c = small_world(1);
  c.epsilon_max = 300;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("clean observations carry the stored descriptors") {
  auto c = small_world(3);
  c.epsilon_min = c.epsilon_max = 0;
  c.pixel_noise = 0.0;
  const auto w = generate_world(c);
  const auto obs = observe(w, 4);
  REQUIRE(static_cast<int>(obs.size()) == c.features_per_frame);
  std::set<PointId> ids;
  for (const auto& o : obs) {
    ids.insert(o.truth_id);
    CHECK(o.descriptor == w.points[o.truth_id].descriptor);
    const Vector3 pc = w.trajectory[4].transform(w.points[o.truth_id].position);
    CHECK(o.measurement.x() == doctest::Approx(w.camera.fx * pc.x() / pc.z() + w.camera.cx));
    CHECK(o.measurement.y() == doctest::Approx(w.camera.fy * pc.y() / pc.z() + w.camera.cy));
  }
  CHECK(ids.size() == obs.size());
}

TEST_CASE("perturbation respects the epsilon range") {
  auto c = small_world(3);
  c.epsilon_min = 10;
  c.epsilon_max = 20;
  const auto w = generate_world(c);
  const auto obs = observe(w, 2);
  for (const auto& o : obs) {
    const int d = hamming_distance(o.descriptor, w.points[o.truth_id].descriptor);
    CHECK(d >= 10);
    CHECK(d <= 20);
  }
  const auto again = observe(w, 2);
  CHECK(again.front().descriptor == obs.front().descriptor);
}

TEST_CASE("association agrees with the reference matcher") {
  const auto w = generate_world(small_world(8));
  std::vector<MapPointRecord> candidates;
  for (PointId id : w.visible(10)) {
    candidates.push_back({id, w.points[id].position, w.points[id].descriptor, 0, 1});
  }
  // Add near-duplicates to exercise the ratio test.
  std::mt19937_64 rng(1);
  for (std::size_t i = 0; i < 40; ++i) {
    auto r = candidates[i];
    r.point_id += 100000;
    for (int b = 0; b < 6; ++b) r.descriptor.flip(static_cast<int>(rng() % 256));
    candidates.push_back(r);
  }
  const auto obs = observe(w, 10);
  for (AssociationConfig ac : {AssociationConfig{64, 0.8}, AssociationConfig{30, 0.95},
                               AssociationConfig{256, 1.0}}) {
    const auto got = associate(obs, candidates, ac);
    const auto want = associate_oracle(obs, candidates, ac);
    CHECK(got.matches == want.matches);
    CHECK(got.true_matches == want.true_matches);
    CHECK(got.hamming_comparisons ==
          static_cast<std::int64_t>(obs.size() * candidates.size()));
  }
}

TEST_CASE("summary uses nearest-rank quartiles") {
  const std::vector<double> v = {7, 1, 3, 9, 5, 2, 8};
  const auto s = summarize(v);
  // sorted 1 2 3 5 7 8 9; ranks ceil(1.75)=2, ceil(3.5)=4, ceil(5.25)=6
  CHECK(s.q1 == 2);
  CHECK(s.median == 5);
  CHECK(s.q3 == 8);
  CHECK(s.min == 1);
  CHECK(s.max == 9);
  CHECK(s.mean == doctest::Approx(5.0));
  CHECK(s.count == 7);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("strategy names") {
  for (auto k : {StrategyKind::kCovisOnly, StrategyKind::kMihAll, StrategyKind::kMihSelected,
                 StrategyKind::kRnd, StrategyKind::kLong}) {
    CHECK(parse_strategy(to_string(k)) == k);
  }
  CHECK(to_string(StrategyKind::kMihSelected) == "MihSelected");
  CHECK_THROWS_AS(parse_strategy("mihselected"), std::invalid_argument);
}

TEST_CASE("pipeline runs on a small world") {
  const auto w = generate_world(small_world(4));
  const auto pc = small_pipeline();
  StrategySpec covis{StrategyKind::kCovisOnly, 0, {}};
  StrategySpec all{StrategyKind::kMihAll, 0, {}};
  StrategySpec sel{StrategyKind::kMihSelected, 0, {8, 80.0, 1e-3}};
  const auto rc = run_pipeline(w, covis, pc);
  const auto ra = run_pipeline(w, all, pc);
  const auto rs = run_pipeline(w, sel, pc);
  REQUIRE(rs.frames.size() == static_cast<std::size_t>(w.frame_count()));
  CHECK(rs.frames[0].bootstrap);
  for (std::size_t f = 1; f < rs.frames.size(); ++f) {
    CHECK(rs.frames[f].local_map_size <= ra.frames[f].local_map_size);
    CHECK(ra.frames[f].local_map_size <= rc.frames[f].local_map_size);
    CHECK(rs.frames[f].table_lookups <= 8 * w.config.features_per_frame);
    if (!ra.frames[f].bootstrap) {
      CHECK(ra.frames[f].table_lookups == 32 * w.config.features_per_frame);
    }
    CHECK_FALSE(rs.frames[f].track_lost);
    CHECK(rs.frames[f].keyframe == (static_cast<int>(f) % w.config.keyframe_interval == 0));
  }
  CHECK(rs.summary.pose_error_trans.median < 0.05);
  CHECK(rc.summary.pose_error_trans.median < 0.05);
  CHECK_FALSE(rs.selection_trace.empty());

  // Same inputs, same bytes.
  const auto again = run_pipeline(w, sel, pc);
  CHECK(metrics_to_csv(again.frames) == metrics_to_csv(rs.frames));
  CHECK(again.selection_trace == rs.selection_trace);
}

TEST_CASE("budgeted strategies") {
  const auto w = generate_world(small_world(4));
  const auto pc = small_pipeline();
  CHECK_THROWS_AS(run_pipeline(w, {StrategyKind::kRnd, 0, {}}, pc), std::invalid_argument);
  for (auto k : {StrategyKind::kRnd, StrategyKind::kLong}) {
    const auto r = run_pipeline(w, {k, 150, {}}, pc);
    for (const auto& f : r.frames) CHECK(f.local_map_size <= 150);
    CHECK(r.summary.budget == 150);
  }
}

TEST_CASE("metrics csv has one row per frame") {
  const auto w = generate_world(small_world(4));
  const auto r = run_pipeline(w, {StrategyKind::kCovisOnly, 0, {}}, small_pipeline());
  const auto csv = metrics_to_csv(r.frames);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == w.frame_count() + 1);
  CHECK(csv.rfind("frame_index,", 0) == 0);
}
