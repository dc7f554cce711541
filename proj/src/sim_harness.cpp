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

#include "mihmap/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

namespace mihmap {

namespace {

constexpr std::uint64_t kPointStream = 1;
constexpr std::uint64_t kObserveStream = 2;
constexpr std::uint64_t kMapNoiseStream = 3;
constexpr std::uint64_t kSamplingStream = 4;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

CameraPose pose_from_waypoint(const Vector3& position, double yaw_deg) {
  const double yaw = deg2rad(yaw_deg);
  const double s = std::sin(yaw);
  const double c = std::cos(yaw);
  // Columns: camera x (right), y (down), z (forward) in world coordinates.
  Matrix3 camera_to_world;
  camera_to_world.col(0) = Vector3(-c, 0.0, s);
  camera_to_world.col(1) = Vector3(0.0, -1.0, 0.0);
  camera_to_world.col(2) = Vector3(s, 0.0, c);
  return CameraPose::FromCenter(camera_to_world, position);
}

bool in_view(const World& world, const CameraPose& pose, const Vector3& p) {
  const Vector3 pc = pose.transform(p);
  if (pc.z() < world.config.depth_min || pc.z() > world.config.depth_max) return false;
  const auto uv = project(pose, world.camera, p);
  return uv && uv->x() >= 0.0 && uv->x() < world.config.image_width &&
         uv->y() >= 0.0 && uv->y() < world.config.image_height;
}

}  // namespace

TrajectorySpec circle_trajectory(double radius, int segments_per_loop, int loops,
                                 int frames_per_segment) {
  TrajectorySpec spec;
  spec.frames_per_segment = frames_per_segment;
  const int total = segments_per_loop * loops;
  for (int i = 0; i <= total; ++i) {
    const double phi_deg = 360.0 * i / segments_per_loop;
    const double phi = deg2rad(phi_deg);
    spec.waypoints.push_back(
        {Vector3(radius * std::sin(phi), 0.0, radius * std::cos(phi)), phi_deg + 90.0});
  }
  return spec;
}

PinholeModel WorldConfig::camera() const {
  const double f = 0.5 * image_width / std::tan(0.5 * deg2rad(fov_deg));
  return {f, f, 0.5 * image_width, 0.5 * image_height};
}

void WorldConfig::validate() const {
  auto fail = [](std::string_view field, std::string_view why) {
    throw std::invalid_argument(fmt::format("world.{}: {}", field, why));
  };
  if (point_count < 1) fail("point_count", "must be positive");
  if (features_per_frame < 1) fail("features_per_frame", "must be positive");
  if (point_count < features_per_frame) {
    fail("point_count", "must be at least features_per_frame");
  }
  if (keyframe_interval < 1) fail("keyframe_interval", "must be at least 1");
  if (!(box_half_extent > 0.0)) fail("box_half_extent", "must be positive");
  if (image_width < 1 || image_height < 1) fail("image_width", "image must be non-empty");
  if (!(fov_deg >= 0.0 && fov_deg < 180.0)) fail("fov_deg", "must lie in [0, 180)");
  if (!(depth_min > 0.0 && depth_max > depth_min)) {
    fail("depth_min", "need 0 < depth_min < depth_max");
  }
  if (pixel_noise < 0.0) fail("pixel_noise", "must be non-negative");
  if (map_point_noise < 0.0) fail("map_point_noise", "must be non-negative");
  if (epsilon_min < 0 || epsilon_max < epsilon_min) {
    fail("epsilon_min", "need 0 <= epsilon_min <= epsilon_max");
  }
  if (perturbation_model == PerturbationModel::kDistinctPositions &&
      epsilon_max > BinaryDescriptor::kBits) {
    fail("epsilon_max", "exceeds descriptor width");
  }
  if (trajectory.waypoints.empty()) fail("trajectory.waypoints", "must not be empty");
  if (trajectory.frames_per_segment < 1) {
    fail("trajectory.frames_per_segment", "must be at least 1");
  }
}

std::vector<PointId> World::visible(int frame) const {
  std::vector<PointId> ids;
  const CameraPose& pose = trajectory.at(frame);
  for (const auto& p : points) {
    if (in_view(*this, pose, p.position)) ids.push_back(p.id);
  }
  return ids;
}

World generate_world(const WorldConfig& config) {
  config.validate();
  World world;
  world.config = config;
  if (config.fov_deg <= 0.0) {
    throw InfeasibleWorld("field of view of 0 degrees sees no points");
  }
  world.camera = config.camera();

  Rng rng(derive_seed(config.seed, kPointStream));
  std::uniform_real_distribution<double> coord(-config.box_half_extent,
                                               config.box_half_extent);
  world.points.reserve(config.point_count);
  for (int i = 0; i < config.point_count; ++i) {
    WorldPoint p;
    p.id = static_cast<PointId>(i);
    p.position = Vector3(coord(rng), coord(rng), coord(rng));
    p.descriptor = random_descriptor(rng);
    world.points.push_back(p);
  }

  const auto& wps = config.trajectory.waypoints;
  const int per = config.trajectory.frames_per_segment;
  for (std::size_t s = 0; s + 1 < wps.size(); ++s) {
    for (int k = 0; k < per; ++k) {
      const double a = static_cast<double>(k) / per;
      const Vector3 pos = (1.0 - a) * wps[s].position + a * wps[s + 1].position;
      const double yaw = (1.0 - a) * wps[s].yaw_deg + a * wps[s + 1].yaw_deg;
      world.trajectory.push_back(pose_from_waypoint(pos, yaw));
    }
  }
  world.trajectory.push_back(pose_from_waypoint(wps.back().position, wps.back().yaw_deg));

  for (int f = 0; f < world.frame_count(); ++f) {
    const auto n = world.visible(f).size();
    if (n < static_cast<std::size_t>(config.features_per_frame)) {
      throw InfeasibleWorld(fmt::format("frame {} sees {} points, fewer than {}", f,
                                        n, config.features_per_frame));
    }
  }
  return world;
}

std::vector<Observation> observe(const World& world, int frame) {
  const auto& cfg = world.config;
  Rng rng(derive_seed(derive_seed(cfg.seed, kObserveStream), frame));
  std::vector<PointId> visible = world.visible(frame);
  std::vector<PointId> chosen;
  chosen.reserve(cfg.features_per_frame);
  std::sample(visible.begin(), visible.end(), std::back_inserter(chosen),
              cfg.features_per_frame, rng);

  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> flips(cfg.epsilon_min, cfg.epsilon_max);
  const CameraPose& pose = world.trajectory[frame];
  std::vector<Observation> out;
  out.reserve(chosen.size());
  for (PointId id : chosen) {
    const auto& point = world.points[id];
    Observation obs;
    obs.truth_id = id;
    obs.measurement = *project(pose, world.camera, point.position);
    if (cfg.pixel_noise > 0.0) {
      obs.measurement += cfg.pixel_noise * Vector2(noise(rng), noise(rng));
      // A detector cannot report pixels outside the image.
      obs.measurement.x() =
          std::clamp(obs.measurement.x(), 0.0, std::nextafter(cfg.image_width, 0.0));
      obs.measurement.y() =
          std::clamp(obs.measurement.y(), 0.0, std::nextafter(cfg.image_height, 0.0));
    }
    obs.descriptor =
        perturb(point.descriptor, {flips(rng), cfg.perturbation_model}, rng);
    out.push_back(obs);
  }
  return out;
}

AssociationResult associate(std::span<const Observation> observations,
                            std::span<const MapPointRecord> candidates,
                            const AssociationConfig& config, bool score_truth) {
  AssociationResult result;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    int best = BinaryDescriptor::kBits + 1;
    int second = BinaryDescriptor::kBits + 1;
    std::size_t best_index = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const int d = hamming_distance(obs.descriptor, candidates[c].descriptor);
      if (d < best) {
        second = best;
        best = d;
        best_index = c;
      } else if (d < second) {
        second = d;
      }
    }
    result.hamming_comparisons += static_cast<std::int64_t>(candidates.size());
    if (best_index == candidates.size() || best > config.hamming_threshold) continue;
    if (candidates.size() > 1 && !(best < config.ratio * second)) continue;
    AssociatedMatch m;
    m.observation = static_cast<int>(i);
    m.point_id = candidates[best_index].point_id;
    m.distance = best;
    if (score_truth) {
      m.is_true = m.point_id == obs.truth_id;
      result.true_matches += m.is_true ? 1 : 0;
    }
    result.matches.push_back(m);
  }
  return result;
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kCovisOnly:
      return "CovisOnly";
    case StrategyKind::kMihAll:
      return "MihAll";
    case StrategyKind::kMihSelected:
      return "MihSelected";
    case StrategyKind::kRnd:
      return "Rnd";
    case StrategyKind::kLong:
      return "Long";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  for (auto kind : {StrategyKind::kCovisOnly, StrategyKind::kMihAll,
                    StrategyKind::kMihSelected, StrategyKind::kRnd, StrategyKind::kLong}) {
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument(fmt::format("unknown strategy '{}'", name));
}

SeriesSummary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty series");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  auto rank = [&](double p) {
    const auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    return sorted[std::clamp<std::size_t>(r, 1, n) - 1];
  };
  SeriesSummary s;
  s.count = n;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(n);
  s.q1 = rank(0.25);
  s.median = rank(0.5);
  s.q3 = rank(0.75);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

namespace {

class Tracker {
 public:
  Tracker(const World& world, const StrategySpec& strategy, const PipelineConfig& config)
      : world_(world),
        strategy_(strategy),
        config_(config),
        mih_(config.mih),
        uses_mih_(strategy.kind == StrategyKind::kMihAll ||
                  strategy.kind == StrategyKind::kMihSelected),
        subset_(mih_.all_tables()),
        map_noise_rng_(derive_seed(world.config.seed, kMapNoiseStream)) {
    const double sigma = world.config.pixel_noise;
    information_ = sigma > 0.0 ? Matrix2(Matrix2::Identity() / (sigma * sigma))
                               : Matrix2(Matrix2::Identity());
    if ((strategy.kind == StrategyKind::kRnd || strategy.kind == StrategyKind::kLong) &&
        strategy.budget < 1) {
      throw std::invalid_argument("Rnd and Long strategies need a positive budget");
    }
  }

  RunResult run() {
    RunResult result;
    for (int f = 0; f < world_.frame_count(); ++f) {
      result.frames.push_back(f == 0 ? bootstrap(result.selection_trace)
                                     : track(f, result.selection_trace));
      result.estimates.push_back(pose_);
    }
    result.summary = summarize_run(result.frames, to_string(strategy_.kind),
                                   world_.config.seed, strategy_.budget);
    return result;
  }

 private:
  FrameMetrics bootstrap(std::string& trace) {
    FrameMetrics metrics;
    metrics.bootstrap = true;
    metrics.keyframe = true;
    metrics.match_age_histogram.assign(config_.age_histogram_bins, 0);
    pose_ = world_.trajectory[0];
    const auto obs = observe(world_, 0);
    map_keyframe(0, obs);
    // Pick the first subset from the bootstrap keyframe itself so that no
    // tracked frame runs on the full index.
    if (strategy_.kind == StrategyKind::kMihSelected) {
      std::vector<BinaryDescriptor> descriptors;
      descriptors.reserve(obs.size());
      for (const auto& o : obs) descriptors.push_back(o.descriptor);
      const auto covisible = graph_.covisible_set(last_keyframe_, config_.min_shared);
      metrics.selection_lookups = reselect(0, obs, descriptors, covisible, trace);
    }
    metrics.selected_tables = static_cast<int>(subset_.size());
    return metrics;
  }

  std::vector<MapPointRecord> records(std::span<const PointId> ids) const {
    std::vector<MapPointRecord> out;
    out.reserve(ids.size());
    for (PointId id : ids) out.push_back(map_.at(id));
    return out;
  }



  std::vector<PointId> downsample(std::vector<PointId> ids, int frame) const {
    const auto budget = static_cast<std::size_t>(strategy_.budget);
    if (ids.size() <= budget) return ids;
    if (strategy_.kind == StrategyKind::kRnd) {
      Rng rng(derive_seed(derive_seed(world_.config.seed, kSamplingStream), frame));
      std::vector<PointId> out;
      std::sample(ids.begin(), ids.end(), std::back_inserter(out), budget, rng);
      return out;
    }
    // Long: oldest first sighting first.
    std::stable_sort(ids.begin(), ids.end(), [&](PointId a, PointId b) {
      return track_length(map_.at(a), frame) > track_length(map_.at(b), frame);
    });
    ids.resize(budget);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  std::vector<FeatureMatch> to_feature_matches(std::span<const Observation> obs,
                                               std::span<const AssociatedMatch> matches) const {
    std::vector<FeatureMatch> out;
    out.reserve(matches.size());
    for (const auto& m : matches) {
      FeatureMatch fm;
      fm.point_id = m.point_id;
      fm.world_point = map_.at(m.point_id).position;
      fm.measurement = obs[m.observation].measurement;
      fm.residual_information = information_;
      out.push_back(fm);
    }
    return out;
  }

  FrameMetrics track(int frame, std::string& trace) {
    FrameMetrics metrics;
    metrics.frame_index = frame;
    metrics.keyframe = frame % world_.config.keyframe_interval == 0;
    metrics.match_age_histogram.assign(config_.age_histogram_bins, 0);

    const auto obs = observe(world_, frame);
    std::vector<BinaryDescriptor> descriptors;
    descriptors.reserve(obs.size());
    for (const auto& o : obs) descriptors.push_back(o.descriptor);

    const auto covisible = graph_.covisible_set(last_keyframe_, config_.min_shared);
    metrics.covisible_size = static_cast<int>(covisible.size());

    std::vector<PointId> candidates;
    switch (strategy_.kind) {
      case StrategyKind::kCovisOnly:
        candidates = covisible;
        break;
      case StrategyKind::kMihAll:
      case StrategyKind::kMihSelected: {
        const auto appearance = mih_.batch_query(descriptors, subset_);
        metrics.appearance_size = static_cast<int>(appearance.ids.size());
        metrics.table_lookups =
            static_cast<std::int64_t>(descriptors.size() * subset_.size());
        candidates = local_map(appearance.ids, covisible);
        break;
      }
      case StrategyKind::kRnd:
      case StrategyKind::kLong:
        candidates = downsample(covisible, frame);
        break;
    }
    metrics.local_map_size = static_cast<int>(candidates.size());
    metrics.selected_tables = uses_mih_ ? static_cast<int>(subset_.size()) : 0;

    const auto candidate_records = records(candidates);
    const auto association =
        associate(obs, candidate_records, config_.association, config_.score_truth);
    metrics.hamming_comparisons = association.hamming_comparisons;
    metrics.matches = static_cast<int>(association.matches.size());

    const auto feature_matches = to_feature_matches(obs, association.matches);
    if (metrics.matches < config_.track_loss_threshold) {
      metrics.track_lost = true;
    } else {
      const auto refined = gauss_newton_refine(pose_, world_.camera,
                                               std::span<const FeatureMatch>(feature_matches));
      if (refined.ok()) {
        pose_ = refined.pose;
      } else {
        metrics.track_lost = true;
      }
    }

    const int bin_width = world_.config.keyframe_interval;
    for (const auto& m : association.matches) {
      const int age = track_length(map_.at(m.point_id), frame);
      const int bin = std::min(age / bin_width, config_.age_histogram_bins - 1);
      ++metrics.match_age_histogram[bin];
    }

    if (config_.score_truth) {
      metrics.true_matches_found = association.true_matches;
      for (const auto& o : obs) {
        if (map_.count(o.truth_id)) ++metrics.true_matches_available;
      }
      metrics.pose_error_rot = rotation_error(pose_, world_.trajectory[frame]);
      metrics.pose_error_trans = translation_error(pose_, world_.trajectory[frame]);
    }

    if (metrics.keyframe) {
      if (strategy_.kind == StrategyKind::kMihSelected) {
        metrics.selection_lookups = reselect(frame, obs, descriptors, covisible, trace);
      }
      map_keyframe(frame, obs);
    }
    return metrics;
  }

  // Chooses the table subset for the frames up to the next keyframe from the
  // matches the full index would yield on this frame. Matches are kept if
  // they are true (or, optionally, consistent with the refined pose).
  std::int64_t reselect(int frame, std::span<const Observation> obs,
                        std::span<const BinaryDescriptor> descriptors,
                        std::span<const PointId> covisible, std::string& trace) {
    const auto all = mih_.all_tables();
    const auto appearance = mih_.batch_query(descriptors, all);
    const auto full_map = local_map(appearance.ids, covisible);
    const auto association = associate(obs, records(full_map), config_.association,
                                       /*score_truth=*/false);
    const double gate = config_.verification_chi2;
    std::vector<std::vector<FeatureMatch>> per_table(mih_.table_count());
    for (const auto& m : association.matches) {
      FeatureMatch fm;
      fm.point_id = m.point_id;
      fm.world_point = map_.at(m.point_id).position;
      fm.measurement = obs[m.observation].measurement;
      fm.residual_information = information_;
      const auto uv = project(pose_, world_.camera, fm.world_point);
      if (!uv) continue;
      const Vector2 r = *uv - fm.measurement;
      if (config_.verify_with_truth) {
        if (obs[m.observation].truth_id != m.point_id) continue;
      } else if (r.dot(fm.residual_information * r) > gate) {
        continue;
      }
      const auto& per_obs = appearance.per_descriptor[m.observation].per_table_ids;
      for (int t = 0; t < mih_.table_count(); ++t) {
        if (std::find(per_obs[t].begin(), per_obs[t].end(), m.point_id) !=
            per_obs[t].end()) {
          per_table[t].push_back(fm);
        }
      }
    }
    const auto sets = TableMatchSets::build(per_table, pose_, world_.camera);
    selection_ = refresh_policy(selection_, true, sets, strategy_.selection);
    // Nothing to choose from: keep the previous subset.
    if (!selection_.selected.empty()) {
      subset_ = selection_.selected;
      std::sort(subset_.begin(), subset_.end());
    }
    trace += selection_trace_rows(frame, selection_);
    return static_cast<std::int64_t>(descriptors.size() * all.size());
  }

  // Mapping side. Keyframe observations are attached to map points through
  // the simulator's ground-truth association, so the map, the co-visibility
  // graph and the index evolve identically under every strategy. Nothing
  // from the tracking side (matches, pose) enters here.
  void map_keyframe(int frame, std::span<const Observation> obs) {
    std::normal_distribution<double> noise(0.0, world_.config.map_point_noise);
    std::vector<PointId> observed;
    observed.reserve(obs.size());
    for (const auto& o : obs) {
      const PointId id = o.truth_id;
      auto it = map_.find(id);
      if (it != map_.end()) {
        it->second.descriptor = o.descriptor;
        ++it->second.observation_count;
      } else {
        MapPointRecord rec;
        rec.point_id = id;
        rec.position = world_.points[id].position;
        if (world_.config.map_point_noise > 0.0) {
          rec.position += Vector3(noise(map_noise_rng_), noise(map_noise_rng_),
                                  noise(map_noise_rng_));
        }
        rec.descriptor = o.descriptor;
        rec.first_seen_frame = frame;
        map_.emplace(id, rec);
      }
      observed.push_back(id);
    }
    if (observed.empty()) return;
    std::sort(observed.begin(), observed.end());
    observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
    graph_.add_keyframe({frame, observed, frame});
    last_keyframe_ = frame;

    if (!uses_mih_) return;
    // Refresh the whole co-visible neighborhood; points observed now go last
    // so they sit at the front of their buckets.
    const auto covisible = graph_.covisible_set(frame, config_.min_shared);
    std::vector<PointId> others;
    std::set_difference(covisible.begin(), covisible.end(), observed.begin(),
                        observed.end(), std::back_inserter(others));
    for (PointId id : others) mih_.insert(id, map_.at(id).descriptor);
    for (PointId id : observed) mih_.insert(id, map_.at(id).descriptor);
  }

  const World& world_;
  const StrategySpec& strategy_;
  const PipelineConfig& config_;
  MihIndex mih_;
  bool uses_mih_;
  std::vector<int> subset_;
  SelectionResult selection_;
  CovisibilityGraph graph_;
  KeyframeId last_keyframe_ = 0;
  // Keyed by world point id.
  std::unordered_map<PointId, MapPointRecord> map_;
  CameraPose pose_;
  Matrix2 information_;
  Rng map_noise_rng_;
};

}  // namespace

RunResult run_pipeline(const World& world, const StrategySpec& strategy,
                       const PipelineConfig& config) {
  Tracker tracker(world, strategy, config);
  return tracker.run();
}

RunSummary summarize_run(std::span<const FrameMetrics> frames,
                         std::string_view strategy, std::uint64_t seed, int budget) {
  RunSummary s;
  s.strategy = std::string(strategy);
  s.seed = seed;
  s.budget = budget;
  std::vector<double> size, lookups, hamming, recall, trans, rot;
  double selected = 0.0;
  for (const auto& f : frames) {
    s.selection_lookups += f.selection_lookups;
    if (f.bootstrap) continue;
    ++s.frames;
    if (f.track_lost) ++s.track_lost_frames;
    size.push_back(f.local_map_size);
    lookups.push_back(static_cast<double>(f.table_lookups));
    hamming.push_back(static_cast<double>(f.hamming_comparisons));
    if (f.true_matches_available > 0) {
      recall.push_back(static_cast<double>(f.true_matches_found) /
                       f.true_matches_available);
    }
    trans.push_back(f.pose_error_trans);
    rot.push_back(f.pose_error_rot);
    selected += f.selected_tables;
    if (s.match_age_histogram.size() < f.match_age_histogram.size()) {
      s.match_age_histogram.resize(f.match_age_histogram.size(), 0);
    }
    for (std::size_t b = 0; b < f.match_age_histogram.size(); ++b) {
      s.match_age_histogram[b] += f.match_age_histogram[b];
    }
  }
  if (s.frames == 0) return s;
  s.local_map_size = summarize(size);
  s.table_lookups = summarize(lookups);
  s.hamming_comparisons = summarize(hamming);
  if (!recall.empty()) s.recall = summarize(recall);
  s.pose_error_trans = summarize(trans);
  s.pose_error_rot = summarize(rot);
  s.mean_selected_tables = selected / s.frames;
  return s;
}

std::string metrics_to_csv(std::span<const FrameMetrics> frames) {
  std::string out =
      "frame_index,keyframe,bootstrap,covisible_size,appearance_size,local_map_size,"
      "table_lookups,selection_lookups,hamming_comparisons,matches,true_matches_found,"
      "true_matches_available,pose_error_rot,pose_error_trans,track_lost,"
      "selected_tables,match_age_histogram\n";
  for (const auto& f : frames) {
    std::string hist;
    for (std::size_t b = 0; b < f.match_age_histogram.size(); ++b) {
      if (b) hist += ';';
      hist += fmt::format("{}", f.match_age_histogram[b]);
    }
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{:.9e},{:.9e},{},{},{}\n",
                       f.frame_index, int(f.keyframe), int(f.bootstrap),
                       f.covisible_size, f.appearance_size, f.local_map_size,
                       f.table_lookups, f.selection_lookups, f.hamming_comparisons,
                       f.matches, f.true_matches_found, f.true_matches_available,
                       f.pose_error_rot, f.pose_error_trans, int(f.track_lost),
                       f.selected_tables, hist);
  }
  return out;
}

}  // namespace mihmap
