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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mihmap/covisibility.hpp"
#include "mihmap/descriptor.hpp"
#include "mihmap/geometry.hpp"
#include "mihmap/mih_index.hpp"
#include "mihmap/table_selection.hpp"

namespace mihmap {

struct Waypoint {
  Vector3 position = Vector3::Zero();
  /// Heading about the world y axis; 0 looks along +z.
  double yaw_deg = 0.0;
};

/// Piecewise-linear trajectory through waypoints, frames_per_segment frames
/// per leg. The last waypoint contributes the final frame.
struct TrajectorySpec {
  std::vector<Waypoint> waypoints;
  int frames_per_segment = 10;
};

/// Waypoints on a horizontal circle with the camera facing along the
/// direction of travel.
TrajectorySpec circle_trajectory(double radius, int segments_per_loop, int loops,
                                 int frames_per_segment);

struct WorldConfig {
  int point_count = 3000;
  /// Points are uniform in the cube [-h, h]^3.
  double box_half_extent = 10.0;
  int image_width = 640;
  int image_height = 480;
  /// Horizontal field of view.
  double fov_deg = 90.0;
  double depth_min = 0.3;
  double depth_max = 25.0;
  /// Gaussian measurement noise in pixels; also sets the residual
  /// information to sigma^-2 I.
  double pixel_noise = 1.0;
  /// Gaussian error on map-point positions at creation, meters.
  double map_point_noise = 0.0;
  TrajectorySpec trajectory = circle_trajectory(3.0, 12, 2, 10);
  PerturbationModel perturbation_model = PerturbationModel::kDistinctPositions;
  /// Each observation flips a uniformly drawn number of bits in this range.
  int epsilon_min = 0;
  int epsilon_max = 50;
  int features_per_frame = 200;
  int keyframe_interval = 5;
  std::uint64_t seed = 1;

  PinholeModel camera() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

class InfeasibleWorld : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorldPoint {
  PointId id = 0;
  Vector3 position = Vector3::Zero();
  BinaryDescriptor descriptor;
};

struct World {
  WorldConfig config;
  PinholeModel camera;
  std::vector<WorldPoint> points;
  std::vector<CameraPose> trajectory;

  int frame_count() const { return static_cast<int>(trajectory.size()); }
  /// Ids of points inside the image and depth range at a frame, ascending.
  std::vector<PointId> visible(int frame) const;
};

/// Deterministic per seed. Throws InfeasibleWorld if some frame sees fewer
/// than features_per_frame points.
World generate_world(const WorldConfig& config);

struct Observation {
  Vector2 measurement = Vector2::Zero();
  BinaryDescriptor descriptor;
  /// Ground truth, for scoring and world bookkeeping only.
  PointId truth_id = 0;
};

/// Up to features_per_frame visible points with pixel noise and perturbed
/// descriptors. Deterministic per (seed, frame).
std::vector<Observation> observe(const World& world, int frame);

struct AssociationConfig {
  int hamming_threshold = 64;
  double ratio = 0.8;
};

struct AssociatedMatch {
  int observation = 0;
  PointId point_id = 0;
  int distance = 0;
  bool is_true = false;

  friend bool operator==(const AssociatedMatch&, const AssociatedMatch&) = default;
};

struct AssociationResult {
  std::vector<AssociatedMatch> matches;
  std::int64_t hamming_comparisons = 0;
  int true_matches = 0;
};

/// Nearest neighbor in Hamming distance for each observation. A match is
/// kept when its distance is within the threshold and, if a second candidate
/// exists, best < ratio * second_best. Truth flags are filled only when
/// score_truth is set; a match is true when the candidate id equals the
/// observation's world id.
AssociationResult associate(std::span<const Observation> observations,
                            std::span<const MapPointRecord> candidates,
                            const AssociationConfig& config, bool score_truth = true);

enum class StrategyKind { kCovisOnly, kMihAll, kMihSelected, kRnd, kLong };

std::string_view to_string(StrategyKind kind);
/// Throws std::invalid_argument for an unknown name.
StrategyKind parse_strategy(std::string_view name);

struct StrategySpec {
  StrategyKind kind = StrategyKind::kMihSelected;
  /// Candidate budget for Rnd and Long.
  int budget = 0;
  SelectionConfig selection;
};

struct PipelineConfig {
  MihConfig mih;
  AssociationConfig association;
  int min_shared = 1;
  int track_loss_threshold = 10;
  /// Reprojection gate, in units of sigma^2, for matches fed to table
  /// selection (chi-square 95% with 2 dof).
  double verification_chi2 = 5.991;
  /// Keep selection matches by ground-truth identity instead of the
  /// reprojection gate.
  bool verify_with_truth = true;
  int age_histogram_bins = 10;
  bool score_truth = true;
};

struct FrameMetrics {
  int frame_index = 0;
  bool keyframe = false;
  bool bootstrap = false;
  int covisible_size = 0;
  int appearance_size = 0;
  int local_map_size = 0;
  std::int64_t table_lookups = 0;
  std::int64_t selection_lookups = 0;
  std::int64_t hamming_comparisons = 0;
  int matches = 0;
  int true_matches_found = 0;
  int true_matches_available = 0;
  double pose_error_rot = 0.0;
  double pose_error_trans = 0.0;
  bool track_lost = false;
  int selected_tables = 0;
  /// Accepted matches by age (frame - first_seen) in bins of
  /// keyframe_interval frames; the last bin collects everything older.
  std::vector<int> match_age_histogram;
};

struct SeriesSummary {
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Mean and nearest-rank quartiles. Throws std::invalid_argument on empty
/// input.
SeriesSummary summarize(std::span<const double> values);

struct RunSummary {
  std::string strategy;
  std::uint64_t seed = 0;
  int frames = 0;
  int track_lost_frames = 0;
  int budget = 0;
  SeriesSummary local_map_size;
  SeriesSummary table_lookups;
  SeriesSummary hamming_comparisons;
  SeriesSummary recall;
  SeriesSummary pose_error_trans;
  SeriesSummary pose_error_rot;
  double mean_selected_tables = 0.0;
  std::int64_t selection_lookups = 0;
  std::vector<std::int64_t> match_age_histogram;
};

struct RunResult {
  std::vector<FrameMetrics> frames;
  std::vector<CameraPose> estimates;
  /// Rows for the selection-trace CSV, without header.
  std::string selection_trace;
  RunSummary summary;
};

/// Tracks every frame of the world with one local-map strategy. Frame 0
/// bootstraps the pose from ground truth. Each frame builds its candidate
/// set, associates, and refines the pose from the previous estimate. At
/// keyframes MihSelected reselects its tables, then the mapping side adds the
/// keyframe to the co-visibility graph and the index. Mapping associates
/// keyframe features to map points by ground truth, so all strategies share
/// one map; map-point ids are world-point ids.
RunResult run_pipeline(const World& world, const StrategySpec& strategy,
                       const PipelineConfig& config);

/// Summary over non-bootstrap frames.
RunSummary summarize_run(std::span<const FrameMetrics> frames,
                         std::string_view strategy, std::uint64_t seed, int budget);

std::string metrics_to_csv(std::span<const FrameMetrics> frames);

}  // namespace mihmap
