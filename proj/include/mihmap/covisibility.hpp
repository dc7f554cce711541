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
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "mihmap/descriptor.hpp"
#include "mihmap/mih_index.hpp"

namespace mihmap {

using KeyframeId = std::int64_t;

struct KeyframeRecord {
  KeyframeId keyframe_id = 0;
  /// Sorted on insertion into the graph; must not be empty.
  std::vector<PointId> observed_point_ids;
  int frame_index = 0;
};

struct MapPointRecord {
  PointId point_id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  BinaryDescriptor descriptor;
  int first_seen_frame = 0;
  int observation_count = 1;
};

struct CovisibilityEdge {
  KeyframeId a = 0;
  KeyframeId b = 0;
  int weight = 0;

  friend bool operator==(const CovisibilityEdge&, const CovisibilityEdge&) = default;
};

/// Keyframe to map-point observation graph. Edge weight between two
/// keyframes is the number of points both observe; zero-weight edges are not
/// stored.
class CovisibilityGraph {
 public:
  /// Returns the edges created to existing keyframes, ordered by neighbor id.
  /// Throws std::invalid_argument on a duplicate id or an empty observation
  /// set.
  std::vector<CovisibilityEdge> add_keyframe(KeyframeRecord record);

  /// Points observed by the reference keyframe and by every neighbor whose
  /// edge weight is at least min_shared. Sorted. Throws std::out_of_range for
  /// an unknown keyframe.
  std::vector<PointId> covisible_set(KeyframeId reference, int min_shared = 1) const;

  bool contains(KeyframeId id) const { return keyframes_.count(id) != 0; }
  const KeyframeRecord& keyframe(KeyframeId id) const;
  std::size_t keyframe_count() const { return keyframes_.size(); }

  int edge_weight(KeyframeId a, KeyframeId b) const;
  /// All edges with a < b, sorted.
  std::vector<CovisibilityEdge> edges() const;

  /// Keyframes observing a point, ascending.
  std::span<const KeyframeId> observers(PointId id) const;

  /// Rebuilds the point-to-keyframe map from the keyframe records and
  /// compares it against the stored one.
  bool audit() const;

  /// CSV edge list: kf_a,kf_b,weight.
  std::string edges_to_csv() const;

 private:
  std::map<KeyframeId, KeyframeRecord> keyframes_;
  std::unordered_map<PointId, std::vector<KeyframeId>> point_to_keyframes_;
  std::map<KeyframeId, std::map<KeyframeId, int>> adjacency_;
};

/// Sorted intersection of two sorted id sets: the local map.
std::vector<PointId> local_map(std::span<const PointId> appearance_set,
                               std::span<const PointId> covisible_set);

/// Frames since the point was first seen. Throws std::invalid_argument when
/// current_frame precedes first_seen_frame.
int track_length(const MapPointRecord& point, int current_frame);

}  // namespace mihmap
