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

#include "mihmap/covisibility.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

#include <fmt/format.h>

namespace mihmap {

std::vector<CovisibilityEdge> CovisibilityGraph::add_keyframe(KeyframeRecord record) {
  if (keyframes_.count(record.keyframe_id)) {
    throw std::invalid_argument(
        fmt::format("keyframe {} already exists", record.keyframe_id));
  }
  auto& ids = record.observed_point_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) {
    throw std::invalid_argument(
        fmt::format("keyframe {} observes no points", record.keyframe_id));
  }

  const KeyframeId id = record.keyframe_id;
  std::map<KeyframeId, int> shared;
  for (PointId p : ids) {
    auto& observers = point_to_keyframes_[p];
    for (KeyframeId other : observers) ++shared[other];
    observers.insert(std::upper_bound(observers.begin(), observers.end(), id), id);
  }

  std::vector<CovisibilityEdge> created;
  auto& row = adjacency_[id];
  for (const auto& [other, weight] : shared) {
    row[other] = weight;
    adjacency_[other][id] = weight;
    created.push_back({std::min(id, other), std::max(id, other), weight});
  }
  keyframes_.emplace(id, std::move(record));
  return created;
}

std::vector<PointId> CovisibilityGraph::covisible_set(KeyframeId reference,
                                                      int min_shared) const {
  const auto& ref = keyframe(reference);
  std::vector<PointId> out = ref.observed_point_ids;
  auto adj = adjacency_.find(reference);
  if (adj != adjacency_.end()) {
    for (const auto& [other, weight] : adj->second) {
      if (weight < min_shared) continue;
      const auto& pts = keyframes_.at(other).observed_point_ids;
      out.insert(out.end(), pts.begin(), pts.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const KeyframeRecord& CovisibilityGraph::keyframe(KeyframeId id) const {
  auto it = keyframes_.find(id);
  if (it == keyframes_.end()) {
    throw std::out_of_range(fmt::format("unknown keyframe {}", id));
  }
  return it->second;
}

int CovisibilityGraph::edge_weight(KeyframeId a, KeyframeId b) const {
  auto row = adjacency_.find(a);
  if (row == adjacency_.end()) return 0;
  auto it = row->second.find(b);
  return it == row->second.end() ? 0 : it->second;
}

std::vector<CovisibilityEdge> CovisibilityGraph::edges() const {
  std::vector<CovisibilityEdge> out;
  for (const auto& [a, row] : adjacency_) {
    for (const auto& [b, weight] : row) {
      if (a < b) out.push_back({a, b, weight});
    }
  }
  return out;
}

std::span<const KeyframeId> CovisibilityGraph::observers(PointId id) const {
  auto it = point_to_keyframes_.find(id);
  if (it == point_to_keyframes_.end()) return {};
  return it->second;
}

bool CovisibilityGraph::audit() const {
  std::unordered_map<PointId, std::vector<KeyframeId>> rebuilt;
  for (const auto& [id, record] : keyframes_) {
    for (PointId p : record.observed_point_ids) rebuilt[p].push_back(id);
  }
  if (rebuilt != point_to_keyframes_) return false;
  // Edge weights must equal the observation overlap.
  for (const auto& [a, row] : adjacency_) {
    for (const auto& [b, weight] : row) {
      const auto& pa = keyframes_.at(a).observed_point_ids;
      const auto& pb = keyframes_.at(b).observed_point_ids;
      std::vector<PointId> common;
      std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(),
                            std::back_inserter(common));
      if (static_cast<int>(common.size()) != weight || weight == 0) return false;
      if (edge_weight(b, a) != weight) return false;
    }
  }
  return true;
}

std::string CovisibilityGraph::edges_to_csv() const {
  std::string out = "kf_a,kf_b,weight\n";
  for (const auto& e : edges()) out += fmt::format("{},{},{}\n", e.a, e.b, e.weight);
  return out;
}

std::vector<PointId> local_map(std::span<const PointId> appearance_set,
                               std::span<const PointId> covisible_set) {
  std::vector<PointId> out;
  std::set_intersection(appearance_set.begin(), appearance_set.end(),
                        covisible_set.begin(), covisible_set.end(),
                        std::back_inserter(out));
  return out;
}

int track_length(const MapPointRecord& point, int current_frame) {
  if (current_frame < point.first_seen_frame) {
    throw std::invalid_argument(
        fmt::format("current frame {} precedes first sighting {} of point {}",
                    current_frame, point.first_seen_frame, point.point_id));
  }
  return current_frame - point.first_seen_frame;
}

}  // namespace mihmap
