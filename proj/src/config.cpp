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

#include "mihmap/config.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mihmap/io.hpp"

namespace mihmap {

namespace {

using nlohmann::json;

// Reads fields from one JSON object and rejects anything it did not read.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = obj_.find(std::string(key));
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(std::string_view key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError(field(key), "expected a boolean");
        out = v->get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
        if (std::is_unsigned_v<T> && v->is_number_integer() && !v->is_number_unsigned()) {
          throw ConfigError(field(key), "expected a non-negative integer");
        }
        out = v->get<T>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError(field(key), "expected a number");
        out = v->get<T>();
      } else {
        out = v->get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_world(Reader& r, WorldConfig& w) {
  r.get("point_count", w.point_count);
  r.get("box_half_extent", w.box_half_extent);
  r.get("image_width", w.image_width);
  r.get("image_height", w.image_height);
  r.get("fov_deg", w.fov_deg);
  r.get("depth_min", w.depth_min);
  r.get("depth_max", w.depth_max);
  r.get("pixel_noise", w.pixel_noise);
  r.get("map_point_noise", w.map_point_noise);
  if (const json* v = r.find("perturbation_model")) {
    if (!v->is_string()) throw ConfigError(r.field("perturbation_model"), "expected a string");
    try {
      w.perturbation_model = parse_perturbation_model(v->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r.field("perturbation_model"), e.what());
    }
  }
  r.get("epsilon_min", w.epsilon_min);
  r.get("epsilon_max", w.epsilon_max);
  r.get("features_per_frame", w.features_per_frame);
  r.get("keyframe_interval", w.keyframe_interval);
}

void read_trajectory(Reader& r, TrajectoryConfig& t) {
  r.get("radius", t.radius);
  r.get("segments_per_loop", t.segments_per_loop);
  r.get("loops", t.loops);
  r.get("frames_per_segment", t.frames_per_segment);
  if (const json* v = r.find("waypoints")) {
    const std::string f = r.field("waypoints");
    if (!v->is_array()) throw ConfigError(f, "expected an array of [x, y, z, yaw_deg]");
    t.waypoints.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& w = (*v)[i];
      if (!w.is_array() || w.size() != 4) {
        throw ConfigError(fmt::format("{}[{}]", f, i), "expected [x, y, z, yaw_deg]");
      }
      Waypoint wp;
      for (int k = 0; k < 4; ++k) {
        if (!w[k].is_number()) {
          throw ConfigError(fmt::format("{}[{}]", f, i), "expected numbers");
        }
      }
      wp.position = Vector3(w[0].get<double>(), w[1].get<double>(), w[2].get<double>());
      wp.yaw_deg = w[3].get<double>();
      t.waypoints.push_back(wp);
    }
  }
}

void read_pipeline(Reader& r, PipelineConfig& p) {
  r.get("table_count", p.mih.table_count);
  r.get("bucket_capacity", p.mih.bucket_capacity);
  r.get("hamming_threshold", p.association.hamming_threshold);
  r.get("ratio", p.association.ratio);
  r.get("min_shared", p.min_shared);
  r.get("track_loss_threshold", p.track_loss_threshold);
  r.get("verification_chi2", p.verification_chi2);
  r.get("verify_with_truth", p.verify_with_truth);
  r.get("age_histogram_bins", p.age_histogram_bins);
}

void read_selection(Reader& r, SelectionConfig& s) {
  r.get("k", s.k);
  if (const json* v = r.find("d_thres")) {
    if (v->is_null() || (v->is_string() && v->get<std::string>() == "inf")) {
      s.d_thres = std::numeric_limits<double>::infinity();
    } else if (v->is_number()) {
      s.d_thres = v->get<double>();
    } else {
      throw ConfigError(r.field("d_thres"), "expected a number, null or \"inf\"");
    }
  }
  r.get("damping", s.damping);
}

template <typename F>
void section(Reader& root, std::string_view key, F&& read) {
  if (const json* v = root.find(key)) {
    Reader r(*v, std::string(key));
    read(r);
    r.finish();
  }
}

json waypoints_json(const std::vector<Waypoint>& wps) {
  json arr = json::array();
  for (const auto& w : wps) {
    arr.push_back({w.position.x(), w.position.y(), w.position.z(), w.yaw_deg});
  }
  return arr;
}

}  // namespace

WorldConfig SimulationConfig::world_for_seed(std::uint64_t seed) const {
  WorldConfig w = world;
  w.seed = seed;
  if (trajectory.waypoints.empty()) {
    w.trajectory = circle_trajectory(trajectory.radius, trajectory.segments_per_loop,
                                     trajectory.loops, trajectory.frames_per_segment);
  } else {
    w.trajectory.waypoints = trajectory.waypoints;
    w.trajectory.frames_per_segment = trajectory.frames_per_segment;
  }
  return w;
}

void SimulationConfig::validate() const {
  if (trajectory.waypoints.empty()) {
    if (!(trajectory.radius > 0.0)) throw ConfigError("trajectory.radius", "must be positive");
    if (trajectory.segments_per_loop < 1) {
      throw ConfigError("trajectory.segments_per_loop", "must be at least 1");
    }
    if (trajectory.loops < 1) throw ConfigError("trajectory.loops", "must be at least 1");
  }
  if (trajectory.frames_per_segment < 1) {
    throw ConfigError("trajectory.frames_per_segment", "must be at least 1");
  }
  try {
    world_for_seed(seeds.empty() ? 1 : seeds.front()).validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ConfigError(msg.substr(0, colon),
                      colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
  if (pipeline.mih.bucket_capacity < 1) {
    throw ConfigError("pipeline.bucket_capacity", "must be at least 1");
  }
  try {
    pipeline.mih.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("pipeline.table_count", e.what());
  }
  if (pipeline.association.hamming_threshold < 0) {
    throw ConfigError("pipeline.hamming_threshold", "must be non-negative");
  }
  if (!(pipeline.association.ratio > 0.0 && pipeline.association.ratio <= 1.0)) {
    throw ConfigError("pipeline.ratio", "must lie in (0, 1]");
  }
  if (pipeline.min_shared < 1) throw ConfigError("pipeline.min_shared", "must be at least 1");
  if (pipeline.track_loss_threshold < 0) {
    throw ConfigError("pipeline.track_loss_threshold", "must be non-negative");
  }
  if (!(pipeline.verification_chi2 > 0.0)) {
    throw ConfigError("pipeline.verification_chi2", "must be positive");
  }
  if (pipeline.age_histogram_bins < 1) {
    throw ConfigError("pipeline.age_histogram_bins", "must be at least 1");
  }
  if (selection.k < 1) throw ConfigError("selection.k", "must be at least 1");
  if (std::isnan(selection.d_thres)) throw ConfigError("selection.d_thres", "must not be NaN");
  if (!(selection.damping > 0.0)) throw ConfigError("selection.damping", "must be positive");
  if (strategies.empty()) throw ConfigError("strategies", "must not be empty");
  if (seeds.empty()) throw ConfigError("seeds", "must not be empty");
}

SimulationConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", e.what());
  }
  SimulationConfig cfg;
  Reader root(doc, "");
  section(root, "world", [&](Reader& r) { read_world(r, cfg.world); });
  section(root, "trajectory", [&](Reader& r) { read_trajectory(r, cfg.trajectory); });
  section(root, "pipeline", [&](Reader& r) { read_pipeline(r, cfg.pipeline); });
  section(root, "selection", [&](Reader& r) { read_selection(r, cfg.selection); });
  if (const json* v = root.find("strategies")) {
    if (!v->is_array()) throw ConfigError("strategies", "expected an array of names");
    cfg.strategies.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string f = fmt::format("strategies[{}]", i);
      if (!(*v)[i].is_string()) throw ConfigError(f, "expected a string");
      try {
        cfg.strategies.push_back(parse_strategy((*v)[i].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(f, e.what());
      }
    }
  }
  if (const json* v = root.find("seeds")) {
    if (!v->is_array()) throw ConfigError("seeds", "expected an array of integers");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_unsigned()) {
        throw ConfigError(fmt::format("seeds[{}]", i), "expected a non-negative integer");
      }
      cfg.seeds.push_back((*v)[i].get<std::uint64_t>());
    }
  }
  root.finish();
  cfg.validate();
  return cfg;
}

SimulationConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(text);
}

std::string config_to_json(const SimulationConfig& c) {
  json doc;
  const auto& w = c.world;
  doc["world"] = {{"point_count", w.point_count},
                  {"box_half_extent", w.box_half_extent},
                  {"image_width", w.image_width},
                  {"image_height", w.image_height},
                  {"fov_deg", w.fov_deg},
                  {"depth_min", w.depth_min},
                  {"depth_max", w.depth_max},
                  {"pixel_noise", w.pixel_noise},
                  {"map_point_noise", w.map_point_noise},
                  {"perturbation_model", std::string(to_string(w.perturbation_model))},
                  {"epsilon_min", w.epsilon_min},
                  {"epsilon_max", w.epsilon_max},
                  {"features_per_frame", w.features_per_frame},
                  {"keyframe_interval", w.keyframe_interval}};
  const auto& t = c.trajectory;
  doc["trajectory"] = {{"radius", t.radius},
                       {"segments_per_loop", t.segments_per_loop},
                       {"loops", t.loops},
                       {"frames_per_segment", t.frames_per_segment}};
  if (!t.waypoints.empty()) doc["trajectory"]["waypoints"] = waypoints_json(t.waypoints);
  const auto& p = c.pipeline;
  doc["pipeline"] = {{"table_count", p.mih.table_count},
                     {"bucket_capacity", p.mih.bucket_capacity},
                     {"hamming_threshold", p.association.hamming_threshold},
                     {"ratio", p.association.ratio},
                     {"min_shared", p.min_shared},
                     {"track_loss_threshold", p.track_loss_threshold},
                     {"verification_chi2", p.verification_chi2},
                     {"verify_with_truth", p.verify_with_truth},
                     {"age_histogram_bins", p.age_histogram_bins}};
  doc["selection"] = {{"k", c.selection.k}, {"damping", c.selection.damping}};
  if (std::isinf(c.selection.d_thres)) {
    doc["selection"]["d_thres"] = nullptr;
  } else {
    doc["selection"]["d_thres"] = c.selection.d_thres;
  }
  json names = json::array();
  for (auto s : c.strategies) names.push_back(std::string(to_string(s)));
  doc["strategies"] = names;
  doc["seeds"] = c.seeds;
  return doc.dump(2) + "\n";
}

std::string config_hash(const SimulationConfig& config) {
  return hex64(fnv1a64(config_to_json(config)));
}

}  // namespace mihmap
