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

#include "mihmap/oracles.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace mihmap {

namespace {

int bit_distance(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  int d = 0;
  for (int i = 0; i < BinaryDescriptor::kBits; ++i) d += a.bit(i) != b.bit(i);
  return d;
}

}  // namespace

AssociationResult associate_oracle(std::span<const Observation> observations,
                                   std::span<const MapPointRecord> candidates,
                                   const AssociationConfig& config, bool score_truth) {
  AssociationResult result;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    std::vector<std::pair<int, std::size_t>> table;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      table.emplace_back(bit_distance(observations[i].descriptor, candidates[c].descriptor), c);
    }
    result.hamming_comparisons += static_cast<std::int64_t>(candidates.size());
    if (table.empty()) continue;
    std::sort(table.begin(), table.end());
    const int best = table[0].first;
    if (best > config.hamming_threshold) continue;
    if (table.size() > 1 && !(best < config.ratio * table[1].first)) continue;
    AssociatedMatch m;
    m.observation = static_cast<int>(i);
    m.point_id = candidates[table[0].second].point_id;
    m.distance = best;
    if (score_truth) {
      m.is_true = m.point_id == observations[i].truth_id;
      if (m.is_true) ++result.true_matches;
    }
    result.matches.push_back(m);
  }
  return result;
}

}  // namespace mihmap
