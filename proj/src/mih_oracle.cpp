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

#include "mihmap/mih_oracle.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace mihmap {

std::vector<PointId> oracle_query(std::span<const MihDumpRecord> contents,
                                  const BinaryDescriptor& descriptor,
                                  std::span<const int> table_subset,
                                  int table_count) {
  const int width = substring_width(table_count);
  std::vector<char> in_subset(static_cast<std::size_t>(table_count), 0);
  for (int t : table_subset) {
    if (t >= 0 && t < table_count) in_subset[t] = 1;
  }
  // Query address per table, assembled bit by bit rather than through
  // substring_value().
  std::vector<SubstringKey> address(static_cast<std::size_t>(table_count));
  for (int t = 0; t < table_count; ++t) {
    if (!in_subset[t]) continue;
    for (int j = 0; j < width; ++j) {
      if (descriptor.bit(t * width + j)) address[t].words[j / 64] |= 1ULL << (j % 64);
    }
  }
  std::vector<PointId> ids;
  for (const auto& record : contents) {
    if (!in_subset[record.table_index]) continue;
    if (record.bucket_address.words == address[record.table_index].words) {
      ids.push_back(record.point_id);
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

namespace {

std::string bit_address(const BinaryDescriptor& d, int table, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int j = 0; j < width; ++j) s[j] = d.bit(table * width + j) ? '1' : '0';
  return s;
}

SubstringKey key_from_bits(const std::string& bits) {
  SubstringKey key;
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] == '1') key.words[j / 64] |= 1ULL << (j % 64);
  }
  return key;
}

BinaryDescriptor flip_random(BinaryDescriptor d, int flips, Rng& rng) {
  std::uniform_int_distribution<int> pos(0, BinaryDescriptor::kBits - 1);
  for (int i = 0; i < flips; ++i) d.flip(pos(rng));
  return d;
}

// Reference buckets: front of the deque is the most recent id.
struct RefBucket {
  SubstringKey key;
  std::deque<PointId> ids;
};

struct Reference {
  int width;
  int capacity;
  std::vector<std::map<std::string, RefBucket>> tables;
  std::size_t entries = 0;

  RefBucket& bucket(int table, const std::string& bits) {
    auto [it, fresh] = tables[table].try_emplace(bits);
    if (fresh) it->second.key = key_from_bits(bits);
    return it->second;
  }

  std::vector<MihDumpRecord> records() const {
    std::vector<MihDumpRecord> out;
    out.reserve(entries);
    for (int t = 0; t < static_cast<int>(tables.size()); ++t) {
      for (const auto& [bits, b] : tables[t]) {
        for (std::size_t p = 0; p < b.ids.size(); ++p) {
          out.push_back({t, b.key, static_cast<int>(p), b.ids[p]});
        }
      }
    }
    return out;
  }
};

}  // namespace

MihWorkloadReport run_mih_workload(const MihWorkloadConfig& config) {
  MihIndex index(MihConfig{config.table_count, config.bucket_capacity});
  const int width = substring_width(config.table_count);
  Reference ref{width, config.bucket_capacity,
                std::vector<std::map<std::string, RefBucket>>(
                    static_cast<std::size_t>(config.table_count))};
  MihWorkloadReport report;
  Rng rng(config.seed);
  std::vector<BinaryDescriptor> protos;
  for (int i = 0; i < std::max(1, config.prototypes); ++i) protos.push_back(random_descriptor(rng));
  std::map<PointId, BinaryDescriptor> stored;
  std::vector<MihDumpRecord> contents;
  bool dirty = true;
  bool fault_pending = config.inject_fault;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_proto(0, static_cast<int>(protos.size()) - 1);
  std::uniform_int_distribution<PointId> pick_id(0, static_cast<PointId>(config.id_pool - 1));
  std::uniform_int_distribution<int> spread(0, config.prototype_spread);
  std::uniform_int_distribution<int> qflips(0, config.max_query_flips);

  auto fail = [&](int op, std::string what) {
    report.divergence = fmt::format("op {}: {}", op, what);
    return report;
  };

  for (int op = 0; op < config.operations; ++op) {
    const bool query = !stored.empty() && unit(rng) < config.query_fraction;
    if (!query) {
      const PointId id = pick_id(rng);
      BinaryDescriptor d;
      auto it = stored.find(id);
      if (it != stored.end() && unit(rng) < 0.5) {
        d = flip_random(it->second, spread(rng) / 4, rng);
      } else {
        d = flip_random(protos[pick_proto(rng)], spread(rng), rng);
      }
      stored[id] = d;
      const InsertReport got = index.insert(id, d);
      ++report.inserts;
      if (static_cast<int>(got.tables.size()) != config.table_count) {
        return fail(op, fmt::format("insert of {} reported {} tables", id, got.tables.size()));
      }
      for (int t = 0; t < config.table_count; ++t) {
        auto& bucket = ref.bucket(t, bit_address(d, t, width)).ids;
        Bucket::Outcome want = Bucket::Outcome::kInserted;
        std::optional<PointId> evicted;
        auto pos = std::find(bucket.begin(), bucket.end(), id);
        if (pos != bucket.end()) {
          bucket.erase(pos);
          --ref.entries;
          want = Bucket::Outcome::kMovedToFront;
        }
        bucket.push_front(id);
        ++ref.entries;
        if (static_cast<int>(bucket.size()) > config.bucket_capacity) {
          evicted = bucket.back();
          bucket.pop_back();
          --ref.entries;
        }
        report.max_bucket_length =
            std::max(report.max_bucket_length, static_cast<int>(bucket.size()));
        const auto& g = got.tables[t];
        if (g.table_index != t || g.outcome != want || g.evicted != evicted) {
          return fail(op, fmt::format(
                              "insert id {} table {}: got (moved={}, evicted={}) want "
                              "(moved={}, evicted={})",
                              id, t, g.outcome == Bucket::Outcome::kMovedToFront,
                              g.evicted ? fmt::to_string(*g.evicted) : "none",
                              want == Bucket::Outcome::kMovedToFront,
                              evicted ? fmt::to_string(*evicted) : "none"));
        }
        if (want == Bucket::Outcome::kMovedToFront) ++report.moves_to_front;
        if (evicted) ++report.evictions;
      }
      dirty = true;
      continue;
    }

    // Query: a stored descriptor with some flips, over all tables or a
    // random subset.
    auto it = stored.begin();
    std::advance(it, std::uniform_int_distribution<std::size_t>(0, stored.size() - 1)(rng));
    const BinaryDescriptor q = flip_random(it->second, qflips(rng), rng);
    std::vector<int> subset;
    if (unit(rng) < 0.5) {
      subset = index.all_tables();
    } else {
      for (int t = 0; t < config.table_count; ++t) {
        if (unit(rng) < 0.5) subset.push_back(t);
      }
      if (subset.empty()) subset.push_back(std::uniform_int_distribution<int>(0, config.table_count - 1)(rng));
    }
    if (dirty) {
      contents = ref.records();
      dirty = false;
    }
    QueryResult got = index.query(q, subset);
    ++report.queries;
    if (fault_pending && !got.union_ids.empty()) {
      got.union_ids.pop_back();
      fault_pending = false;
    }
    const auto want = oracle_query(contents, q, subset, config.table_count);
    if (got.union_ids != want) {
      return fail(op, fmt::format("query over tables [{}]: got [{}] want [{}]",
                                  fmt::join(subset, ","), fmt::join(got.union_ids, ","),
                                  fmt::join(want, ",")));
    }
  }

  // Final structural check: the index's own dump equals the reference.
  auto dumped = index.dump();
  auto expected = ref.records();
  auto key = [](const MihDumpRecord& r) {
    return std::tuple(r.table_index, r.bucket_address.to_string(), r.position_from_front,
                      r.point_id);
  };
  auto by_key = [&](const MihDumpRecord& a, const MihDumpRecord& b) { return key(a) < key(b); };
  std::sort(dumped.begin(), dumped.end(), by_key);
  std::sort(expected.begin(), expected.end(), by_key);
  if (dumped.size() != expected.size()) {
    return fail(config.operations, fmt::format("dump has {} entries, reference {}",
                                               dumped.size(), expected.size()));
  }
  for (std::size_t i = 0; i < dumped.size(); ++i) {
    if (key(dumped[i]) != key(expected[i])) {
      return fail(config.operations,
                  fmt::format("dump entry {} differs: table {} address {} pos {} id {}", i,
                              dumped[i].table_index, dumped[i].bucket_address.to_string(),
                              dumped[i].position_from_front, dumped[i].point_id));
    }
  }
  return report;
}

}  // namespace mihmap
