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

#include "mihmap/mih_index.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace mihmap {

void MihConfig::validate() const {
  if (table_count < 1 || table_count > BinaryDescriptor::kBits) {
    throw std::invalid_argument(
        fmt::format("table_count {} outside [1, 256]", table_count));
  }
  if (bucket_capacity < 1) {
    throw std::invalid_argument(
        fmt::format("bucket_capacity {} must be at least 1", bucket_capacity));
  }
}

Bucket::PushResult Bucket::push_front(PointId id, int capacity) {
  PushResult result;
  auto it = std::find(entries_.begin(), entries_.end(), id);
  if (it != entries_.end()) {
    std::rotate(entries_.begin(), it, it + 1);
    result.outcome = Outcome::kMovedToFront;
    return result;
  }
  if (static_cast<int>(entries_.size()) >= capacity) {
    result.evicted = entries_.back();
    entries_.pop_back();
  }
  entries_.insert(entries_.begin(), id);
  result.outcome = Outcome::kInserted;
  return result;
}

std::vector<PointId> InsertReport::evicted_ids() const {
  std::vector<PointId> ids;
  for (const auto& t : tables) {
    if (t.evicted) ids.push_back(*t.evicted);
  }
  return ids;
}

MihIndex::Table::Table(bool dense, int width) : dense_(dense) {
  if (dense_) dense_buckets_.resize(std::size_t{1} << width);
}

Bucket& MihIndex::Table::bucket_for_insert(const SubstringKey& key) {
  if (dense_) return dense_buckets_[key.low()];
  return sparse_buckets_[key];
}

const Bucket* MihIndex::Table::find(const SubstringKey& key) const {
  if (dense_) return &dense_buckets_[key.low()];
  auto it = sparse_buckets_.find(key);
  return it == sparse_buckets_.end() ? nullptr : &it->second;
}

std::uint64_t MihIndex::Table::occupied() const {
  if (dense_) {
    return static_cast<std::uint64_t>(
        std::count_if(dense_buckets_.begin(), dense_buckets_.end(),
                      [](const Bucket& b) { return !b.empty(); }));
  }
  return sparse_buckets_.size();
}

void MihIndex::Table::append_dump(int table_index,
                                  std::vector<MihDumpRecord>& out) const {
  auto emit = [&](const SubstringKey& key, const Bucket& bucket) {
    const auto entries = bucket.entries();
    for (std::size_t pos = 0; pos < entries.size(); ++pos) {
      out.push_back({table_index, key, static_cast<int>(pos), entries[pos]});
    }
  };
  if (dense_) {
    for (std::size_t addr = 0; addr < dense_buckets_.size(); ++addr) {
      SubstringKey key;
      key.words[0] = addr;
      emit(key, dense_buckets_[addr]);
    }
    return;
  }
  // Sparse buckets are emitted in address order for a stable dump.
  std::vector<const std::pair<const SubstringKey, Bucket>*> sorted;
  sorted.reserve(sparse_buckets_.size());
  for (const auto& kv : sparse_buckets_) sorted.push_back(&kv);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
    const auto& wa = a->first.words;
    const auto& wb = b->first.words;
    return std::tie(wa[3], wa[2], wa[1], wa[0]) <
           std::tie(wb[3], wb[2], wb[1], wb[0]);
  });
  for (const auto* kv : sorted) emit(kv->first, kv->second);
}

MihIndex::MihIndex(MihConfig config) : config_(config) {
  config_.validate();
  width_ = config_.substring_bits();
  const bool dense = width_ <= 8;
  tables_.reserve(config_.table_count);
  for (int i = 0; i < config_.table_count; ++i) tables_.emplace_back(dense, width_);
}

MihIndex::MihIndex(const MihIndex& other)
    : config_(other.config_),
      width_(other.width_),
      tables_(other.tables_),
      inserts_(other.inserts_),
      moves_to_front_(other.moves_to_front_),
      evictions_(other.evictions_),
      entries_(other.entries_),
      table_lookups_(other.table_lookups_.load(std::memory_order_relaxed)) {}

MihIndex::MihIndex(MihIndex&& other) noexcept
    : config_(other.config_),
      width_(other.width_),
      tables_(std::move(other.tables_)),
      inserts_(other.inserts_),
      moves_to_front_(other.moves_to_front_),
      evictions_(other.evictions_),
      entries_(other.entries_),
      table_lookups_(other.table_lookups_.load(std::memory_order_relaxed)) {}

MihIndex& MihIndex::operator=(MihIndex other) noexcept {
  std::swap(config_, other.config_);
  std::swap(width_, other.width_);
  std::swap(tables_, other.tables_);
  std::swap(inserts_, other.inserts_);
  std::swap(moves_to_front_, other.moves_to_front_);
  std::swap(evictions_, other.evictions_);
  std::swap(entries_, other.entries_);
  table_lookups_.store(other.table_lookups_.load(std::memory_order_relaxed),
                       std::memory_order_relaxed);
  return *this;
}

InsertReport MihIndex::insert(PointId id, const BinaryDescriptor& descriptor) {
  InsertReport report;
  report.tables.reserve(tables_.size());
  for (int i = 0; i < config_.table_count; ++i) {
    const SubstringKey key = substring_value(descriptor, i, width_);
    Bucket& bucket = tables_[i].bucket_for_insert(key);
    const auto pushed = bucket.push_front(id, config_.bucket_capacity);
    ++inserts_;
    if (pushed.outcome == Bucket::Outcome::kMovedToFront) {
      ++moves_to_front_;
    } else if (pushed.evicted) {
      ++evictions_;
    } else {
      ++entries_;
    }
    report.tables.push_back({i, pushed.outcome, pushed.evicted});
  }
  return report;
}

std::vector<int> MihIndex::all_tables() const {
  std::vector<int> all(config_.table_count);
  for (int i = 0; i < config_.table_count; ++i) all[i] = i;
  return all;
}

void MihIndex::query_into(const BinaryDescriptor& descriptor,
                          std::span<const int> table_subset,
                          QueryResult& out) const {
  out.per_table_ids.assign(config_.table_count, {});
  out.union_ids.clear();
  for (int table : table_subset) {
    if (table < 0 || table >= config_.table_count) {
      throw std::out_of_range(fmt::format("table index {} outside [0, {})",
                                          table, config_.table_count));
    }
  }
  for (int table : table_subset) {
    const Bucket* bucket =
        tables_[table].find(substring_value(descriptor, table, width_));
    if (bucket == nullptr) continue;
    const auto entries = bucket->entries();
    out.per_table_ids[table].assign(entries.begin(), entries.end());
    out.union_ids.insert(out.union_ids.end(), entries.begin(), entries.end());
  }
  std::sort(out.union_ids.begin(), out.union_ids.end());
  out.union_ids.erase(std::unique(out.union_ids.begin(), out.union_ids.end()),
                      out.union_ids.end());
  table_lookups_.fetch_add(table_subset.size(), std::memory_order_relaxed);
}

QueryResult MihIndex::query(const BinaryDescriptor& descriptor) const {
  return query(descriptor, all_tables());
}

QueryResult MihIndex::query(const BinaryDescriptor& descriptor,
                            std::span<const int> table_subset) const {
  QueryResult result;
  query_into(descriptor, table_subset, result);
  return result;
}

BatchQueryResult MihIndex::batch_query(
    std::span<const BinaryDescriptor> descriptors) const {
  return batch_query(descriptors, all_tables());
}

BatchQueryResult MihIndex::batch_query(
    std::span<const BinaryDescriptor> descriptors,
    std::span<const int> table_subset) const {
  BatchQueryResult batch;
  batch.per_descriptor.resize(descriptors.size());
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    query_into(descriptors[i], table_subset, batch.per_descriptor[i]);
    const auto& ids = batch.per_descriptor[i].union_ids;
    batch.ids.insert(batch.ids.end(), ids.begin(), ids.end());
  }
  std::sort(batch.ids.begin(), batch.ids.end());
  batch.ids.erase(std::unique(batch.ids.begin(), batch.ids.end()),
                  batch.ids.end());
  return batch;
}

MihStats MihIndex::stats() const {
  MihStats s;
  s.inserts = inserts_;
  s.moves_to_front = moves_to_front_;
  s.evictions = evictions_;
  s.table_lookups = table_lookups_.load(std::memory_order_relaxed);
  for (const auto& t : tables_) s.occupied_buckets += t.occupied();
  s.entries = entries_;
  s.dead_bits = config_.dead_bits();
  return s;
}

std::vector<MihDumpRecord> MihIndex::dump() const {
  std::vector<MihDumpRecord> records;
  records.reserve(entries_);
  for (int i = 0; i < config_.table_count; ++i) tables_[i].append_dump(i, records);
  return records;
}

std::string dump_to_csv(std::span<const MihDumpRecord> records) {
  std::string out = "table_index,bucket_address,position_from_front,point_id\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{}\n", r.table_index, r.bucket_address.to_string(),
                       r.position_from_front, r.point_id);
  }
  return out;
}

}  // namespace mihmap
