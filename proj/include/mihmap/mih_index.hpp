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

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mihmap/descriptor.hpp"

namespace mihmap {

using PointId = std::uint64_t;

struct MihConfig {
  int table_count = 32;
  int bucket_capacity = 10;

  int substring_bits() const { return substring_width(table_count); }
  /// Trailing descriptor bits not covered by any substring.
  int dead_bits() const {
    return BinaryDescriptor::kBits - table_count * substring_bits();
  }
  /// Throws std::invalid_argument if table_count or bucket_capacity is out of
  /// range.
  void validate() const;
};

/// Fixed-capacity recency list. Front (index 0) is the most recent entry.
class Bucket {
 public:
  enum class Outcome { kInserted, kMovedToFront };

  struct PushResult {
    Outcome outcome = Outcome::kInserted;
    std::optional<PointId> evicted;
  };

  Bucket() = default;

  /// Moves a resident id to the front, otherwise inserts at the front and
  /// evicts the back entry when the bucket is at capacity.
  PushResult push_front(PointId id, int capacity);

  std::span<const PointId> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<PointId> entries_;
};

struct TableInsertReport {
  int table_index = 0;
  Bucket::Outcome outcome = Bucket::Outcome::kInserted;
  std::optional<PointId> evicted;
};

struct InsertReport {
  std::vector<TableInsertReport> tables;

  std::vector<PointId> evicted_ids() const;
};

struct QueryResult {
  /// Sorted, duplicate free.
  std::vector<PointId> union_ids;
  /// One entry per table, bucket order front to back. Empty for tables that
  /// were not queried.
  std::vector<std::vector<PointId>> per_table_ids;
};

struct BatchQueryResult {
  /// The appearance-prior set: union over every descriptor's result, sorted.
  std::vector<PointId> ids;
  std::vector<QueryResult> per_descriptor;
};

struct MihStats {
  std::uint64_t inserts = 0;          // table-level insertions
  std::uint64_t moves_to_front = 0;   // subset of inserts hitting a resident id
  std::uint64_t evictions = 0;
  std::uint64_t table_lookups = 0;
  std::uint64_t occupied_buckets = 0;
  std::uint64_t entries = 0;
  int dead_bits = 0;

  friend bool operator==(const MihStats&, const MihStats&) = default;
};

/// One live bucket entry, as emitted by MihIndex::dump().
struct MihDumpRecord {
  int table_index = 0;
  SubstringKey bucket_address;
  int position_from_front = 0;
  PointId point_id = 0;
};

/// Multi-index hash over 256-bit descriptors.
///
/// Each of the t tables is addressed by one substring of the descriptor and
/// holds bounded recency buckets of point ids. Tables with substrings of at
/// most 8 bits are dense arrays of 2^width buckets; wider substrings use a
/// sparse map keyed by the substring value.
///
/// Queries are const and may run concurrently; insert() needs exclusive
/// access.
class MihIndex {
 public:
  explicit MihIndex(MihConfig config = {});
  MihIndex(const MihIndex& other);
  MihIndex(MihIndex&& other) noexcept;
  MihIndex& operator=(MihIndex other) noexcept;
  ~MihIndex() = default;

  const MihConfig& config() const { return config_; }
  int table_count() const { return config_.table_count; }

  InsertReport insert(PointId id, const BinaryDescriptor& descriptor);

  /// Exact-match lookup in every table.
  QueryResult query(const BinaryDescriptor& descriptor) const;
  /// Exact-match lookup restricted to table_subset. Throws std::out_of_range
  /// if a table index is invalid.
  QueryResult query(const BinaryDescriptor& descriptor,
                    std::span<const int> table_subset) const;

  BatchQueryResult batch_query(std::span<const BinaryDescriptor> descriptors) const;
  BatchQueryResult batch_query(std::span<const BinaryDescriptor> descriptors,
                               std::span<const int> table_subset) const;

  MihStats stats() const;

  /// Every live entry, ordered by table, then bucket address, then position.
  std::vector<MihDumpRecord> dump() const;

  std::vector<int> all_tables() const;

 private:
  class Table {
   public:
    Table(bool dense, int width);
    Bucket& bucket_for_insert(const SubstringKey& key);
    const Bucket* find(const SubstringKey& key) const;
    std::uint64_t occupied() const;
    void append_dump(int table_index, std::vector<MihDumpRecord>& out) const;

   private:
    bool dense_;
    std::vector<Bucket> dense_buckets_;
    std::unordered_map<SubstringKey, Bucket, SubstringKeyHash> sparse_buckets_;
  };

  void query_into(const BinaryDescriptor& descriptor,
                  std::span<const int> table_subset, QueryResult& out) const;

  MihConfig config_;
  int width_;
  std::vector<Table> tables_;
  std::uint64_t inserts_ = 0;
  std::uint64_t moves_to_front_ = 0;
  std::uint64_t evictions_ = 0;
  std::uint64_t entries_ = 0;
  // Counted from const queries, which may run concurrently.
  mutable std::atomic<std::uint64_t> table_lookups_{0};
};

/// CSV of dump(): table_index,bucket_address,position_from_front,point_id.
std::string dump_to_csv(std::span<const MihDumpRecord> records);

}  // namespace mihmap
