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
#include <deque>
#include <map>

#include <stdexcept>

#include "doctest.h"
#include "mihmap/mih_index.hpp"
#include "mihmap/mih_oracle.hpp"

using namespace mihmap;

namespace {

std::vector<PointId> ids_of(std::span<const PointId> s) { return {s.begin(), s.end()}; }

// Descriptor whose every 8-bit substring equals `byte`.
BinaryDescriptor repeated_byte(std::uint8_t byte) {
  BinaryDescriptor d;
  for (int i = 0; i < 256; ++i) d.set_bit(i, (byte >> (i % 8)) & 1);
  return d;
}

}  // namespace

TEST_CASE("bucket recency trace") {
  Bucket b;
  CHECK(b.push_front(1, 3).outcome == Bucket::Outcome::kInserted);
  b.push_front(2, 3);
  b.push_front(3, 3);
  CHECK(ids_of(b.entries()) == std::vector<PointId>{3, 2, 1});
  auto r = b.push_front(1, 3);
  CHECK(r.outcome == Bucket::Outcome::kMovedToFront);
  CHECK_FALSE(r.evicted.has_value());
  CHECK(ids_of(b.entries()) == std::vector<PointId>{1, 3, 2});
  r = b.push_front(4, 3);
  CHECK(r.outcome == Bucket::Outcome::kInserted);
  REQUIRE(r.evicted.has_value());
  CHECK(*r.evicted == 2);
  CHECK(ids_of(b.entries()) == std::vector<PointId>{4, 1, 3});
  // Front element re-pushed: no change.
  b.push_front(4, 3);
  CHECK(ids_of(b.entries()) == std::vector<PointId>{4, 1, 3});
}

TEST_CASE("capacity one keeps only the latest id") {
  Bucket b;
  b.push_front(7, 1);
  const auto r = b.push_front(8, 1);
  CHECK(r.evicted == std::optional<PointId>(7));
  CHECK(ids_of(b.entries()) == std::vector<PointId>{8});
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(MihIndex(MihConfig{0, 10}), std::invalid_argument);
  CHECK_THROWS_AS(MihIndex(MihConfig{257, 10}), std::invalid_argument);
  CHECK_THROWS_AS(MihIndex(MihConfig{8, 0}), std::invalid_argument);
  CHECK(MihConfig{32, 10}.substring_bits() == 8);
  CHECK(MihConfig{3, 10}.dead_bits() == 1);
  CHECK(MihConfig{32, 10}.dead_bits() == 0);
}

TEST_CASE("exact query retrieves the stored id in every table") {
  for (int t : {1, 4, 8, 32, 64}) {
    MihIndex index(MihConfig{t, 10});
    const auto d = random_descriptor(static_cast<std::uint64_t>(t));
    index.insert(5, d);
    const auto q = index.query(d);
    CHECK(q.union_ids == std::vector<PointId>{5});
    for (int i = 0; i < t; ++i) CHECK(q.per_table_ids[i] == std::vector<PointId>{5});
  }
}

TEST_CASE("query survives flips confined to one substring") {
  MihIndex index(MihConfig{4, 10});
  const auto d = random_descriptor(3);
  index.insert(9, d);
  auto q = d;
  for (int i = 0; i < 64; ++i) q.flip(i);  // all of substring 0
  const auto r = index.query(q);
  CHECK(r.union_ids == std::vector<PointId>{9});
  CHECK(r.per_table_ids[0].empty());
  // A flip in every substring defeats every table.
  for (int t = 1; t < 4; ++t) q.flip(t * 64 + 5);
  CHECK(index.query(q).union_ids.empty());
}

TEST_CASE("subset queries only see their tables and count lookups") {
  MihIndex index(MihConfig{4, 10});
  const auto d = random_descriptor(4);
  index.insert(1, d);
  auto q = d;
  q.flip(0);    // table 0 broken
  q.flip(70);   // table 1 broken
  const std::vector<int> broken = {0, 1};
  const std::vector<int> intact = {2};
  CHECK(index.query(q, broken).union_ids.empty());
  CHECK(index.query(q, intact).union_ids == std::vector<PointId>{1});
  CHECK(index.stats().table_lookups == 3);
  const std::vector<int> bad = {4};
  CHECK_THROWS_AS(index.query(q, bad), std::out_of_range);
}

TEST_CASE("dense table eviction and move-to-front report") {
  // t = 32 uses dense 8-bit tables; identical descriptors share all buckets.
  MihIndex index(MihConfig{32, 2});
  const auto d = repeated_byte(0xA5);
  auto r1 = index.insert(1, d);
  CHECK(r1.evicted_ids().empty());
  index.insert(2, d);
  auto r3 = index.insert(1, d);
  for (const auto& t : r3.tables) CHECK(t.outcome == Bucket::Outcome::kMovedToFront);
  auto r4 = index.insert(3, d);
  // Bucket was [1, 2]; 2 is the stalest.
  for (const auto& t : r4.tables) CHECK(t.evicted == std::optional<PointId>(2));
  CHECK(index.query(d).union_ids == std::vector<PointId>{1, 3});
  CHECK(index.query(d).per_table_ids[7] == std::vector<PointId>{3, 1});
  const auto s = index.stats();
  CHECK(s.inserts == 4 * 32);
  CHECK(s.moves_to_front == 32);
  CHECK(s.evictions == 32);
  CHECK(s.entries == 2 * 32);
  CHECK(s.occupied_buckets == 32);
}

TEST_CASE("reinsertion with a new descriptor leaves the stale entry to age out") {
  MihIndex index(MihConfig{32, 10});
  const auto a = repeated_byte(0x01);
  const auto b = repeated_byte(0x02);
  index.insert(4, a);
  index.insert(4, b);
  CHECK(index.query(a).union_ids == std::vector<PointId>{4});
  CHECK(index.query(b).union_ids == std::vector<PointId>{4});
  CHECK(index.stats().entries == 64);
}

TEST_CASE("batch query unions per-descriptor results") {
  MihIndex index(MihConfig{8, 10});
  std::vector<BinaryDescriptor> ds;
  for (PointId id = 0; id < 20; ++id) {
    ds.push_back(random_descriptor(100 + id));
    index.insert(id, ds.back());
  }
  const std::vector<BinaryDescriptor> qs = {ds[3], ds[11], random_descriptor(999)};
  const auto batch = index.batch_query(qs);
  CHECK(batch.ids == std::vector<PointId>{3, 11});
  REQUIRE(batch.per_descriptor.size() == 3);
  CHECK(batch.per_descriptor[2].union_ids.empty());
  const std::vector<int> sub = {0, 5};
  const auto before = index.stats().table_lookups;
  index.batch_query(qs, sub);
  CHECK(index.stats().table_lookups - before == 6);
}

TEST_CASE("dump lists every live entry once with bucket positions") {
  MihIndex index(MihConfig{4, 3});
  Rng rng(5);
  for (PointId id = 0; id < 50; ++id) index.insert(id, random_descriptor(rng));
  const auto dump = index.dump();
  CHECK(dump.size() == 4 * 50);
  std::map<std::pair<int, std::string>, int> per_bucket;
  for (const auto& r : dump) {
    CHECK(r.position_from_front == per_bucket[{r.table_index, r.bucket_address.to_string()}]++);
  }
}

TEST_CASE("query matches the linear-scan oracle on random content") {
  for (int t : {2, 4, 8, 16, 32}) {
    MihIndex index(MihConfig{t, 4});
    Rng rng(static_cast<std::uint64_t>(t));
    std::vector<BinaryDescriptor> stored;
    const auto proto = random_descriptor(rng);
    for (PointId id = 0; id < 300; ++id) {
      stored.push_back(perturb(proto, {20, PerturbationModel::kDistinctPositions}, rng));
      index.insert(id, stored.back());
    }
    const auto dump = index.dump();
    for (int k = 0; k < 100; ++k) {
      const auto q = perturb(stored[k], {k % 30, PerturbationModel::kDistinctPositions}, rng);
      std::vector<int> subset;
      for (int i = 0; i < t; i += 1 + k % 3) subset.push_back(i);
      CHECK(index.query(q, subset).union_ids == oracle_query(dump, q, subset, t));
    }
  }
}

TEST_CASE("oracle query hand example") {
  // Two tables of 128 bits; one record in table 1 whose address is bit 0 set.
  SubstringKey key;
  key.words[0] = 1;
  const std::vector<MihDumpRecord> contents = {{1, key, 0, 42}};
  BinaryDescriptor d;
  d.set_bit(128, true);
  const std::vector<int> both = {0, 1};
  const std::vector<int> first = {0};
  CHECK(oracle_query(contents, d, both, 2) == std::vector<PointId>{42});
  CHECK(oracle_query(contents, d, first, 2).empty());
  d.set_bit(129, true);
  CHECK(oracle_query(contents, d, both, 2).empty());
}

TEST_CASE("randomized workload agrees with the reference model") {
  for (int t : {4, 8, 32}) {
    MihWorkloadConfig c;
    c.table_count = t;
    c.operations = 1500;
    c.seed = 77;
    const auto r = run_mih_workload(c);
    INFO(r.divergence.value_or(""));
    CHECK(r.ok());
    CHECK(r.max_bucket_length <= 10);
    CHECK(r.evictions > 0);
    CHECK(r.moves_to_front > 0);
  }
}

TEST_CASE("workload fault hook is detected") {
  MihWorkloadConfig c;
  c.operations = 300;
  c.inject_fault = true;
  CHECK_FALSE(run_mih_workload(c).ok());
}

TEST_CASE("copies are independent") {
  MihIndex a(MihConfig{8, 10});
  const auto d = random_descriptor(1);
  a.insert(1, d);
  MihIndex b = a;
  b.insert(2, d);
  CHECK(a.query(d).union_ids == std::vector<PointId>{1});
  CHECK(b.query(d).union_ids == std::vector<PointId>{1, 2});
  a = std::move(b);
  CHECK(a.query(d).union_ids == std::vector<PointId>{1, 2});
}

TEST_CASE("csv dump header") {
  MihIndex index(MihConfig{32, 10});
  index.insert(3, repeated_byte(0x10));
  const std::string csv = dump_to_csv(index.dump());
  CHECK(csv.rfind("table_index,bucket_address,position_from_front,point_id\n", 0) == 0);
  CHECK(csv.find("\n0,16,0,3\n") != std::string::npos);
}
