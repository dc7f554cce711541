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

#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "mihmap/descriptor.hpp"

using namespace mihmap;

namespace {

// Bit-by-bit substring reference.
SubstringKey slow_substring(const BinaryDescriptor& d, int table, int width) {
  SubstringKey key;
  for (int j = 0; j < width; ++j) {
    if (d.bit(table * width + j)) key.words[j / 64] |= 1ULL << (j % 64);
  }
  return key;
}

}  // namespace

TEST_CASE("bit access and flips") {
  BinaryDescriptor d;
  CHECK(d.popcount() == 0);
  d.set_bit(0, true);
  d.set_bit(63, true);
  d.set_bit(64, true);
  d.set_bit(255, true);
  CHECK(d.popcount() == 4);
  CHECK(d.words()[0] == 0x8000000000000001ULL);
  CHECK(d.words()[1] == 1ULL);
  CHECK(d.words()[3] == 0x8000000000000000ULL);
  d.flip(255);
  CHECK_FALSE(d.bit(255));
  CHECK(BinaryDescriptor::Ones().popcount() == 256);
  CHECK((~BinaryDescriptor::Zeros()) == BinaryDescriptor::Ones());
}

TEST_CASE("hamming distance") {
  const auto a = random_descriptor(11);
  const auto b = random_descriptor(12);
  int slow = 0;
  for (int i = 0; i < 256; ++i) slow += a.bit(i) != b.bit(i);
  CHECK(hamming_distance(a, b) == slow);
  CHECK(hamming_distance(a, a) == 0);
  CHECK(hamming_distance(a, ~a) == 256);
  CHECK(hamming_distance(a, b) == (a ^ b).popcount());
}

TEST_CASE("hex round trip and layout") {
  BinaryDescriptor d;
  d.set_bit(0, true);
  d.set_bit(68, true);
  const std::string hex = d.to_hex();
  CHECK(hex.size() == 64);
  CHECK(hex.substr(0, 16) == "0000000000000001");
  CHECK(hex.substr(16, 16) == "0000000000000010");
  CHECK(BinaryDescriptor::from_hex(hex) == d);
  const auto r = random_descriptor(99);
  CHECK(BinaryDescriptor::from_hex(r.to_hex()) == r);
  CHECK_THROWS_AS(BinaryDescriptor::from_hex("abc"), std::invalid_argument);
  CHECK_THROWS_AS(BinaryDescriptor::from_hex(std::string(64, 'g')), std::invalid_argument);
}

TEST_CASE("substring widths") {
  CHECK(substring_width(1) == 256);
  CHECK(substring_width(2) == 128);
  CHECK(substring_width(32) == 8);
  CHECK(substring_width(64) == 4);
  CHECK(substring_width(3) == 85);
  CHECK(substring_width(256) == 1);
  CHECK_THROWS_AS(substring_width(0), std::out_of_range);
  CHECK_THROWS_AS(substring_width(257), std::out_of_range);
  CHECK_THROWS_AS(split_substrings(BinaryDescriptor{}, 0), std::out_of_range);
}

TEST_CASE("substrings match the bit-by-bit reference") {
  for (int t : {1, 2, 3, 4, 5, 8, 16, 32, 64, 100, 256}) {
    const auto d = random_descriptor(static_cast<std::uint64_t>(t) * 7 + 1);
    const auto parts = split_substrings(d, t);
    REQUIRE(static_cast<int>(parts.size()) == t);
    const int w = substring_width(t);
    for (int i = 0; i < t; ++i) {
      CHECK(parts[i].table_index == i);
      CHECK(parts[i].value == slow_substring(d, i, w));
    }
  }
}

TEST_CASE("substring key printing") {
  BinaryDescriptor d;
  d.set_bit(1, true);
  d.set_bit(3, true);
  CHECK(substring_value(d, 0, 8).to_string() == "10");
  BinaryDescriptor e;
  e.set_bit(64, true);
  const auto wide = substring_value(e, 0, 128);
  CHECK_FALSE(wide.fits_u64());
  CHECK(wide.to_string() ==
        "0x0000000000000000000000000000000000000000000000010000000000000000");
}

TEST_CASE("one flip changes exactly one substring") {
  const auto d = random_descriptor(5);
  for (int pos : {0, 7, 8, 100, 255}) {
    auto e = d;
    e.flip(pos);
    const auto a = split_substrings(d, 32);
    const auto b = split_substrings(e, 32);
    int changed = 0;
    for (int i = 0; i < 32; ++i) changed += !(a[i].value == b[i].value);
    CHECK(changed == 1);
  }
}

TEST_CASE("uncovered trailing bits do not affect substrings") {
  // t = 3 covers 255 bits; bit 255 is dead.
  auto d = random_descriptor(8);
  auto e = d;
  e.flip(255);
  const auto a = split_substrings(d, 3);
  const auto b = split_substrings(e, 3);
  for (int i = 0; i < 3; ++i) CHECK(a[i].value == b[i].value);
}

TEST_CASE("distinct-position perturbation flips exactly epsilon bits") {
  const auto d = random_descriptor(1);
  Rng rng(3);
  for (int eps : {0, 1, 2, 17, 128, 255, 256}) {
    const auto p = perturb(d, {eps, PerturbationModel::kDistinctPositions}, rng);
    CHECK(hamming_distance(d, p) == eps);
  }
  CHECK_THROWS_AS(perturb(d, {257, PerturbationModel::kDistinctPositions}, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(perturb(d, {-1, PerturbationModel::kBallsIntoBins}, rng),
                  std::invalid_argument);
}

TEST_CASE("balls-into-bins perturbation keeps parity and bound") {
  const auto d = random_descriptor(2);
  Rng rng(4);
  for (int eps : {0, 1, 5, 50, 400}) {
    for (int rep = 0; rep < 20; ++rep) {
      const int h = hamming_distance(d, perturb(d, {eps, PerturbationModel::kBallsIntoBins}, rng));
      CHECK(h <= eps);
      CHECK(h % 2 == eps % 2);
    }
  }
}

TEST_CASE("distinct positions are uniform over bits") {
  // Each bit is flipped with probability eps/256.
  const int eps = 32;
  const int reps = 4000;
  std::vector<int> hits(256, 0);
  Rng rng(17);
  for (int r = 0; r < reps; ++r) {
    const auto p = perturb(BinaryDescriptor{}, {eps, PerturbationModel::kDistinctPositions}, rng);
    for (int i = 0; i < 256; ++i) hits[i] += p.bit(i);
  }
  const double mean = reps * eps / 256.0;
  const double sd = std::sqrt(reps * (eps / 256.0) * (1 - eps / 256.0));
  for (int i = 0; i < 256; ++i) CHECK(std::abs(hits[i] - mean) < 5 * sd);
}

TEST_CASE("seeding is reproducible") {
  CHECK(random_descriptor(42) == random_descriptor(42));
  CHECK_FALSE(random_descriptor(42) == random_descriptor(43));
  const auto d = random_descriptor(1);
  CHECK(perturb(d, {10, PerturbationModel::kDistinctPositions}, 5) ==
        perturb(d, {10, PerturbationModel::kDistinctPositions}, 5));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  std::set<std::uint64_t> streams;
  for (std::uint64_t s = 0; s < 1000; ++s) streams.insert(derive_seed(7, s));
  CHECK(streams.size() == 1000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("perturbation model names") {
  CHECK(parse_perturbation_model("distinct") == PerturbationModel::kDistinctPositions);
  CHECK(parse_perturbation_model("BallsIntoBins") == PerturbationModel::kBallsIntoBins);
  CHECK(parse_perturbation_model(to_string(PerturbationModel::kDistinctPositions)) ==
        PerturbationModel::kDistinctPositions);
  CHECK_THROWS_AS(parse_perturbation_model("gauss"), std::invalid_argument);
}
