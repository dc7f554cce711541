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

#include "mihmap/descriptor.hpp"

#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace mihmap {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string BinaryDescriptor::to_hex() const {
  return fmt::format("{:016x}{:016x}{:016x}{:016x}", words_[0], words_[1],
                     words_[2], words_[3]);
}

BinaryDescriptor BinaryDescriptor::from_hex(std::string_view hex) {
  if (hex.size() != 64) {
    throw std::invalid_argument(
        fmt::format("descriptor hex must be 64 characters, got {}", hex.size()));
  }
  Words words{};
  for (int w = 0; w < kWords; ++w) {
    std::uint64_t value = 0;
    for (int i = 0; i < 16; ++i) {
      const int digit = hex_digit(hex[w * 16 + i]);
      if (digit < 0) {
        throw std::invalid_argument("descriptor hex contains a non-hex character");
      }
      value = (value << 4) | static_cast<std::uint64_t>(digit);
    }
    words[w] = value;
  }
  return BinaryDescriptor(words);
}

std::string SubstringKey::to_string() const {
  if (fits_u64()) return fmt::format("{}", words[0]);
  return fmt::format("0x{:016x}{:016x}{:016x}{:016x}", words[3], words[2],
                     words[1], words[0]);
}

int substring_width(int table_count) {
  if (table_count < 1 || table_count > BinaryDescriptor::kBits) {
    throw std::out_of_range(
        fmt::format("table count {} outside [1, 256]", table_count));
  }
  return BinaryDescriptor::kBits / table_count;
}

SubstringKey substring_value(const BinaryDescriptor& d, int table_index,
                             int width) {
  SubstringKey key;
  const int begin = table_index * width;
  const auto& words = d.words();
  // Copy 64-bit chunks with a shift so the substring starts at bit 0.
  for (int out = 0; out * 64 < width; ++out) {
    const int src = begin + out * 64;
    const int word = src >> 6;
    const int shift = src & 63;
    std::uint64_t chunk = words[word] >> shift;
    if (shift != 0 && word + 1 < BinaryDescriptor::kWords) {
      chunk |= words[word + 1] << (64 - shift);
    }
    const int remaining = width - out * 64;
    if (remaining < 64) chunk &= (1ULL << remaining) - 1ULL;
    key.words[out] = chunk;
  }
  return key;
}

std::vector<SubstringView> split_substrings(const BinaryDescriptor& d,
                                            int table_count) {
  const int width = substring_width(table_count);
  std::vector<SubstringView> views;
  views.reserve(table_count);
  for (int i = 0; i < table_count; ++i) {
    views.push_back({i, substring_value(d, i, width)});
  }
  return views;
}

std::string_view to_string(PerturbationModel model) {
  switch (model) {
    case PerturbationModel::kDistinctPositions:
      return "DistinctPositions";
    case PerturbationModel::kBallsIntoBins:
      return "BallsIntoBins";
  }
  return "unknown";
}

PerturbationModel parse_perturbation_model(std::string_view name) {
  if (name == "distinct" || name == "DistinctPositions") {
    return PerturbationModel::kDistinctPositions;
  }
  if (name == "balls" || name == "BallsIntoBins") {
    return PerturbationModel::kBallsIntoBins;
  }
  throw std::invalid_argument(
      fmt::format("unknown perturbation model '{}'", name));
}

BinaryDescriptor perturb(const BinaryDescriptor& d, const PerturbationSpec& spec,
                         Rng& rng) {
  if (spec.epsilon < 0) {
    throw std::invalid_argument("perturbation epsilon must be non-negative");
  }
  BinaryDescriptor out = d;
  constexpr int kBits = BinaryDescriptor::kBits;
  if (spec.model == PerturbationModel::kBallsIntoBins) {
    std::uniform_int_distribution<int> pick(0, kBits - 1);
    for (int i = 0; i < spec.epsilon; ++i) out.flip(pick(rng));
    return out;
  }
  if (spec.epsilon > kBits) {
    throw std::invalid_argument(fmt::format(
        "epsilon {} exceeds descriptor width for distinct positions",
        spec.epsilon));
  }
  // Partial Fisher-Yates: the first epsilon slots become a uniform sample.
  std::array<std::uint8_t, kBits> positions;
  std::iota(positions.begin(), positions.end(), 0);
  for (int i = 0; i < spec.epsilon; ++i) {
    std::uniform_int_distribution<int> pick(i, kBits - 1);
    std::swap(positions[i], positions[pick(rng)]);
    out.flip(positions[i]);
  }
  return out;
}

BinaryDescriptor perturb(const BinaryDescriptor& d, const PerturbationSpec& spec,
                         std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return perturb(d, spec, rng);
}

BinaryDescriptor random_descriptor(Rng& rng) {
  BinaryDescriptor::Words words;
  for (auto& w : words) w = rng();
  return BinaryDescriptor(words);
}

BinaryDescriptor random_descriptor(std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return random_descriptor(rng);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mihmap
