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

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mihmap {

/// Fixed-width 256-bit binary descriptor (ORB-style).
///
/// Bit position p lives in word p / 64 at bit p % 64, least-significant bit
/// first. Substring values and the hex form depend on this layout.
class BinaryDescriptor {
 public:
  static constexpr int kBits = 256;
  static constexpr int kWords = kBits / 64;
  using Words = std::array<std::uint64_t, kWords>;

  constexpr BinaryDescriptor() = default;
  constexpr explicit BinaryDescriptor(const Words& words) : words_(words) {}

  static constexpr BinaryDescriptor Zeros() { return BinaryDescriptor(); }
  static constexpr BinaryDescriptor Ones() {
    return BinaryDescriptor(Words{~0ULL, ~0ULL, ~0ULL, ~0ULL});
  }

  constexpr bool bit(int pos) const {
    return (words_[pos >> 6] >> (pos & 63)) & 1ULL;
  }
  constexpr void set_bit(int pos, bool value) {
    const std::uint64_t mask = 1ULL << (pos & 63);
    if (value) {
      words_[pos >> 6] |= mask;
    } else {
      words_[pos >> 6] &= ~mask;
    }
  }
  constexpr void flip(int pos) { words_[pos >> 6] ^= 1ULL << (pos & 63); }

  constexpr const Words& words() const { return words_; }

  int popcount() const {
    int n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
  }

  BinaryDescriptor operator^(const BinaryDescriptor& other) const {
    BinaryDescriptor out;
    for (int i = 0; i < kWords; ++i) out.words_[i] = words_[i] ^ other.words_[i];
    return out;
  }
  BinaryDescriptor operator~() const {
    BinaryDescriptor out;
    for (int i = 0; i < kWords; ++i) out.words_[i] = ~words_[i];
    return out;
  }

  friend constexpr bool operator==(const BinaryDescriptor&,
                                   const BinaryDescriptor&) = default;

  /// 64 lowercase hex characters. Word 0 first; each word is written
  /// most-significant nibble first.
  std::string to_hex() const;
  /// Inverse of to_hex(). Throws std::invalid_argument on malformed input.
  static BinaryDescriptor from_hex(std::string_view hex);

 private:
  Words words_{};
};

inline int hamming_distance(const BinaryDescriptor& a,
                            const BinaryDescriptor& b) {
  const auto& wa = a.words();
  const auto& wb = b.words();
  return std::popcount(wa[0] ^ wb[0]) + std::popcount(wa[1] ^ wb[1]) +
         std::popcount(wa[2] ^ wb[2]) + std::popcount(wa[3] ^ wb[3]);
}

/// Value of one substring; up to 256 bits wide, packed LSB-first into four
/// words. For widths of 64 bits or fewer only word 0 is non-zero.
struct SubstringKey {
  BinaryDescriptor::Words words{};

  std::uint64_t low() const { return words[0]; }
  bool fits_u64() const { return (words[1] | words[2] | words[3]) == 0; }
  std::string to_string() const;

  friend bool operator==(const SubstringKey&, const SubstringKey&) = default;
};

struct SubstringKeyHash {
  std::size_t operator()(const SubstringKey& key) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto w : key.words) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct SubstringView {
  int table_index = 0;
  SubstringKey value;
};

/// Width in bits of each of the t substrings: floor(256 / t).
int substring_width(int table_count);

/// Bits [table_index * width, (table_index + 1) * width) of d as an
/// LSB-first integer.
SubstringKey substring_value(const BinaryDescriptor& d, int table_index,
                             int width);

/// Splits d into t disjoint contiguous substrings. When t does not divide 256
/// the trailing 256 - t * floor(256 / t) bits are not covered.
/// Throws std::out_of_range unless 1 <= t <= 256.
std::vector<SubstringView> split_substrings(const BinaryDescriptor& d,
                                            int table_count);

enum class PerturbationModel {
  kDistinctPositions,  // exactly epsilon distinct positions flipped
  kBallsIntoBins,      // epsilon positions drawn with replacement
};

struct PerturbationSpec {
  int epsilon = 0;
  PerturbationModel model = PerturbationModel::kDistinctPositions;
};

std::string_view to_string(PerturbationModel model);
/// Accepts "distinct"/"DistinctPositions" and "balls"/"BallsIntoBins".
PerturbationModel parse_perturbation_model(std::string_view name);

using Rng = std::mt19937_64;

BinaryDescriptor perturb(const BinaryDescriptor& d, const PerturbationSpec& spec,
                         Rng& rng);
BinaryDescriptor perturb(const BinaryDescriptor& d, const PerturbationSpec& spec,
                         std::uint64_t rng_seed);

BinaryDescriptor random_descriptor(Rng& rng);
BinaryDescriptor random_descriptor(std::uint64_t rng_seed);

/// Stateless mixing of a root seed with a stream index (splitmix64), used
/// wherever work is partitioned and must stay reproducible.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

}  // namespace mihmap
