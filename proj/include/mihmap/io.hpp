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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace mihmap {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Writes to a temporary file in the same directory, then renames over the
/// target. Creates missing parent directories. Throws std::runtime_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// "# seed=<seed> config_hash=<hash>[ <extra>]\n"
std::string metadata_header(std::uint64_t seed, std::string_view config_hash,
                            std::string_view extra = {});

/// Worker cap: hardware concurrency, lowered by MIH_LOCALMAP_THREADS when it
/// holds a positive integer. Always at least 1.
unsigned worker_threads();

}  // namespace mihmap
