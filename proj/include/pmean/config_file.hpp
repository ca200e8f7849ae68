// Copyright 2026 The pmean Authors
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

#ifndef PMEAN_CONFIG_FILE_HPP
#define PMEAN_CONFIG_FILE_HPP

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmean/pooling.hpp"

namespace pmean {

// One line of a pooled config file:
//
//   space=<name> p=<p,p,...> [path=<file>] [lang=<tag>] [dim=<int>]
//
// Fields are whitespace separated and may appear in any order. Blank lines
// and lines starting with '#' are ignored. See docs/formats.md.
struct ConfigEntry {
  std::string space;
  std::vector<PValue> p_values;
  std::optional<std::string> path;
  std::optional<std::string> language;
  std::optional<Index> dim;

  friend bool operator==(const ConfigEntry&, const ConfigEntry&) = default;
};

std::vector<ConfigEntry> parse_config(std::string_view text);
std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path);
std::string format_config(const std::vector<ConfigEntry>& entries);

// Entries describing cfg (space names and p-values only).
std::vector<ConfigEntry> config_entries(const PooledConfig& cfg);

// Loaded spaces keyed by name, shared across configs of one run.
using SpaceCache = std::map<std::string, std::shared_ptr<const EmbeddingSpace>>;

// Loads each named space once (paths relative to base_dir) and builds the
// config. An entry without path= must name a space already in the cache.
PooledConfig resolve_config(const std::vector<ConfigEntry>& entries,
                            const std::filesystem::path& base_dir, SpaceCache& cache);

}  // namespace pmean

#endif  // PMEAN_CONFIG_FILE_HPP
