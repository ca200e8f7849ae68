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

#include "pmean/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pmean/error.hpp"

namespace pmean {

std::vector<ConfigEntry> parse_config(std::string_view text) {
  std::vector<ConfigEntry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string field;
    if (!(fields >> field) || field.front() == '#') continue;

    ConfigEntry entry;
    bool have_p = false;
    do {
      auto eq = field.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == field.size())
        throw FormatError("expected key=value, got '" + field + "'", line_no);
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      try {
        if (key == "space") {
          entry.space = value;
        } else if (key == "p") {
          entry.p_values = parse_p_list(value);
          have_p = true;
        } else if (key == "path") {
          entry.path = value;
        } else if (key == "lang") {
          entry.language = value;
        } else if (key == "dim") {
          Index d = 0;
          auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), d);
          if (ec != std::errc() || ptr != value.data() + value.size() || d < 1)
            throw FormatError("invalid dim '" + value + "'");
          entry.dim = d;
        } else {
          throw FormatError("unknown key '" + key + "'");
        }
      } catch (const FormatError& e) {
        if (e.line() != 0) throw;
        throw FormatError(e.what(), line_no);
      }
    } while (fields >> field);

    if (entry.space.empty()) throw FormatError("missing space=<name>", line_no);
    if (!have_p) throw FormatError("missing p=<values>", line_no);
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const FormatError& e) {
    throw e.with_context(path.string());
  }
}

std::string format_config(const std::vector<ConfigEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += "space=" + e.space + " p=" + format_p_list(e.p_values);
    if (e.path) out += " path=" + *e.path;
    if (e.language) out += " lang=" + *e.language;
    if (e.dim) out += " dim=" + std::to_string(*e.dim);
    out += '\n';
  }
  return out;
}

std::vector<ConfigEntry> config_entries(const PooledConfig& cfg) {
  std::vector<ConfigEntry> entries;
  for (const auto& part : cfg.parts()) {
    ConfigEntry e;
    e.space = part.space->name();
    e.p_values = part.p_values;
    entries.push_back(std::move(e));
  }
  return entries;
}

PooledConfig resolve_config(const std::vector<ConfigEntry>& entries,
                            const std::filesystem::path& base_dir, SpaceCache& cache) {
  std::vector<PoolPart> parts;
  for (const auto& e : entries) {
    auto it = cache.find(e.space);
    if (it == cache.end()) {
      if (!e.path)
        throw FormatError("space '" + e.space + "' has no path= and was not loaded before");
      std::filesystem::path p(*e.path);
      if (p.is_relative()) p = base_dir / p;
      auto loaded = load_text_embeddings(p, e.dim, e.space, e.language);
      it = cache.emplace(e.space, std::make_shared<const EmbeddingSpace>(
                                      std::move(loaded.space)))
               .first;
    } else if (e.dim && *e.dim != it->second->dim()) {
      throw DimensionError("space '" + e.space + "' has dim " +
                           std::to_string(it->second->dim()) + ", config says " +
                           std::to_string(*e.dim));
    }
    parts.push_back({it->second, e.p_values});
  }
  return PooledConfig(std::move(parts));
}

}  // namespace pmean
