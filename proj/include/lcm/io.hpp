// Copyright 2026 The lcmatter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LCM_IO_HPP
#define LCM_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "lcm/scenarios.hpp"

namespace lcm {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char *kArtifactVersion = "0.1.0";

/// Schema violation; the message names the offending field or line.
class ConfigError : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

ScenarioConfig parse_config(const std::filesystem::path &path);
ScenarioConfig parse_config_text(const std::string &text, const std::string &source = "<config>");
ScenarioConfig config_from_json(const nlohmann::json &doc);
nlohmann::json config_to_json(const ScenarioConfig &config);

/// Named cut of the config, or "flat:T", or "boost:V:T0,J0".
Cut parse_cut_spec(const std::string &spec, const ScenarioConfig &config);

void write_field_csv(const MatterField &field, std::ostream &out);
MatterField read_field_csv(std::istream &in);
/// Plain P2, one pixel per grid event, highest layer on the top row.
void write_pgm(const MatterField &field, std::ostream &out);

nlohmann::json report_to_json(const ScenarioReport &report);
nlohmann::json table_to_json(const std::vector<ComparisonRow> &rows);

/// 64-bit FNV-1a, hex encoded.
std::string digest(const std::string &bytes);

struct RunManifest {
    std::string command;
    std::string config_digest;
    std::vector<std::uint64_t> seeds;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<std::filesystem::path> outputs;

    /// Includes size and digest of every output file.
    nlohmann::json to_json() const;
    void write(const std::filesystem::path &path) const;
};

/// Writes text to a file, throwing on failure.
void write_file(const std::filesystem::path &path, const std::string &text);
std::string read_file(const std::filesystem::path &path);

}  // namespace lcm

#endif
