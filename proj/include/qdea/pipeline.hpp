// Copyright 2026 The qdea Authors
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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdea/scenario.hpp"

namespace qdea {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Stage { solve, analyze, sample, resources };

std::string to_string(Stage stage);

struct StageRecord {
  Stage stage = Stage::solve;
  std::string status;  ///< "ok", "failed" or "skipped"
  double seconds = 0.0;
  std::string message;
};

struct FileRecord {
  std::string path;  ///< relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string scenario_name;
  std::string scenario_hash;
  std::string model_hash;
  std::vector<StageRecord> stages;
  std::vector<FileRecord> files;
  nlohmann::ordered_json decisions = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;
  int exit_code = 0;
  std::string error;

  bool ok() const { return exit_code == 0; }
  nlohmann::ordered_json to_json() const;
};

/// Runs the requested stages in solve, analyze, sample, resources order and
/// writes `manifest.json` into the output directory, even when a stage fails.
/// The failure is reported through `exit_code` and `error`.
RunManifest run_pipeline(const Scenario& scenario, const std::vector<Stage>& stages);

}  // namespace qdea
