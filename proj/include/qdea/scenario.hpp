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
#include <variant>
#include <vector>

#include <json.hpp>

#include "qdea/analysis.hpp"
#include "qdea/models.hpp"
#include "qdea/qresource.hpp"

namespace qdea {

/// Initial distribution request, as written in documents and on the command
/// line ("product:0.35", "uniform", "point:5", "file:PATH").
struct InitialRequest {
  enum class Kind { product, uniform, point, file };
  Kind kind = Kind::uniform;
  std::vector<double> p;  ///< product: one value for all nodes, or one per node
  StateIndex index = 0;   ///< point
  std::filesystem::path path;  ///< file: one probability per line, or a JSON array

  static InitialRequest parse(const std::string& text);
  static InitialRequest from_json(const nlohmann::json& j, const std::filesystem::path& base);
  std::string describe() const;
};

ProbVector resolve_initial(const InitialRequest& request, const Network& network,
                           const BuildOptions& options = {});

struct NetworkDocument {
  Network network;
  ModelSpec model;
  std::optional<InitialRequest> initial;
  std::vector<std::string> warnings;
  std::string model_hash;  ///< SHA-256 prefix of the canonical network and model
};

/// Parses and validates a network/model document. Duplicate edges are merged
/// by summing their rates, with a warning.
NetworkDocument parse_network(const std::filesystem::path& path);
NetworkDocument parse_network_json(const nlohmann::json& doc, const std::filesystem::path& base);

std::string canonical_model_hash(const Network& network, const ModelSpec& model);

struct TimeWindow {
  double t_start = 1.0;
  double t_end = 2.0;
  std::optional<int> steps;
  std::optional<double> h;
  /// Duration simulated before t_start; the initial distribution sits at
  /// t_start - warmup. Defaults to t_start.
  std::optional<double> warmup;

  int analysis_steps() const;
  double step() const;
  int warmup_steps() const;
  double effective_warmup() const { return warmup.value_or(t_start); }
};

struct AnalysisRequest {
  std::optional<Eigen::Index> rank;
  std::vector<TransformKind> transforms = {TransformKind::fourier, TransformKind::haar};
  WindowPolicy haar_window = WindowPolicy::haar_default();
  WindowPolicy fourier_window = WindowPolicy::fourier_default();
};

struct ObservableRequest {
  enum class Kind { popcount, indicator, file };
  Kind kind = Kind::popcount;
  StateIndex index = 0;
  std::filesystem::path path;

  static ObservableRequest parse(const std::string& text);
  std::string describe() const;
};

struct SamplingRequest {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  std::vector<ObservableRequest> observables = {ObservableRequest{}};
  std::uint64_t gram_pairs = 0;
  std::vector<std::uint64_t> convergence_sizes;
  int convergence_replicates = 10;
  int threads = 1;
};

struct ResourceRequest {
  double epsilon = 0.01;
  std::optional<double> kappa;
  NormKind norm = NormKind::one;
};

struct OutputRequest {
  std::filesystem::path dir = "out";
  std::vector<std::string> formats = {"csv", "json"};
  bool include_warmup = false;

  bool wants(const std::string& format) const;
};

struct Scenario {
  std::string name;
  std::filesystem::path network_path;
  std::optional<nlohmann::json> inline_network;
  TimeWindow time;
  std::optional<InitialRequest> initial;
  std::optional<AnalysisRequest> analysis;
  std::optional<SamplingRequest> sampling;
  std::optional<ResourceRequest> resources;
  OutputRequest output;
  BuildOptions build;
  std::string source_hash;  ///< SHA-256 of the scenario document text

  void validate() const;
};

Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_json(const nlohmann::json& doc, const std::filesystem::path& base);

/// Directory holding the bundled networks and scenarios.
std::filesystem::path bundled_data_dir();
std::filesystem::path bundled_scenario(const std::string& name);

}  // namespace qdea
