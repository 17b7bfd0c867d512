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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdea/error.hpp"
#include "qdea/pipeline.hpp"
#include "qdea/scenario.hpp"

namespace {

struct Overrides {
  std::string scenario;
  std::string network;
  std::optional<double> t0, t1, h, warmup;
  std::optional<int> steps;
  std::string initial;
  std::optional<long> rank;
  std::vector<std::string> transforms;
  std::string window;
  std::optional<std::uint64_t> samples, seed, gram_pairs;
  std::vector<std::string> observables;
  std::string out;
  std::vector<std::string> formats;
  std::optional<double> epsilon, kappa;
  std::string norm;
  std::optional<int> threads;
  bool include_warmup = false;
  bool allow_large = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool needs_source) {
  auto* scenario = cmd->add_option("--scenario", o.scenario, "Scenario document (JSON)");
  auto* network = cmd->add_option("--network", o.network, "Network/model document (JSON)");
  if (needs_source) {
    scenario->excludes(network);
  }
  cmd->add_option("--t0", o.t0, "Start of the analysis window (days)");
  cmd->add_option("--t1", o.t1, "End of the analysis window (days)");
  auto* steps = cmd->add_option("--steps", o.steps, "Euler steps across the analysis window");
  auto* h = cmd->add_option("--h", o.h, "Step size (days)");
  steps->excludes(h);
  cmd->add_option("--warmup", o.warmup, "Duration simulated before t0 (days; default t0)");
  cmd->add_option("--initial", o.initial, "product:p | uniform | point:k | file:PATH");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--format", o.formats, "Output formats: csv, json, svg, bin")->delimiter(',');
  cmd->add_flag("--include-warmup", o.include_warmup, "Write the warm-up segment into history outputs");
  cmd->add_flag("--allow-large", o.allow_large, "Lift the default state-space cap");
}

void add_analysis(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--rank", o.rank, "Number of singular triplets to keep");
  cmd->add_option("--transform", o.transforms, "fft, haar")->delimiter(',');
  cmd->add_option("--window", o.window, "Haar window policy: trunc-tail, trunc-head, zero-pad");
}

void add_sampling(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--samples", o.samples, "Monte Carlo sample count");
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--observable", o.observables, "popcount | indicator:k | file:PATH");
  cmd->add_option("--gram-pairs", o.gram_pairs, "Sample pairs for the collision Gram estimator");
  cmd->add_option("--threads", o.threads, "Worker threads");
}

void add_resources(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--epsilon", o.epsilon, "Target precision");
  cmd->add_option("--kappa", o.kappa, "Eigenvector condition number");
  cmd->add_option("--norm", o.norm, "Matrix norm: one, spectral");
}

qdea::Scenario build_scenario(const Overrides& o, const std::optional<std::string>& demo) {
  qdea::Scenario s;
  if (demo) {
    s = qdea::parse_scenario(qdea::bundled_scenario(*demo));
    s.output.dir = "out/" + *demo;
  } else if (!o.scenario.empty()) {
    s = qdea::parse_scenario(o.scenario);
  } else if (!o.network.empty()) {
    s.name = "cli";
    s.time.steps = 1027;
  } else {
    throw qdea::ValidationError("need --scenario or --network");
  }
  if (!o.network.empty()) {
    s.network_path = o.network;
    s.inline_network.reset();
  }
  if (o.t0) s.time.t_start = *o.t0;
  if (o.t1) s.time.t_end = *o.t1;
  if (o.steps) {
    s.time.steps = *o.steps;
    s.time.h.reset();
  }
  if (o.h) {
    s.time.h = *o.h;
    s.time.steps.reset();
  }
  if (o.warmup) s.time.warmup = *o.warmup;
  if (!o.initial.empty()) s.initial = qdea::InitialRequest::parse(o.initial);

  if (o.rank || !o.transforms.empty() || !o.window.empty()) {
    qdea::AnalysisRequest a = s.analysis.value_or(qdea::AnalysisRequest{});
    if (o.rank) {
      if (*o.rank < 1) throw qdea::ValidationError("--rank must be at least 1");
      a.rank = *o.rank;
    }
    if (!o.transforms.empty()) {
      a.transforms.clear();
      for (const auto& t : o.transforms) {
        if (t == "fft" || t == "fourier") {
          a.transforms.push_back(qdea::TransformKind::fourier);
        } else if (t == "haar") {
          a.transforms.push_back(qdea::TransformKind::haar);
        } else {
          throw qdea::ValidationError("unknown transform '" + t + "' (expected fft or haar)");
        }
      }
    }
    if (!o.window.empty()) a.haar_window = qdea::WindowPolicy::parse(o.window);
    s.analysis = a;
  }

  if (o.samples || o.seed || !o.observables.empty() || o.gram_pairs || o.threads) {
    qdea::SamplingRequest m = s.sampling.value_or(qdea::SamplingRequest{});
    if (o.samples) m.samples = *o.samples;
    if (o.seed) m.seed = *o.seed;
    if (o.gram_pairs) m.gram_pairs = *o.gram_pairs;
    if (o.threads) m.threads = *o.threads;
    if (!o.observables.empty()) {
      m.observables.clear();
      for (const auto& obs : o.observables) m.observables.push_back(qdea::ObservableRequest::parse(obs));
    }
    s.sampling = m;
  }

  if (o.epsilon || o.kappa || !o.norm.empty()) {
    qdea::ResourceRequest r = s.resources.value_or(qdea::ResourceRequest{});
    if (o.epsilon) r.epsilon = *o.epsilon;
    if (o.kappa) r.kappa = *o.kappa;
    if (!o.norm.empty()) r.norm = qdea::norm_kind_from_string(o.norm);
    s.resources = r;
  }

  if (!o.out.empty()) s.output.dir = o.out;
  if (!o.formats.empty()) s.output.formats = o.formats;
  if (o.include_warmup) s.output.include_warmup = true;
  if (o.allow_large) s.build.allow_large = true;
  s.validate();
  return s;
}

std::vector<qdea::Stage> requested_stages(const qdea::Scenario& s) {
  std::vector<qdea::Stage> stages = {qdea::Stage::solve};
  if (s.analysis) stages.push_back(qdea::Stage::analyze);
  if (s.sampling) stages.push_back(qdea::Stage::sample);
  if (s.resources) stages.push_back(qdea::Stage::resources);
  return stages;
}

int execute(const Overrides& o, const std::optional<std::string>& demo, std::optional<std::vector<qdea::Stage>> stages) {
  const qdea::Scenario scenario = build_scenario(o, demo);
  const auto manifest = qdea::run_pipeline(scenario, stages ? *stages : requested_stages(scenario));
  for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
  if (!manifest.ok()) {
    std::cerr << "error: " << manifest.error << '\n';
    return manifest.exit_code;
  }
  for (const auto& f : manifest.files) std::cout << (scenario.output.dir / f.path).string() << '\n';
  std::cout << (scenario.output.dir / "manifest.json").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdea: history-state analysis of continuous-time Markov chain simulations"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", qdea::kToolVersion);

  Overrides o;
  std::string demo_name;
  auto* solve = app.add_subcommand("solve", "Compute the Euler history and write history outputs");
  auto* analyze = app.add_subcommand("analyze", "SVD, Fourier and Haar analysis of the history");
  auto* sample = app.add_subcommand("sample", "Monte Carlo estimates from the exact-event sampler");
  auto* resources = app.add_subcommand("resources", "Quantum resource estimates");
  auto* run = app.add_subcommand("run", "Run every stage the scenario requests");
  auto* demo = app.add_subcommand("demo", "Run a bundled scenario");
  demo->add_option("name", demo_name, "fig2, fig3, fig4, opinion or distancing")->required();

  for (auto* cmd : {solve, analyze, sample, resources, run, demo}) {
    add_common(cmd, o, cmd != demo);
    add_analysis(cmd, o);
    add_sampling(cmd, o);
    add_resources(cmd, o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return execute(o, std::nullopt, std::vector<qdea::Stage>{qdea::Stage::solve});
    if (*analyze) return execute(o, std::nullopt, std::vector<qdea::Stage>{qdea::Stage::analyze});
    if (*sample) return execute(o, std::nullopt, std::vector<qdea::Stage>{qdea::Stage::sample});
    if (*resources) return execute(o, std::nullopt, std::vector<qdea::Stage>{qdea::Stage::resources});
    if (*run) return execute(o, std::nullopt, std::nullopt);
    if (*demo) return execute(o, demo_name, std::nullopt);
  } catch (const qdea::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  }
  return 2;
}
