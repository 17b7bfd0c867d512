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

#include "qdea/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "qdea/analysis.hpp"
#include "qdea/error.hpp"
#include "qdea/io.hpp"
#include "qdea/lde.hpp"
#include "qdea/qresource.hpp"
#include "qdea/sampling.hpp"

namespace qdea {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::solve: return "solve";
    case Stage::analyze: return "analyze";
    case Stage::sample: return "sample";
    case Stage::resources: return "resources";
  }
  return "unknown";
}

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["tool"] = "qdea";
  j["tool_version"] = tool_version;
  j["scenario"] = scenario_name;
  j["scenario_sha256"] = scenario_hash;
  j["model_hash"] = model_hash;
  j["status"] = ok() ? "ok" : "failed";
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  j["stages"] = ordered_json::array();
  for (const auto& s : stages) {
    ordered_json r;
    r["stage"] = to_string(s.stage);
    r["status"] = s.status;
    r["wall_seconds"] = s.seconds;
    if (!s.message.empty()) r["message"] = s.message;
    j["stages"].push_back(r);
  }
  j["files"] = ordered_json::array();
  for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["decisions"] = decisions;
  j["warnings"] = warnings;
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

const char* kSignConvention = "largest-magnitude entry of each left vector positive, lowest index on ties";

struct Context {
  const Scenario& scenario;
  fs::path out;
  RunManifest& manifest;
  std::vector<std::string> written;

  std::unique_ptr<NetworkDocument> doc;
  RateMatrix q;
  InitialRequest initial;
  ProbVector x0;
  int warmup_steps = 0;
  int steps = 0;
  double h = 0.0;

  std::optional<HistoryMatrix> full;
  std::optional<HistoryMatrix> window;
};

std::string meta(const Context& ctx, const std::string& what, const std::string& extra) {
  std::ostringstream s;
  s << what << "; model_hash=" << ctx.doc->model_hash << "; h=" << format_double(ctx.h)
    << " days; time_unit=days";
  if (!extra.empty()) s << "; " << extra;
  return s.str();
}

void record(Context& ctx, const std::string& name) { ctx.written.push_back(name); }

void load_model(Context& ctx) {
  if (ctx.doc) return;
  const Scenario& sc = ctx.scenario;
  if (sc.inline_network) {
    ctx.doc = std::make_unique<NetworkDocument>(parse_network_json(*sc.inline_network, {}));
  } else {
    ctx.doc = std::make_unique<NetworkDocument>(parse_network(sc.network_path));
  }
  for (const auto& w : ctx.doc->warnings) ctx.manifest.warnings.push_back(w);
  ctx.manifest.model_hash = ctx.doc->model_hash;
  ctx.q = build_generator(ctx.doc->network, ctx.doc->model, sc.build);
  ctx.initial = sc.initial ? *sc.initial : ctx.doc->initial.value_or(InitialRequest{});
  ctx.x0 = resolve_initial(ctx.initial, ctx.doc->network, sc.build);
  ctx.steps = sc.time.analysis_steps();
  ctx.h = sc.time.step();
  ctx.warmup_steps = sc.time.warmup_steps();

  auto& d = ctx.manifest.decisions;
  d["model"] = to_string(ctx.doc->model.kind);
  d["initial"] = ctx.initial.describe();
  d["solver"] = "forward-euler recurrence";
  d["warmup_steps"] = ctx.warmup_steps;
  d["analysis_steps"] = ctx.steps;
  d["h"] = ctx.h;
  d["state_encoding"] = "little-endian base-q, node 0 lowest digit";
}

void ensure_history(Context& ctx) {
  load_model(ctx);
  if (ctx.window) return;
  const int total = ctx.warmup_steps + ctx.steps;
  const double start = ctx.scenario.time.t_start - ctx.warmup_steps * ctx.h;
  const OdeProblem problem = OdeProblem::markov(ctx.q, ctx.x0, total * ctx.h, total);
  HistoryMatrix full = euler_step_history(problem, start);
  full.model_hash = ctx.doc->model_hash;
  const StabilityReport stability = check_stability(problem, full);
  if (!stability.guaranteed_nonnegative) {
    ctx.manifest.warnings.push_back("h * max exit rate = " + format_double(stability.step_times_max_exit) +
                                    " exceeds 1; Euler iterates may leave the simplex");
  }
  if (stability.negative_entries) {
    ctx.manifest.warnings.push_back("history has negative entries (min " + format_double(stability.min_entry) + ")");
  }
  ctx.window = history_window(full, ctx.warmup_steps, ctx.steps + 1);
  ctx.window->model_hash = ctx.doc->model_hash;
  ctx.full = std::move(full);
}

void write_svg_heatmap(const fs::path& path, const HistoryMatrix& x) {
  // Rows are states, columns are time; colour is log10 probability.
  const Eigen::Index rows = x.states();
  const Eigen::Index cols = x.samples();
  const Eigen::Index stride = std::max<Eigen::Index>(1, cols / 512);
  const double cell_w = 1.0;
  const double cell_h = std::max(1.0, 512.0 / static_cast<double>(rows));
  const Eigen::Index shown = (cols + stride - 1) / stride;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << shown * cell_w << "\" height=\""
      << format_double(rows * cell_h) << "\" shape-rendering=\"crispEdges\">\n";
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < shown; ++c) {
      const double p = std::max(x.columns(r, c * stride), 1e-12);
      const double level = std::clamp((std::log10(p) + 12.0) / 12.0, 0.0, 1.0);
      const int v = static_cast<int>(std::lround(255.0 * (1.0 - level)));
      out << "<rect x=\"" << c << "\" y=\"" << format_double(r * cell_h) << "\" width=\"1\" height=\""
          << format_double(cell_h) << "\" fill=\"rgb(" << v << "," << v << ",255)\"/>\n";
    }
  }
  out << "</svg>\n";
  if (!out) throw IoError("failed writing " + path.string());
}

void write_svg_semilog(const fs::path& path, const Eigen::VectorXd& values) {
  const double width = 480.0, height = 320.0, pad = 20.0;
  const double top = std::log10(std::max(values.maxCoeff(), 1e-300));
  const double floor_value = std::max(values.minCoeff(), top > -300 ? std::pow(10.0, top - 16.0) : 1e-300);
  const double bottom = std::min(std::log10(floor_value), top - 1.0);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
      << "<polyline fill=\"none\" stroke=\"black\" points=\"";
  const Eigen::Index n = values.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = pad + (n > 1 ? (width - 2 * pad) * i / static_cast<double>(n - 1) : 0.0);
    const double lv = std::log10(std::max(values[i], floor_value));
    const double y = pad + (height - 2 * pad) * (top - lv) / (top - bottom);
    out << format_double(x) << "," << format_double(y) << (i + 1 < n ? " " : "");
  }
  out << "\"/>\n</svg>\n";
  if (!out) throw IoError("failed writing " + path.string());
}

void stage_solve(Context& ctx) {
  ensure_history(ctx);
  const auto& output = ctx.scenario.output;
  const HistoryMatrix& shown = output.include_warmup ? *ctx.full : *ctx.window;
  const std::string extra = "t_offset=" + format_double(shown.t_offset) + " days; initial=" + ctx.initial.describe() +
                            "; solver=forward-euler; values=probability";
  if (output.wants("csv")) {
    write_history_csv(ctx.out / "history.csv", shown, ctx.doc->network.node_count(),
                      ctx.doc->network.states_per_node(), meta(ctx, "history", extra));
    record(ctx, "history.csv");
  }
  if (output.wants("bin")) {
    write_history_binary(ctx.out / "history.bin", shown);
    record(ctx, "history.bin");
    record(ctx, "history.bin.json");
  }
  if (output.wants("svg")) {
    write_svg_heatmap(ctx.out / "history.svg", shown);
    record(ctx, "history.svg");
  }
}

void write_vectors(Context& ctx, const std::string& name, const Eigen::MatrixXd& m, bool state_rows,
                   const std::string& what) {
  std::vector<std::string> columns;
  if (state_rows) {
    columns = {"state", "label"};
  } else {
    columns = {"step", "t_days"};
  }
  for (Eigen::Index r = 0; r < m.cols(); ++r) columns.push_back((state_rows ? "u" : "v") + std::to_string(r + 1));
  CsvWriter csv(ctx.out / name, meta(ctx, what, std::string("sign=") + kSignConvention), columns);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    csv.cell(static_cast<long long>(i));
    if (state_rows) {
      csv.cell(state_label(static_cast<StateIndex>(i), ctx.doc->network.node_count(),
                           ctx.doc->network.states_per_node()));
    } else {
      csv.cell(ctx.window->time(i));
    }
    for (Eigen::Index r = 0; r < m.cols(); ++r) csv.cell(m(i, r));
    csv.end_row();
  }
  csv.close();
  record(ctx, name);
}

void write_power(Context& ctx, const std::string& name, const Eigen::VectorXd& axis, const Eigen::MatrixXd& power,
                 const std::string& axis_name, const std::vector<std::string>& series, const std::string& what,
                 const WindowPlan& plan) {
  std::vector<std::string> columns = {"bin", axis_name};
  columns.insert(columns.end(), series.begin(), series.end());
  const std::string extra = "window=" + to_string(plan.policy.kind) + "; first_sample=" + std::to_string(plan.first) +
                            "; kept=" + std::to_string(plan.kept) + "; length=" + std::to_string(plan.output_length) +
                            "; normalization=unitary";
  CsvWriter csv(ctx.out / name, meta(ctx, what, extra), columns);
  for (Eigen::Index b = 0; b < axis.size(); ++b) {
    csv.cell(static_cast<long long>(b)).cell(axis[b]);
    for (Eigen::Index s = 0; s < power.cols(); ++s) csv.cell(power(b, s));
    csv.end_row();
  }
  csv.close();
  record(ctx, name);
}

void stage_analyze(Context& ctx) {
  ensure_history(ctx);
  const AnalysisRequest req = ctx.scenario.analysis.value_or(AnalysisRequest{});
  const HistoryMatrix& x = *ctx.window;
  const SVDResult svd = svd_history(x, req.rank);
  if (svd.rank_clamped) ctx.manifest.warnings.push_back("requested rank exceeds min(N, T+1); clamped");

  auto& d = ctx.manifest.decisions;
  d["sign_convention"] = kSignConvention;
  d["haar_window"] = to_string(req.haar_window.kind);
  d["fourier_window"] = to_string(req.fourier_window.kind);
  d["transform_normalization"] = "unitary";

  const bool csv = ctx.scenario.output.wants("csv");
  const Eigen::VectorXd all_sigma = svd_history(x.columns, std::min(x.states(), x.samples())).sigma;
  const double total = all_sigma.squaredNorm();
  if (csv) {
    CsvWriter sv(ctx.out / "singular_values.csv",
                 meta(ctx, "singular values of the analysis window", "decomposition=thin SVD"),
                 {"index", "sigma", "energy_fraction", "cumulative_energy", "truncation_error"});
    double cumulative = 0.0;
    for (Eigen::Index i = 0; i < all_sigma.size(); ++i) {
      const double e = total > 0.0 ? all_sigma[i] * all_sigma[i] / total : 0.0;
      cumulative += e;
      sv.cell(static_cast<long long>(i + 1)).cell(all_sigma[i]).cell(e).cell(std::min(cumulative, 1.0));
      sv.cell(truncation_error(all_sigma, i + 1));
      sv.end_row();
    }
    sv.close();
    record(ctx, "singular_values.csv");

    write_vectors(ctx, "left_vectors.csv", svd.left, true, "left singular vectors");
    write_vectors(ctx, "right_vectors.csv", svd.right, false, "right singular vectors");
    const ScaledVectors scaled = scaled_singular_vectors(svd);
    write_vectors(ctx, "left_vectors_scaled.csv", scaled.left, true, "left singular vectors times sqrt(sigma)");
    write_vectors(ctx, "right_vectors_scaled.csv", scaled.right, false, "right singular vectors times sqrt(sigma)");
  }
  if (ctx.scenario.output.wants("svg")) {
    write_svg_semilog(ctx.out / "singular_values.svg", all_sigma);
    record(ctx, "singular_values.svg");
  }

  ordered_json summary;
  summary["rank"] = svd.rank();
  summary["rank_clamped"] = svd.rank_clamped;
  summary["frobenius_norm_sq"] = total;
  summary["effective_rank_0.99"] = effective_rank(all_sigma, 0.99);
  summary["effective_rank_0.9999"] = effective_rank(all_sigma, 0.9999);
  summary["sign_convention"] = kSignConvention;

  const NormalizedHistory normalized = normalize_history(x);
  std::vector<std::string> vector_names;
  for (Eigen::Index r = 0; r < svd.rank(); ++r) vector_names.push_back("v" + std::to_string(r + 1));
  for (const TransformKind kind : req.transforms) {
    const WindowPolicy policy = kind == TransformKind::fourier ? req.fourier_window : req.haar_window;
    const PowerSpectrum spectrum = power_spectrum(normalized, policy, kind);
    const Spectrum vectors = transform_right_vectors(svd, kind, x.h, policy);
    const bool fourier = kind == TransformKind::fourier;
    const std::string axis_name = fourier ? "frequency_per_day" : "support_days";
    if (csv) {
      const std::string base = fourier ? "spectrum" : "haar";
      write_power(ctx, base + ".csv", spectrum.axis, spectrum.power, axis_name, {"power"},
                  fourier ? "power spectrum of the normalized history" : "Haar power of the normalized history",
                  spectrum.window);
      const Eigen::MatrixXd coefficient_values =
          fourier ? Eigen::MatrixXd(vectors.coefficients.cwiseAbs2().transpose())
                  : Eigen::MatrixXd(vectors.coefficients.real().transpose());
      write_power(ctx, std::string("right_vectors_") + (fourier ? "fourier" : "haar") + ".csv", vectors.axis,
                  coefficient_values, axis_name, vector_names,
                  fourier ? "power of each right singular vector" : "Haar coefficients of each right singular vector",
                  vectors.window);
    }
    summary[to_string(kind)] = {{"window", to_string(spectrum.window.policy.kind)},
                                {"first_sample", spectrum.window.first},
                                {"kept", spectrum.window.kept},
                                {"length", spectrum.window.output_length}};
  }
  if (ctx.scenario.output.wants("json")) {
    write_json(ctx.out / "analysis.json", summary);
    record(ctx, "analysis.json");
  }
}

ObservableSpec make_observable(const ObservableRequest& req, const Network& network) {
  switch (req.kind) {
    case ObservableRequest::Kind::popcount: return ObservableSpec::popcount(network.node_count());
    case ObservableRequest::Kind::indicator: {
      if (req.index >= network.state_count()) throw ValidationError("indicator state out of range");
      return ObservableSpec::indicator(req.index);
    }
    case ObservableRequest::Kind::file: {
      std::ifstream in(req.path);
      if (!in) throw IoError("cannot read observable " + req.path.string());
      std::vector<double> values;
      double v = 0.0;
      while (in >> v) values.push_back(v);
      if (static_cast<StateIndex>(values.size()) != network.state_count()) {
        throw ValidationError("observable file must list one value per state");
      }
      return ObservableSpec::from_values(std::move(values), req.describe());
    }
  }
  throw ValidationError("unknown observable");
}

void stage_sample(Context& ctx) {
  ensure_history(ctx);
  const SamplingRequest req = ctx.scenario.sampling.value_or(SamplingRequest{});
  const Network& network = ctx.doc->network;
  const NetworkTransitions model(network, ctx.doc->model);
  const InitialSampler initial =
      ctx.initial.kind == InitialRequest::Kind::product && network.states_per_node() == 2
          ? InitialSampler::product(ProductInitial::binary(
                ctx.initial.p.size() == 1
                    ? std::vector<double>(static_cast<std::size_t>(network.node_count()), ctx.initial.p.front())
                    : ctx.initial.p))
          : InitialSampler::from_distribution(ctx.x0);
  SamplingOptions options;
  options.threads = req.threads;

  const HistoryMatrix& full = *ctx.full;
  const Eigen::Index last = full.samples() - 1;
  const double horizon = last * full.h;

  auto& d = ctx.manifest.decisions;
  d["rng"] = "philox4x32-10, sample s uses stream s";
  d["sampler"] = "exact-event (Gillespie)";
  d["sampling_seed"] = req.seed;

  CsvWriter csv(ctx.out / "estimates.csv",
                meta(ctx, "Monte Carlo estimates at t_end", "rng=philox4x32-10; sampler=exact-event; exact=euler history"),
                {"observable", "estimator", "t_days", "second_t_days", "estimate", "standard_error", "samples", "seed",
                 "exact"});
  const ObservableSpec* first_observable = nullptr;
  std::vector<ObservableSpec> specs;
  for (const auto& o : req.observables) specs.push_back(make_observable(o, network));
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto est = estimate_observable_mc(model, initial, specs[i], horizon, req.samples, req.seed, options);
    csv.cell(req.observables[i].describe()).cell(est.estimator).cell(full.time(last)).cell(full.time(last));
    csv.cell(est.estimate).cell(est.standard_error).cell(static_cast<long long>(est.samples));
    csv.cell(std::to_string(est.seed)).cell(exact_observable(full, specs[i], last));
    csv.end_row();
    if (!first_observable) first_observable = &specs[i];
  }
  if (req.gram_pairs > 0) {
    const int step = static_cast<int>(last);
    const auto est = collision_gram_estimate(model, initial, step, step, req.gram_pairs, full.h, req.seed, options);
    csv.cell(std::string("gram")).cell(est.estimator).cell(full.time(last)).cell(full.time(last));
    csv.cell(est.estimate).cell(est.standard_error).cell(static_cast<long long>(est.samples));
    csv.cell(std::to_string(est.seed)).cell(full.columns.col(last).squaredNorm());
    csv.end_row();
  }
  csv.close();
  record(ctx, "estimates.csv");

  if (!req.convergence_sizes.empty() && first_observable) {
    const double exact = exact_observable(full, *first_observable, last);
    const auto points = convergence_study(model, initial, *first_observable, horizon, exact, req.convergence_sizes,
                                          req.convergence_replicates, req.seed, options);
    std::string slope = "n/a";
    if (points.size() >= 2) slope = format_double(loglog_slope(points));
    CsvWriter conv(ctx.out / "convergence.csv",
                   meta(ctx, "RMSE against the Euler history", "observable=" + first_observable->name +
                                                                  "; replicates=" +
                                                                  std::to_string(req.convergence_replicates) +
                                                                  "; loglog_slope=" + slope),
                   {"samples", "rmse"});
    for (const auto& p : points) conv.cell(static_cast<long long>(p.samples)).cell(p.rmse).end_row();
    conv.close();
    record(ctx, "convergence.csv");
  }
}

void stage_resources(Context& ctx) {
  load_model(ctx);
  const ResourceRequest req = ctx.scenario.resources.value_or(ResourceRequest{});
  ResourceInputs in;
  in.epsilon = req.epsilon;
  in.t_max = (ctx.warmup_steps + ctx.steps) * ctx.h;
  in.m_norm = matrix_norm(ctx.q.matrix(), req.norm);
  in.sparsity = static_cast<double>(std::max<Eigen::Index>(1, ctx.q.sparsity()));
  in.x0_norm = ctx.x0.values().norm();
  in.c_norm = 0.0;
  in.dimension = static_cast<double>(ctx.q.dimension());
  in.nodes = ctx.doc->network.node_count();
  in.states_per_node = ctx.doc->network.states_per_node();
  std::string kappa_source = "user";
  if (req.kappa) {
    in.kappa = *req.kappa;
  } else if (ctx.q.dimension() <= 64) {
    in.kappa = eigenvector_condition_number(ctx.q.dense());
    kappa_source = "eigenvector matrix";
  } else {
    throw ValidationError("kappa must be supplied (resources.kappa or --kappa) for dimension above 64");
  }
  const ResourceEstimate est = estimate_resources(in);
  ctx.manifest.decisions["norm"] = to_string(req.norm);
  ctx.manifest.decisions["kappa_source"] = kappa_source;

  ordered_json j;
  j["inputs"] = {{"epsilon", in.epsilon},     {"t_max_days", in.t_max},    {"norm_kind", to_string(in.m_norm.kind)},
                 {"norm", in.m_norm.value},    {"sparsity", in.sparsity},   {"kappa", in.kappa},
                 {"kappa_source", kappa_source}, {"x0_norm", in.x0_norm},   {"c_norm", in.c_norm},
                 {"dimension", in.dimension},  {"nodes", in.nodes},         {"states_per_node", in.states_per_node}};
  j["T"] = est.steps;
  j["scenario_steps"] = ctx.warmup_steps + ctx.steps;
  j["truncation_order"] = {{"k", est.truncation.k},
                           {"formula_value", est.truncation.formula_value},
                           {"binding", to_string(est.truncation.binding)}};
  j["delta"] = est.delta;
  j["delta_ceiling"] = delta_ceiling();
  j["success_probability"] = {{"pre_projection", est.success.pre_projection},
                              {"post_projection", est.success.post_projection},
                              {"series_factor", est.success.series_factor},
                              {"exact_series", est.success.exact_series},
                              {"garbage_constant", est.success.garbage_constant},
                              {"garbage_bound", est.success.garbage_bound}};
  j["taylor_error_bound_at_T"] =
      taylor_error_bound(in.kappa, est.steps, est.truncation.k, in.x0_norm, in.t_max * in.c_norm);
  j["gate_count_proxy"] = {{"value", est.gate_count},
                           {"expression", "kappa k^2 t ||M|| s ln^3(kappa k t ||M|| s N / delta)"},
                           {"note", "order-of-magnitude proxy with unit constants"}};
  j["qubits"] = {{"state", est.qubits.state},
                 {"time", est.qubits.time},
                 {"taylor", est.qubits.taylor},
                 {"ancilla", est.qubits.ancilla},
                 {"total", est.qubits.total()}};
  if (ctx.scenario.output.wants("json") || ctx.scenario.output.wants("csv")) {
    write_json(ctx.out / "resources.json", j);
    record(ctx, "resources.json");
  }
}

void inventory(Context& ctx) {
  std::sort(ctx.written.begin(), ctx.written.end());
  ctx.written.erase(std::unique(ctx.written.begin(), ctx.written.end()), ctx.written.end());
  for (const auto& name : ctx.written) {
    const fs::path p = ctx.out / name;
    if (!fs::exists(p)) continue;
    ctx.manifest.files.push_back({name, sha256_file(p), fs::file_size(p)});
  }
}

}  // namespace

RunManifest run_pipeline(const Scenario& scenario, const std::vector<Stage>& stages) {
  RunManifest manifest;
  manifest.scenario_name = scenario.name;
  manifest.scenario_hash = scenario.source_hash;
  Context ctx{scenario, scenario.output.dir, manifest, {}, {}, {}, {}, {}, 0, 0, 0.0, {}, {}};

  std::vector<Stage> ordered = stages;
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  try {
    fs::create_directories(ctx.out);
  } catch (const fs::filesystem_error& e) {
    manifest.exit_code = IoError("").exit_code();
    manifest.error = "cannot create output directory " + ctx.out.string() + ": " + e.what();
    return manifest;
  }

  bool failed = false;
  for (const Stage stage : ordered) {
    StageRecord rec{stage, "skipped", 0.0, {}};
    if (!failed) {
      const auto start = Clock::now();
      try {
        scenario.validate();
        switch (stage) {
          case Stage::solve: stage_solve(ctx); break;
          case Stage::analyze: stage_analyze(ctx); break;
          case Stage::sample: stage_sample(ctx); break;
          case Stage::resources: stage_resources(ctx); break;
        }
        rec.status = "ok";
      } catch (const Error& e) {
        rec.status = "failed";
        rec.message = e.what();
        manifest.exit_code = e.exit_code();
        manifest.error = e.what();
        failed = true;
      } catch (const fs::filesystem_error& e) {
        rec.status = "failed";
        rec.message = e.what();
        manifest.exit_code = IoError("").exit_code();
        manifest.error = e.what();
        failed = true;
      }
      rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    }
    manifest.stages.push_back(rec);
  }

  inventory(ctx);
  try {
    write_json(ctx.out / "manifest.json", manifest.to_json());
  } catch (const Error& e) {
    if (manifest.ok()) {
      manifest.exit_code = e.exit_code();
      manifest.error = e.what();
    }
  }
  return manifest;
}

}  // namespace qdea
