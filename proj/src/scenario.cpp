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

#include "qdea/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "qdea/error.hpp"
#include "qdea/io.hpp"

namespace qdea {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw ValidationError("missing field '" + key + "' in " + context);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("field '" + key + "' in " + context + " has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_field<T>(obj, key, context);
}

fs::path resolve_relative(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " '" + text + "'");
  }
}

StateIndex parse_index(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " '" + text + "'");
  }
}

std::vector<double> read_probability_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read initial distribution " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    return read_json_file(path).get<std::vector<double>>();
  }
  std::vector<double> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.push_back(parse_number(line.substr(b, e - b + 1), "probability"));
  }
  return out;
}

WindowPolicy parse_window(const std::string& name) { return WindowPolicy::parse(name); }

TransformKind parse_transform(const std::string& name) {
  if (name == "fft" || name == "fourier") return TransformKind::fourier;
  if (name == "haar") return TransformKind::haar;
  throw ValidationError("unknown transform '" + name + "' (expected fft or haar)");
}

}  // namespace

InitialRequest InitialRequest::parse(const std::string& text) {
  InitialRequest r;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "uniform") {
    r.kind = Kind::uniform;
  } else if (head == "product") {
    r.kind = Kind::product;
    std::stringstream ss(tail);
    std::string item;
    while (std::getline(ss, item, ',')) r.p.push_back(parse_number(item, "product probability"));
    if (r.p.empty()) throw ValidationError("product initial needs a probability, e.g. product:0.35");
  } else if (head == "point") {
    r.kind = Kind::point;
    r.index = parse_index(tail, "point-mass index");
  } else if (head == "file") {
    r.kind = Kind::file;
    r.path = tail;
    if (tail.empty()) throw ValidationError("file initial needs a path, e.g. file:x0.txt");
  } else {
    throw ValidationError("unknown initial distribution '" + text + "'");
  }
  return r;
}

InitialRequest InitialRequest::from_json(const json& j, const fs::path& base) {
  require_known_keys(j, {"kind", "p", "index", "path"}, "initial");
  InitialRequest r;
  const auto kind = get_field<std::string>(j, "kind", "initial");
  if (kind == "uniform") {
    r.kind = Kind::uniform;
  } else if (kind == "product") {
    r.kind = Kind::product;
    if (!j.contains("p")) throw ValidationError("missing field 'p' in initial");
    r.p = j.at("p").is_array() ? get_field<std::vector<double>>(j, "p", "initial")
                               : std::vector<double>{get_field<double>(j, "p", "initial")};
  } else if (kind == "point") {
    r.kind = Kind::point;
    r.index = get_field<StateIndex>(j, "index", "initial");
  } else if (kind == "file") {
    r.kind = Kind::file;
    r.path = resolve_relative(base, get_field<std::string>(j, "path", "initial"));
  } else {
    throw ValidationError("unknown initial kind '" + kind + "'");
  }
  return r;
}

std::string InitialRequest::describe() const {
  switch (kind) {
    case Kind::uniform: return "uniform";
    case Kind::point: return "point:" + std::to_string(index);
    case Kind::file: return "file:" + path.string();
    case Kind::product: {
      std::string s = "product:";
      for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + format_double(p[i]);
      return s;
    }
  }
  return "unknown";
}

ProbVector resolve_initial(const InitialRequest& request, const Network& network, const BuildOptions& options) {
  switch (request.kind) {
    case InitialRequest::Kind::uniform:
      return make_initial_distribution(UniformInitial{network.state_count()});
    case InitialRequest::Kind::point:
      return make_initial_distribution(PointMassInitial{request.index, network.state_count()});
    case InitialRequest::Kind::file: {
      const auto values = read_probability_file(request.path);
      if (static_cast<StateIndex>(values.size()) != network.state_count()) {
        throw ValidationError("initial distribution file has " + std::to_string(values.size()) +
                              " entries, expected " + std::to_string(network.state_count()));
      }
      return ProbVector(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    case InitialRequest::Kind::product: {
      if (network.states_per_node() != 2) {
        throw ValidationError("product:p initial distributions need binary nodes");
      }
      std::vector<double> p = request.p;
      if (p.size() == 1) p.assign(static_cast<std::size_t>(network.node_count()), p.front());
      if (static_cast<int>(p.size()) != network.node_count()) {
        throw ValidationError("product initial needs one probability or one per node");
      }
      return make_initial_distribution(ProductInitial::binary(p), options);
    }
  }
  throw ValidationError("unknown initial distribution");
}

std::string canonical_model_hash(const Network& network, const ModelSpec& model) {
  std::vector<std::tuple<int, int, double>> edges;
  for (const auto& e : network.edges()) edges.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v), e.rate);
  std::sort(edges.begin(), edges.end());
  std::ostringstream s;
  s << "n=" << network.node_count() << ";q=" << network.states_per_node() << ";kind=" << to_string(model.kind)
    << ";r=" << format_double(model.recovery_rate);
  if (model.distancing) {
    s << ";threshold=" << model.distancing->threshold << ";factor=" << format_double(model.distancing->factor);
  }
  for (const auto& [u, v, r] : edges) s << ";" << u << "-" << v << ":" << format_double(r);
  return sha256_hex(s.str()).substr(0, 16);
}

NetworkDocument parse_network_json(const json& doc, const fs::path& base) {
  require_known_keys(doc, {"version", "name", "description", "q", "n", "edges", "model", "initial"}, "network document");
  const auto version = optional_field<int>(doc, "version", "network document").value_or(1);
  if (version != 1) throw ValidationError("unsupported network document version " + std::to_string(version));
  const int q = get_field<int>(doc, "q", "network document");
  const int n = get_field<int>(doc, "n", "network document");

  std::vector<std::string> warnings;
  std::map<std::pair<int, int>, double> merged;
  std::vector<std::pair<int, int>> order;
  if (doc.contains("edges")) {
    const auto& edges = doc.at("edges");
    if (!edges.is_array()) throw ValidationError("field 'edges' in network document must be an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string ctx = "edges[" + std::to_string(i) + "]";
      require_known_keys(edges[i], {"u", "v", "rate"}, ctx);
      const int u = get_field<int>(edges[i], "u", ctx);
      const int v = get_field<int>(edges[i], "v", ctx);
      const double rate = get_field<double>(edges[i], "rate", ctx);
      if (u == v) throw ValidationError(ctx + ": self-loop on node " + std::to_string(u));
      const auto key = std::minmax(u, v);
      auto [it, inserted] = merged.emplace(key, rate);
      if (inserted) {
        order.push_back(key);
      } else {
        it->second += rate;
        warnings.push_back("duplicate edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                           ") merged by summing rates");
      }
    }
  }
  std::vector<Edge> edges;
  for (const auto& key : order) edges.push_back({key.first, key.second, merged.at(key)});
  Network network(n, q, std::move(edges));

  ModelSpec model;
  const json model_doc = doc.contains("model") ? doc.at("model") : json::object({{"kind", "sis"}});
  require_known_keys(model_doc, {"kind", "r_IS", "distancing"}, "model");
  model.kind = model_kind_from_string(optional_field<std::string>(model_doc, "kind", "model").value_or("sis"));
  model.recovery_rate = optional_field<double>(model_doc, "r_IS", "model").value_or(0.33);
  if (model_doc.contains("distancing")) {
    const auto& d = model_doc.at("distancing");
    require_known_keys(d, {"threshold", "factor"}, "model.distancing");
    model.distancing = Distancing{get_field<int>(d, "threshold", "model.distancing"),
                                  get_field<double>(d, "factor", "model.distancing")};
  }
  if (q != 2 && q != 3) throw ValidationError("built-in model kinds need q in {2, 3}, got " + std::to_string(q));
  const int expected_q = model.kind == ModelKind::opinion ? 3 : 2;
  if (q != expected_q) {
    throw ValidationError("model kind " + to_string(model.kind) + " needs q = " + std::to_string(expected_q));
  }
  if (model.kind == ModelKind::sis_distancing && !model.distancing) {
    throw ValidationError("missing field 'distancing' in model");
  }

  NetworkDocument out{std::move(network), model, std::nullopt, std::move(warnings), {}};
  if (doc.contains("initial")) out.initial = InitialRequest::from_json(doc.at("initial"), base);
  out.model_hash = canonical_model_hash(out.network, out.model);
  return out;
}

NetworkDocument parse_network(const fs::path& path) {
  return parse_network_json(read_json_file(path), path.parent_path());
}

int TimeWindow::analysis_steps() const {
  const double span = t_end - t_start;
  if (steps) return *steps;
  if (h) return static_cast<int>(std::llround(span / *h));
  throw ValidationError("time window needs 'steps' or 'h'");
}

double TimeWindow::step() const { return (t_end - t_start) / analysis_steps(); }

int TimeWindow::warmup_steps() const { return static_cast<int>(std::llround(effective_warmup() / step())); }

bool OutputRequest::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

void Scenario::validate() const {
  if (!(time.t_end > time.t_start) || time.t_start < 0.0) {
    throw ValidationError("time window needs t_end > t_start >= 0");
  }
  if (time.steps && *time.steps < 1) throw ValidationError("steps must be at least 1");
  if (time.h && !(*time.h > 0.0)) throw ValidationError("h must be positive");
  if (!time.steps && !time.h) throw ValidationError("time window needs 'steps' or 'h'");
  if (time.analysis_steps() < 1) throw ValidationError("time window is shorter than one step");
  if (time.warmup && *time.warmup < 0.0) throw ValidationError("warmup must be nonnegative");
  if (network_path.empty() && !inline_network) throw ValidationError("scenario needs a network");
  if (sampling && sampling->samples < 2) throw ValidationError("sampling needs at least two samples");
  if (resources && !(resources->epsilon > 0.0 && resources->epsilon < 1.0)) {
    throw ValidationError("resources.epsilon must lie in (0, 1)");
  }
  for (const auto& f : output.formats) {
    if (f != "csv" && f != "json" && f != "svg" && f != "bin") {
      throw ValidationError("unknown output format '" + f + "' (expected csv, json, svg or bin)");
    }
  }
}

ObservableRequest ObservableRequest::parse(const std::string& text) {
  ObservableRequest r;
  if (text == "popcount") return r;
  if (text.rfind("indicator:", 0) == 0) {
    r.kind = Kind::indicator;
    r.index = parse_index(text.substr(10), "indicator state");
    return r;
  }
  if (text.rfind("file:", 0) == 0) {
    r.kind = Kind::file;
    r.path = text.substr(5);
    return r;
  }
  throw ValidationError("unknown observable '" + text + "' (expected popcount, indicator:k or file:PATH)");
}

std::string ObservableRequest::describe() const {
  switch (kind) {
    case Kind::popcount: return "popcount";
    case Kind::indicator: return "indicator:" + std::to_string(index);
    case Kind::file: return "file:" + path.string();
  }
  return "unknown";
}

Scenario parse_scenario_json(const json& doc, const fs::path& base) {
  require_known_keys(doc, {"version", "name", "description", "network", "time", "initial", "analysis",
                           "sampling", "resources", "output", "limits"},
                     "scenario");
  Scenario s;
  const auto version = optional_field<int>(doc, "version", "scenario").value_or(1);
  if (version != 1) throw ValidationError("unsupported scenario version " + std::to_string(version));
  s.name = optional_field<std::string>(doc, "name", "scenario").value_or("scenario");

  if (!doc.contains("network")) throw ValidationError("missing field 'network' in scenario");
  if (doc.at("network").is_string()) {
    s.network_path = resolve_relative(base, doc.at("network").get<std::string>());
  } else if (doc.at("network").is_object()) {
    s.inline_network = doc.at("network");
  } else {
    throw ValidationError("field 'network' in scenario must be a path or an object");
  }

  if (doc.contains("time")) {
    const auto& t = doc.at("time");
    require_known_keys(t, {"t_start", "t_end", "steps", "h", "warmup"}, "scenario.time");
    s.time.t_start = optional_field<double>(t, "t_start", "scenario.time").value_or(s.time.t_start);
    s.time.t_end = optional_field<double>(t, "t_end", "scenario.time").value_or(s.time.t_end);
    s.time.steps = optional_field<int>(t, "steps", "scenario.time");
    s.time.h = optional_field<double>(t, "h", "scenario.time");
    s.time.warmup = optional_field<double>(t, "warmup", "scenario.time");
  }
  if (doc.contains("initial")) s.initial = InitialRequest::from_json(doc.at("initial"), base);

  if (doc.contains("analysis")) {
    const auto& a = doc.at("analysis");
    require_known_keys(a, {"rank", "transforms", "window", "fourier_window"}, "scenario.analysis");
    AnalysisRequest req;
    req.rank = optional_field<Eigen::Index>(a, "rank", "scenario.analysis");
    if (a.contains("transforms")) {
      req.transforms.clear();
      for (const auto& name : get_field<std::vector<std::string>>(a, "transforms", "scenario.analysis")) {
        req.transforms.push_back(parse_transform(name));
      }
    }
    if (auto w = optional_field<std::string>(a, "window", "scenario.analysis")) req.haar_window = parse_window(*w);
    if (auto w = optional_field<std::string>(a, "fourier_window", "scenario.analysis")) {
      req.fourier_window = parse_window(*w);
    }
    s.analysis = req;
  }

  if (doc.contains("sampling")) {
    const auto& m = doc.at("sampling");
    require_known_keys(m, {"samples", "seed", "observables", "gram_pairs", "convergence", "threads"},
                       "scenario.sampling");
    SamplingRequest req;
    req.samples = optional_field<std::uint64_t>(m, "samples", "scenario.sampling").value_or(req.samples);
    req.seed = optional_field<std::uint64_t>(m, "seed", "scenario.sampling").value_or(req.seed);
    req.gram_pairs = optional_field<std::uint64_t>(m, "gram_pairs", "scenario.sampling").value_or(0);
    req.threads = optional_field<int>(m, "threads", "scenario.sampling").value_or(1);
    if (m.contains("observables")) {
      req.observables.clear();
      for (const auto& o : get_field<std::vector<std::string>>(m, "observables", "scenario.sampling")) {
        auto obs = ObservableRequest::parse(o);
        if (obs.kind == ObservableRequest::Kind::file) obs.path = resolve_relative(base, obs.path);
        req.observables.push_back(obs);
      }
    }
    if (m.contains("convergence")) {
      const auto& c = m.at("convergence");
      require_known_keys(c, {"sizes", "replicates"}, "scenario.sampling.convergence");
      req.convergence_sizes = get_field<std::vector<std::uint64_t>>(c, "sizes", "scenario.sampling.convergence");
      req.convergence_replicates =
          optional_field<int>(c, "replicates", "scenario.sampling.convergence").value_or(10);
    }
    s.sampling = req;
  }

  if (doc.contains("resources")) {
    const auto& r = doc.at("resources");
    require_known_keys(r, {"epsilon", "kappa", "norm"}, "scenario.resources");
    ResourceRequest req;
    req.epsilon = optional_field<double>(r, "epsilon", "scenario.resources").value_or(req.epsilon);
    req.kappa = optional_field<double>(r, "kappa", "scenario.resources");
    if (auto n = optional_field<std::string>(r, "norm", "scenario.resources")) req.norm = norm_kind_from_string(*n);
    s.resources = req;
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    require_known_keys(o, {"dir", "formats", "include_warmup"}, "scenario.output");
    if (auto d = optional_field<std::string>(o, "dir", "scenario.output")) s.output.dir = *d;
    if (o.contains("formats")) s.output.formats = get_field<std::vector<std::string>>(o, "formats", "scenario.output");
    s.output.include_warmup = optional_field<bool>(o, "include_warmup", "scenario.output").value_or(false);
  }

  if (doc.contains("limits")) {
    const auto& l = doc.at("limits");
    require_known_keys(l, {"allow_large", "state_bit_cap"}, "scenario.limits");
    s.build.allow_large = optional_field<bool>(l, "allow_large", "scenario.limits").value_or(false);
    s.build.state_bit_cap =
        optional_field<double>(l, "state_bit_cap", "scenario.limits").value_or(kDefaultStateBitCap);
  }
  s.source_hash = sha256_hex(doc.dump());
  return s;
}

Scenario parse_scenario(const fs::path& path) {
  return parse_scenario_json(read_json_file(path), path.parent_path());
}

fs::path bundled_data_dir() {
#ifdef QDEA_DATA_DIR
  return fs::path(QDEA_DATA_DIR);
#else
  return fs::path("data");
#endif
}

fs::path bundled_scenario(const std::string& name) {
  const fs::path p = bundled_data_dir() / "scenarios" / (name + ".json");
  if (!fs::exists(p)) {
    throw ValidationError("unknown demo '" + name + "' (expected fig2, fig3, fig4, opinion or distancing)");
  }
  return p;
}

}  // namespace qdea
