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

#include "qdea/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "qdea/error.hpp"

namespace qdea {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Evaluates fn(i) for i in [0, count) into a vector. Workers take contiguous
/// chunks; the output depends only on the index, never on the split.
template <typename Fn>
std::vector<double> parallel_values(std::uint64_t count, int threads, Fn&& fn) {
  std::vector<double> values(static_cast<std::size_t>(count));
  const auto workers = static_cast<std::uint64_t>(std::max(1, threads));
  if (workers == 1 || count < 2 * workers) {
    for (std::uint64_t i = 0; i < count; ++i) values[i] = fn(i);
    return values;
  }
  std::vector<std::jthread> pool;
  const std::uint64_t chunk = (count + workers - 1) / workers;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t lo = w * chunk;
    const std::uint64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&values, &fn, lo, hi] {
      for (std::uint64_t i = lo; i < hi; ++i) values[i] = fn(i);
    });
  }
  pool.clear();
  return values;
}

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Summation runs in index order.
MeanAndError summarize(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

StateIndex pick_jump(const std::vector<Jump>& jumps, double threshold) {
  double acc = 0.0;
  for (const Jump& j : jumps) {
    acc += j.rate;
    if (threshold < acc) return j.target;
  }
  return jumps.back().target;
}

StateIndex sample_at(const TransitionModel& model, StateIndex start, double t, PhiloxStream& rng,
                     const SamplingOptions& options) {
  if (options.sampler == SamplerKind::exact_event) return gillespie_sample(model, start, t, rng);
  const double h = options.fixed_step;
  if (!(h > 0.0)) throw ValidationError("fixed-step sampler needs a positive step");
  const int steps = static_cast<int>(std::llround(t / h));
  return fixed_step_sample(model, start, h, steps, rng);
}

}  // namespace

MatrixTransitions::MatrixTransitions(RateMatrix q) : q_(std::move(q)) {}

void MatrixTransitions::outgoing(StateIndex state, std::vector<Jump>& out) const {
  out.clear();
  const SparseMatrix& m = q_.matrix();
  const auto col = static_cast<Eigen::Index>(state);
  for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
    if (it.row() != col && it.value() > 0.0) {
      out.push_back({static_cast<StateIndex>(it.row()), it.value()});
    }
  }
}

NetworkTransitions::NetworkTransitions(Network network, ModelSpec spec)
    : network_(std::move(network)), spec_(std::move(spec)), dimension_(network_.state_count()) {
  const int q = network_.states_per_node();
  if (spec_.kind == ModelKind::opinion ? q != 3 : q != 2) {
    throw ValidationError("model kind " + to_string(spec_.kind) + " does not match q = " + std::to_string(q));
  }
  if (spec_.kind == ModelKind::sis_distancing && !spec_.distancing) {
    throw ValidationError("distancing model needs threshold and factor");
  }
}

void NetworkTransitions::outgoing(StateIndex state, std::vector<Jump>& out) const {
  out.clear();
  const int n = network_.node_count();
  if (spec_.kind == ModelKind::opinion) {
    for (int v = 0; v < n; ++v) {
      if (node_state(state, v, 3) != 0) {
        out.push_back({with_node_state(state, v, 3, 0), spec_.recovery_rate});
        continue;
      }
      double to[3] = {0.0, 0.0, 0.0};
      for (const auto& nb : network_.neighbors(v)) to[node_state(state, nb.node, 3)] += nb.rate;
      for (int s = 1; s <= 2; ++s) {
        if (to[s] > 0.0) out.push_back({with_node_state(state, v, 3, s), to[s]});
      }
    }
    return;
  }
  double factor = 1.0;
  if (spec_.kind == ModelKind::sis_distancing && infected_count(state, n) >= spec_.distancing->threshold) {
    factor = spec_.distancing->factor;
  }
  for (int v = 0; v < n; ++v) {
    const StateIndex flipped = state ^ (StateIndex{1} << v);
    if ((state >> v) & 1u) {
      out.push_back({flipped, spec_.recovery_rate});
      continue;
    }
    double rate = 0.0;
    for (const auto& nb : network_.neighbors(v)) {
      if ((state >> nb.node) & 1u) rate += nb.rate;
    }
    if (rate > 0.0) out.push_back({flipped, rate / factor});
  }
}

InitialSampler InitialSampler::from_distribution(const ProbVector& p) {
  InitialSampler s;
  s.kind_ = Kind::table;
  s.cumulative_.resize(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    s.cumulative_[static_cast<std::size_t>(i)] = acc;
  }
  return s;
}

InitialSampler InitialSampler::product(const ProductInitial& spec) {
  InitialSampler s;
  s.kind_ = Kind::product;
  for (const auto& w : spec.weights) {
    std::vector<double> c(w.size());
    std::partial_sum(w.begin(), w.end(), c.begin());
    s.node_cumulative_.push_back(std::move(c));
  }
  return s;
}

InitialSampler InitialSampler::point(StateIndex state) {
  InitialSampler s;
  s.kind_ = Kind::point;
  s.point_ = state;
  return s;
}

StateIndex InitialSampler::sample(PhiloxStream& rng) const {
  switch (kind_) {
    case Kind::point:
      return point_;
    case Kind::table: {
      const double u = rng.uniform() * cumulative_.back();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto idx = static_cast<StateIndex>(std::min<std::ptrdiff_t>(
          it - cumulative_.begin(), static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
      return idx;
    }
    case Kind::product: {
      StateIndex state = 0;
      StateIndex place = 1;
      for (const auto& c : node_cumulative_) {
        const double u = rng.uniform() * c.back();
        auto local = static_cast<StateIndex>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
        local = std::min<StateIndex>(local, c.size() - 1);
        state += local * place;
        place *= c.size();
      }
      return state;
    }
  }
  return 0;
}

StateIndex gillespie_sample(const TransitionModel& model, StateIndex start, double t, PhiloxStream& rng,
                            Trajectory* record) {
  if (t < 0.0) throw ValidationError("sampling time must be nonnegative");
  if (record) {
    record->initial = start;
    record->events.clear();
    record->terminal_time = t;
  }
  std::vector<Jump> jumps;
  StateIndex state = start;
  double now = 0.0;
  while (true) {
    model.outgoing(state, jumps);
    double total = 0.0;
    for (const Jump& j : jumps) total += j.rate;
    if (total <= 0.0) return state;
    now += rng.exponential(total);
    if (now > t) return state;
    state = pick_jump(jumps, rng.uniform() * total);
    if (record) record->events.emplace_back(now, state);
  }
}

Trajectory gillespie_trajectory(const TransitionModel& model, StateIndex start, double t, PhiloxStream& rng) {
  Trajectory tr;
  gillespie_sample(model, start, t, rng, &tr);
  return tr;
}

StateIndex fixed_step_sample(const TransitionModel& model, StateIndex start, double h, int steps,
                             PhiloxStream& rng) {
  std::vector<Jump> jumps;
  StateIndex state = start;
  for (int l = 0; l < steps; ++l) {
    model.outgoing(state, jumps);
    double total = 0.0;
    for (const Jump& j : jumps) total += j.rate;
    if (h * total > 1.0 + 1e-12) {
      throw NumericalError("fixed-step sampler: h * exit rate = " + std::to_string(h * total) +
                           " exceeds 1 at step " + std::to_string(l));
    }
    const double u = rng.uniform();
    if (u < h * total) state = pick_jump(jumps, u / h);
  }
  return state;
}

ObservableSpec ObservableSpec::constant(double value) {
  return {"constant", [value](StateIndex) { return value; }};
}

ObservableSpec ObservableSpec::popcount(int node_count) {
  return {"popcount", [node_count](StateIndex k) { return static_cast<double>(infected_count(k, node_count)); }};
}

ObservableSpec ObservableSpec::indicator(StateIndex state) {
  return {"indicator:" + std::to_string(state), [state](StateIndex k) { return k == state ? 1.0 : 0.0; }};
}

ObservableSpec ObservableSpec::from_values(std::vector<double> values, std::string name) {
  auto table = std::make_shared<const std::vector<double>>(std::move(values));
  return {std::move(name), [table](StateIndex k) {
            if (k >= table->size()) throw ValidationError("observable table shorter than the state space");
            return (*table)[static_cast<std::size_t>(k)];
          }};
}

ObservableSpec ObservableSpec::normalized(double lo, double hi) const {
  if (!(hi > lo)) throw ValidationError("observable range must satisfy lo < hi");
  auto inner = evaluate;
  return {name + ":unit", [inner, lo, hi](StateIndex k) { return (inner(k) - lo) / (hi - lo); }};
}

double ObservableSpec::norm_sq(StateIndex dimension) const {
  double z = 0.0;
  for (StateIndex k = 0; k < dimension; ++k) {
    const double v = evaluate(k);
    z += v * v;
  }
  return z;
}

EstimateReport estimate_observable_mc(const TransitionModel& model, const InitialSampler& initial,
                                      const ObservableSpec& q, double t, std::uint64_t samples,
                                      std::uint64_t seed, const SamplingOptions& options) {
  if (samples < 2) throw ValidationError("Monte Carlo estimate needs at least two samples");
  const auto start = Clock::now();
  const auto values = parallel_values(samples, options.threads, [&](std::uint64_t s) {
    PhiloxStream rng(seed, s);
    const StateIndex x0 = initial.sample(rng);
    return q.evaluate(sample_at(model, x0, t, rng, options));
  });
  const auto stats = summarize(values);
  EstimateReport r;
  r.estimator = "mc:" + q.name;
  r.estimate = stats.mean;
  r.standard_error = stats.standard_error;
  r.samples = samples;
  r.seed = seed;
  r.time = t;
  r.seconds = seconds_since(start);
  return r;
}

ObservableValue exact_observable_detail(const HistoryMatrix& x, const ObservableSpec& q, Eigen::Index step) {
  if (step < 0 || step >= x.samples()) throw ValidationError("step outside the history");
  const Eigen::Index n = x.states();
  Eigen::VectorXd qv(n);
  for (Eigen::Index k = 0; k < n; ++k) qv[k] = q.evaluate(static_cast<StateIndex>(k));
  const auto column = x.columns.col(step);

  ObservableValue out;
  out.direct = column.dot(qv);
  out.z_step = column.squaredNorm();
  out.z_observable = qv.squaredNorm();
  if (out.z_step > 0.0 && out.z_observable > 0.0) {
    const double root_step = std::sqrt(out.z_step);
    const double root_obs = std::sqrt(out.z_observable);
    const double overlap = (qv / root_obs).dot(column / root_step);
    out.overlap_form = root_step * root_obs * overlap;
  }
  const double scale = std::max(1.0, std::abs(out.direct));
  if (std::abs(out.direct - out.overlap_form) > 1e-10 * scale) {
    throw NumericalError("overlap identity violated at step " + std::to_string(step));
  }
  return out;
}

double exact_observable(const HistoryMatrix& x, const ObservableSpec& q, Eigen::Index step) {
  return exact_observable_detail(x, q, step).direct;
}

EstimateReport collision_gram_estimate(const TransitionModel& model, const InitialSampler& initial,
                                       int step, int other_step, std::uint64_t pairs, double h,
                                       std::uint64_t seed, const SamplingOptions& options) {
  if (pairs < 1) throw ValidationError("collision estimate needs at least one pair");
  if (step < 0 || other_step < 0 || !(h > 0.0)) throw ValidationError("invalid steps or step size");
  const auto start = Clock::now();
  const double t1 = step * h;
  const double t2 = other_step * h;
  const auto values = parallel_values(pairs, options.threads, [&](std::uint64_t p) {
    PhiloxStream first(seed, 2 * p);
    PhiloxStream second(seed, 2 * p + 1);
    const StateIndex a = sample_at(model, initial.sample(first), t1, first, options);
    const StateIndex b = sample_at(model, initial.sample(second), t2, second, options);
    return a == b ? 1.0 : 0.0;
  });
  const auto stats = summarize(values);
  EstimateReport r;
  r.estimator = "collision_gram";
  r.estimate = stats.mean;
  r.standard_error = stats.standard_error;
  r.samples = pairs;
  r.seed = seed;
  r.time = t1;
  r.second_time = t2;
  r.predicted_pairs_to_collision =
      stats.mean > 0.0 ? 1.0 / stats.mean : std::numeric_limits<double>::infinity();
  r.seconds = seconds_since(start);
  return r;
}

std::uint64_t pairs_to_first_collision(const TransitionModel& model, const InitialSampler& initial,
                                       int step, int other_step, double h, std::uint64_t seed,
                                       std::uint64_t max_pairs) {
  const double t1 = step * h;
  const double t2 = other_step * h;
  for (std::uint64_t p = 0; p < max_pairs; ++p) {
    PhiloxStream first(seed, 2 * p);
    PhiloxStream second(seed, 2 * p + 1);
    const StateIndex a = gillespie_sample(model, initial.sample(first), t1, first);
    const StateIndex b = gillespie_sample(model, initial.sample(second), t2, second);
    if (a == b) return p + 1;
  }
  return max_pairs + 1;
}

std::vector<ConvergencePoint> convergence_study(const TransitionModel& model, const InitialSampler& initial,
                                                const ObservableSpec& q, double t, double exact,
                                                const std::vector<std::uint64_t>& sample_sizes,
                                                int replicates, std::uint64_t seed,
                                                const SamplingOptions& options) {
  if (replicates < 1) throw ValidationError("convergence study needs at least one replicate");
  std::vector<ConvergencePoint> out;
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    double ss = 0.0;
    for (int r = 0; r < replicates; ++r) {
      const std::uint64_t child = derive_seed(seed, i * 1000003ull + static_cast<std::uint64_t>(r));
      const auto est = estimate_observable_mc(model, initial, q, t, sample_sizes[i], child, options);
      ss += (est.estimate - exact) * (est.estimate - exact);
    }
    out.push_back({sample_sizes[i], std::sqrt(ss / replicates)});
  }
  return out;
}

double loglog_slope(const std::vector<ConvergencePoint>& points) {
  if (points.size() < 2) throw ValidationError("slope needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(points.size());
  for (const auto& p : points) {
    const double lx = std::log(static_cast<double>(p.samples));
    const double ly = std::log(p.rmse);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qdea
