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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdea/lde.hpp"
#include "qdea/models.hpp"
#include "qdea/random.hpp"

namespace qdea {

struct Jump {
  StateIndex target = 0;
  double rate = 0.0;
};

/// Source of the outgoing jumps of a CTMC state.
class TransitionModel {
 public:
  virtual ~TransitionModel() = default;
  /// Replaces `out` with the positive-rate jumps leaving `state`.
  virtual void outgoing(StateIndex state, std::vector<Jump>& out) const = 0;
  virtual StateIndex dimension() const = 0;
};

/// Jumps read from the columns of an assembled generator.
class MatrixTransitions final : public TransitionModel {
 public:
  explicit MatrixTransitions(RateMatrix q);
  void outgoing(StateIndex state, std::vector<Jump>& out) const override;
  StateIndex dimension() const override { return static_cast<StateIndex>(q_.dimension()); }

 private:
  RateMatrix q_;
};

/// Jumps computed from per-node local rates, without materializing q^n.
class NetworkTransitions final : public TransitionModel {
 public:
  NetworkTransitions(Network network, ModelSpec spec);
  void outgoing(StateIndex state, std::vector<Jump>& out) const override;
  StateIndex dimension() const override { return dimension_; }

 private:
  Network network_;
  ModelSpec spec_;
  StateIndex dimension_;
};

/// Draws initial states.
class InitialSampler {
 public:
  static InitialSampler from_distribution(const ProbVector& p);
  static InitialSampler product(const ProductInitial& spec);
  static InitialSampler point(StateIndex state);

  StateIndex sample(PhiloxStream& rng) const;

 private:
  enum class Kind { table, product, point };
  Kind kind_ = Kind::point;
  std::vector<double> cumulative_;                // table
  std::vector<std::vector<double>> node_cumulative_;  // product
  StateIndex point_ = 0;
};

struct Trajectory {
  StateIndex initial = 0;
  std::vector<std::pair<double, StateIndex>> events;  ///< (time, new state)
  double terminal_time = 0.0;

  StateIndex final_state() const { return events.empty() ? initial : events.back().second; }
};

/// Exact-event simulation up to time t. Absorbing states stay put.
StateIndex gillespie_sample(const TransitionModel& model, StateIndex start, double t,
                            PhiloxStream& rng, Trajectory* record = nullptr);
Trajectory gillespie_trajectory(const TransitionModel& model, StateIndex start, double t,
                                PhiloxStream& rng);

/// Samples the discrete-time chain I + hQ for `steps` steps: at most one jump
/// per step, taken with probability h * rate. Its law at step l equals the
/// Euler history column l. Requires h * exit rate <= 1 in every state visited.
StateIndex fixed_step_sample(const TransitionModel& model, StateIndex start, double h, int steps,
                             PhiloxStream& rng);

/// Real-valued function on global states.
struct ObservableSpec {
  std::string name;
  std::function<double(StateIndex)> evaluate;

  static ObservableSpec constant(double value);
  static ObservableSpec popcount(int node_count);
  static ObservableSpec indicator(StateIndex state);
  static ObservableSpec from_values(std::vector<double> values, std::string name = "table");

  /// Affine map of [lo, hi] onto [0, 1].
  ObservableSpec normalized(double lo, double hi) const;
  /// Z_Q = sum_k Q(k)^2 over [0, dimension).
  double norm_sq(StateIndex dimension) const;
};

struct EstimateReport {
  std::string estimator;
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  double time = 0.0;        ///< observation time, or first time for Gram entries
  double second_time = 0.0; ///< Gram entries only
  /// 1 / estimate for the collision estimator (infinity when no collision).
  std::optional<double> predicted_pairs_to_collision;
};

enum class SamplerKind { exact_event, fixed_step };

struct SamplingOptions {
  int threads = 1;
  SamplerKind sampler = SamplerKind::exact_event;
  double fixed_step = 0.0;  ///< h for SamplerKind::fixed_step
};

/// Mean of Q over S trajectories; sample s uses stream (seed, s).
EstimateReport estimate_observable_mc(const TransitionModel& model, const InitialSampler& initial,
                                      const ObservableSpec& q, double t, std::uint64_t samples,
                                      std::uint64_t seed, const SamplingOptions& options = {});

struct ObservableValue {
  double direct = 0.0;        ///< sum_k x_j(k) Q(k)
  double overlap_form = 0.0;  ///< Z_j^{1/2} Z_Q^{1/2} <Q~|x~_j>
  double z_step = 0.0;
  double z_observable = 0.0;
};

/// Exact expectation from a history column, evaluated directly and via the
/// normalized-overlap identity; throws NumericalError if the two disagree by
/// more than 1e-10 (relative to max(1, |value|)).
ObservableValue exact_observable_detail(const HistoryMatrix& x, const ObservableSpec& q, Eigen::Index step);
double exact_observable(const HistoryMatrix& x, const ObservableSpec& q, Eigen::Index step);

/// Fraction of P independent trajectory pairs whose states coincide at
/// times j h and j' h; estimates (X^T X)_{jj'}. Pair p uses streams
/// (seed, 2p) and (seed, 2p + 1).
EstimateReport collision_gram_estimate(const TransitionModel& model, const InitialSampler& initial,
                                       int step, int other_step, std::uint64_t pairs, double h,
                                       std::uint64_t seed, const SamplingOptions& options = {});

/// Number of pairs drawn until the first coincidence (inclusive), capped at
/// `max_pairs` (returns max_pairs + 1 when no collision happened).
std::uint64_t pairs_to_first_collision(const TransitionModel& model, const InitialSampler& initial,
                                       int step, int other_step, double h, std::uint64_t seed,
                                       std::uint64_t max_pairs);

struct ConvergencePoint {
  std::uint64_t samples = 0;
  double rmse = 0.0;
};

/// RMSE of estimate_observable_mc against `exact` over `replicates`
/// independent seeds per sample size.
std::vector<ConvergencePoint> convergence_study(const TransitionModel& model, const InitialSampler& initial,
                                                const ObservableSpec& q, double t, double exact,
                                                const std::vector<std::uint64_t>& sample_sizes,
                                                int replicates, std::uint64_t seed,
                                                const SamplingOptions& options = {});

/// Least-squares slope of log(rmse) against log(samples).
double loglog_slope(const std::vector<ConvergencePoint>& points);

}  // namespace qdea
