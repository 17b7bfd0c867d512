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

#include "qdea/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "qdea/error.hpp"

namespace qdea {

namespace {

constexpr int kSusceptible = 0;
constexpr int kInfected = 1;

constexpr int kUndecided = 0;
constexpr int kLiberal = 1;
constexpr int kConservative = 2;

StateIndex checked_state_count(int n, int q, const BuildOptions& options) {
  const double bits = n * std::log2(static_cast<double>(q));
  if (bits > options.state_bit_cap && !options.allow_large) {
    throw CapacityError("state space of " + std::to_string(q) + "^" + std::to_string(n) +
                        " exceeds the " + std::to_string(options.state_bit_cap) +
                        "-bit cap; set allow_large to override");
  }
  // Sparse storage uses 32-bit indices.
  if (bits >= 31.0) {
    throw CapacityError("state space of " + std::to_string(q) + "^" + std::to_string(n) +
                        " does not fit in sparse matrix index range");
  }
  StateIndex count = 1;
  for (int i = 0; i < n; ++i) count *= static_cast<StateIndex>(q);
  return count;
}

/// Assembles a generator from a per-column list of off-diagonal (target, rate)
/// pairs; the diagonal is minus the sum of the listed entries.
template <typename ColumnRates>
RateMatrix assemble_generator(const Network& network, StateIndex dimension,
                              ColumnRates&& column_rates) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(dimension) *
                   (network.node_count() * (network.states_per_node() - 1) + 1));
  std::vector<std::pair<StateIndex, double>> column;
  for (StateIndex j = 0; j < dimension; ++j) {
    column.clear();
    column_rates(j, column);
    double exit = 0.0;
    for (const auto& [target, rate] : column) {
      if (rate == 0.0) continue;
      triplets.emplace_back(static_cast<int>(target), static_cast<int>(j), rate);
      exit += rate;
    }
    triplets.emplace_back(static_cast<int>(j), static_cast<int>(j), -exit);
  }
  SparseMatrix q(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(dimension));
  q.setFromTriplets(triplets.begin(), triplets.end());
  q.makeCompressed();
  return RateMatrix(std::move(q), network.node_count(), network.states_per_node());
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

RateMatrix build_sis_like(const Network& network, const ModelSpec& spec,
                          const BuildOptions& options, int threshold, double factor) {
  require(network.states_per_node() == 2,
          "SIS models need q = 2, got q = " + std::to_string(network.states_per_node()));
  require(spec.recovery_rate > 0.0, "SIS recovery rate must be positive");
  const int n = network.node_count();
  const StateIndex dimension = checked_state_count(n, 2, options);
  return assemble_generator(network, dimension, [&](StateIndex j, auto& out) {
    const bool distancing = infected_count(j, n) >= threshold;
    for (int v = 0; v < n; ++v) {
      const StateIndex flipped = j ^ (StateIndex{1} << v);
      if (node_state(j, v, 2) == kInfected) {
        out.emplace_back(flipped, spec.recovery_rate);
        continue;
      }
      double rate = 0.0;
      for (const auto& nb : network.neighbors(v)) {
        if (node_state(j, nb.node, 2) == kInfected) rate += nb.rate;
      }
      if (distancing) rate /= factor;
      out.emplace_back(flipped, rate);
    }
  });
}

}  // namespace

Network::Network(int node_count, int states_per_node, std::vector<Edge> edges)
    : n_(node_count), q_(states_per_node), edges_(std::move(edges)) {
  require(n_ >= 1, "network needs at least one node");
  require(q_ >= 2, "q must be at least 2");
  adjacency_.resize(static_cast<std::size_t>(n_));
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    require(e.u != e.v, "self-loop on node " + std::to_string(e.u));
    require(e.u >= 0 && e.u < n_ && e.v >= 0 && e.v < n_,
            "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ") out of range");
    require(e.rate > 0.0 && std::isfinite(e.rate),
            "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ") needs a positive rate");
    const auto key = std::minmax(e.u, e.v);
    require(seen.insert(key).second,
            "duplicate edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")");
    adjacency_[e.u].push_back({e.v, e.rate});
    adjacency_[e.v].push_back({e.u, e.rate});
  }
}

StateIndex Network::state_count() const {
  if (state_bits() >= 63.0) throw CapacityError("q^n overflows 63 bits");
  StateIndex count = 1;
  for (int i = 0; i < n_; ++i) count *= static_cast<StateIndex>(q_);
  return count;
}

double Network::state_bits() const { return n_ * std::log2(static_cast<double>(q_)); }

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::sis: return "sis";
    case ModelKind::sis_distancing: return "sis_distancing";
    case ModelKind::opinion: return "opinion";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "sis") return ModelKind::sis;
  if (name == "sis_distancing") return ModelKind::sis_distancing;
  if (name == "opinion") return ModelKind::opinion;
  throw ValidationError("unknown model kind '" + name + "'");
}

RateMatrix::RateMatrix(SparseMatrix generator, int node_count, int states_per_node)
    : q_(std::move(generator)), nodes_(node_count), states_(states_per_node) {
  if (q_.rows() != q_.cols()) throw ValidationError("rate matrix must be square");
}

RateMatrix RateMatrix::from_matrix(SparseMatrix m) { return RateMatrix(std::move(m), 0, 0); }

Eigen::Index RateMatrix::sparsity() const {
  Eigen::Index best = 0;
  for (Eigen::Index j = 0; j < q_.outerSize(); ++j) {
    Eigen::Index count = 0;
    for (SparseMatrix::InnerIterator it(q_, j); it; ++it) {
      if (it.row() != j && it.value() != 0.0) ++count;
    }
    best = std::max(best, count);
  }
  return best;
}

double RateMatrix::max_column_sum_error() const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < q_.outerSize(); ++j) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(q_, j); it; ++it) sum += it.value();
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

double RateMatrix::max_exit_rate() const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < q_.outerSize(); ++j) worst = std::max(worst, std::abs(q_.coeff(j, j)));
  return worst;
}

double RateMatrix::norm1() const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < q_.outerSize(); ++j) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(q_, j); it; ++it) sum += std::abs(it.value());
    worst = std::max(worst, sum);
  }
  return worst;
}

int node_state(StateIndex state, int node, int q) {
  if (q == 2) return static_cast<int>((state >> node) & 1u);
  for (int i = 0; i < node; ++i) state /= static_cast<StateIndex>(q);
  return static_cast<int>(state % static_cast<StateIndex>(q));
}

StateIndex with_node_state(StateIndex state, int node, int q, int value) {
  StateIndex place = 1;
  for (int i = 0; i < node; ++i) place *= static_cast<StateIndex>(q);
  const int current = node_state(state, node, q);
  return state - static_cast<StateIndex>(current) * place + static_cast<StateIndex>(value) * place;
}

int infected_count(StateIndex state, int node_count) {
  const StateIndex mask = node_count >= 64 ? ~StateIndex{0} : ((StateIndex{1} << node_count) - 1);
  return std::popcount(state & mask);
}

std::string state_label(StateIndex state, int node_count, int q) {
  std::string label;
  label.reserve(static_cast<std::size_t>(node_count));
  for (int v = 0; v < node_count; ++v) {
    label.push_back(static_cast<char>('0' + node_state(state, v, q)));
  }
  return label;
}

RateMatrix build_sis_generator(const Network& network, const ModelSpec& spec,
                               const BuildOptions& options) {
  require(spec.kind == ModelKind::sis, "build_sis_generator expects kind 'sis'");
  return build_sis_like(network, spec, options, std::numeric_limits<int>::max(), 1.0);
}

RateMatrix build_distancing_generator(const Network& network, const ModelSpec& spec,
                                      const BuildOptions& options) {
  require(spec.kind == ModelKind::sis_distancing,
          "build_distancing_generator expects kind 'sis_distancing'");
  require(spec.distancing.has_value(), "distancing model needs threshold and factor");
  const Distancing& d = *spec.distancing;
  require(d.threshold >= 1 && d.threshold <= network.node_count() + 1,
          "distancing threshold must lie in [1, n + 1]");
  require(d.factor > 0.0 && std::isfinite(d.factor), "distancing factor must be positive");
  return build_sis_like(network, spec, options, d.threshold, d.factor);
}

RateMatrix build_opinion_generator(const Network& network, const ModelSpec& spec,
                                   const BuildOptions& options) {
  require(spec.kind == ModelKind::opinion, "build_opinion_generator expects kind 'opinion'");
  require(network.states_per_node() == 3,
          "opinion model needs q = 3, got q = " + std::to_string(network.states_per_node()));
  require(spec.recovery_rate > 0.0, "opinion relaxation rate must be positive");
  const int n = network.node_count();
  const StateIndex dimension = checked_state_count(n, 3, options);
  return assemble_generator(network, dimension, [&](StateIndex j, auto& out) {
    for (int v = 0; v < n; ++v) {
      const int s = node_state(j, v, 3);
      if (s != kUndecided) {
        out.emplace_back(with_node_state(j, v, 3, kUndecided), spec.recovery_rate);
        continue;
      }
      double to_liberal = 0.0;
      double to_conservative = 0.0;
      for (const auto& nb : network.neighbors(v)) {
        const int other = node_state(j, nb.node, 3);
        if (other == kLiberal) to_liberal += nb.rate;
        if (other == kConservative) to_conservative += nb.rate;
      }
      out.emplace_back(with_node_state(j, v, 3, kLiberal), to_liberal);
      out.emplace_back(with_node_state(j, v, 3, kConservative), to_conservative);
    }
  });
}

RateMatrix build_generator(const Network& network, const ModelSpec& spec,
                           const BuildOptions& options) {
  switch (spec.kind) {
    case ModelKind::sis: return build_sis_generator(network, spec, options);
    case ModelKind::sis_distancing: return build_distancing_generator(network, spec, options);
    case ModelKind::opinion: return build_opinion_generator(network, spec, options);
  }
  throw ValidationError("unknown model kind");
}

ProbVector::ProbVector(Eigen::VectorXd values) : p_(std::move(values)) {
  require(p_.size() > 0, "probability vector is empty");
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    require(std::isfinite(p_[i]) && p_[i] >= 0.0,
            "probability entry " + std::to_string(i) + " is negative or not finite");
  }
  require(std::abs(p_.sum() - 1.0) <= 1e-12, "probabilities do not sum to 1");
}

ProductInitial ProductInitial::binary(std::span<const double> infected_probability) {
  ProductInitial out;
  for (double p : infected_probability) out.weights.push_back({1.0 - p, p});
  for (double p : infected_probability) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("node probability outside [0, 1]");
  }
  return out;
}

ProductInitial ProductInitial::binary_uniform(int node_count, double infected_probability) {
  const std::vector<double> p(static_cast<std::size_t>(node_count), infected_probability);
  return binary(p);
}

ProbVector make_initial_distribution(const ProductInitial& spec, const BuildOptions& options) {
  require(!spec.weights.empty(), "product distribution needs at least one node");
  const int q = static_cast<int>(spec.weights.front().size());
  require(q >= 2, "product distribution needs at least two states per node");
  for (const auto& w : spec.weights) {
    require(static_cast<int>(w.size()) == q, "every node needs the same number of states");
    double total = 0.0;
    for (double x : w) {
      require(x >= 0.0 && x <= 1.0, "node state probability outside [0, 1]");
      total += x;
    }
    require(std::abs(total - 1.0) <= 1e-12, "node state probabilities do not sum to 1");
  }
  const auto dimension = checked_state_count(static_cast<int>(spec.weights.size()), q, options);
  Eigen::VectorXd p(static_cast<Eigen::Index>(dimension));
  p[0] = 1.0;
  Eigen::Index filled = 1;
  // Node v occupies digit v, so its weight multiplies blocks of length q^v.
  for (const auto& w : spec.weights) {
    for (int s = q - 1; s >= 0; --s) {
      p.segment(s * filled, filled) = p.head(filled) * w[static_cast<std::size_t>(s)];
    }
    filled *= q;
  }
  return ProbVector(std::move(p));
}

ProbVector make_initial_distribution(const PointMassInitial& spec) {
  require(spec.dimension >= 1, "point mass needs a positive dimension");
  require(spec.index < spec.dimension, "point mass index out of range");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dimension));
  p[static_cast<Eigen::Index>(spec.index)] = 1.0;
  return ProbVector(std::move(p));
}

ProbVector make_initial_distribution(const UniformInitial& spec) {
  require(spec.dimension >= 1, "uniform distribution needs a positive dimension");
  const auto n = static_cast<Eigen::Index>(spec.dimension);
  return ProbVector(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

}  // namespace qdea
