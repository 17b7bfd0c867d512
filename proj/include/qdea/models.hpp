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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qdea {

using StateIndex = std::uint64_t;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Default cap on n*log2(q) before a generator is refused.
inline constexpr double kDefaultStateBitCap = 24.0;

struct Edge {
  int u = 0;
  int v = 0;
  double rate = 0.0;
};

/// Undirected weighted contact network whose nodes each carry one of q
/// local states.
class Network {
 public:
  Network(int node_count, int states_per_node, std::vector<Edge> edges);

  int node_count() const noexcept { return n_; }
  int states_per_node() const noexcept { return q_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Neighbor lists with the rate of the connecting edge; each undirected
  /// edge appears in both endpoint lists.
  struct Neighbor {
    int node;
    double rate;
  };
  const std::vector<Neighbor>& neighbors(int v) const { return adjacency_.at(v); }

  /// q^n, or throws CapacityError when it does not fit in 63 bits.
  StateIndex state_count() const;
  double state_bits() const;

 private:
  int n_;
  int q_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

enum class ModelKind { sis, sis_distancing, opinion };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct Distancing {
  int threshold = 0;
  double factor = 1.0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::sis;
  /// Recovery rate for SIS kinds; decided->undecided relaxation rate for the
  /// opinion model.
  double recovery_rate = 0.33;
  std::optional<Distancing> distancing;
};

struct BuildOptions {
  double state_bit_cap = kDefaultStateBitCap;
  bool allow_large = false;
};

/// Sparse CTMC generator. Entry (i, j) with i != j is the rate of the
/// transition j -> i; diagonals close every column to zero.
class RateMatrix {
 public:
  RateMatrix() = default;
  RateMatrix(SparseMatrix generator, int node_count, int states_per_node);

  /// Wraps an arbitrary square sparse matrix (no network structure).
  static RateMatrix from_matrix(SparseMatrix m);

  const SparseMatrix& matrix() const noexcept { return q_; }
  Eigen::Index dimension() const noexcept { return q_.rows(); }
  int node_count() const noexcept { return nodes_; }
  int states_per_node() const noexcept { return states_; }

  /// Max off-diagonal nonzeros in any column.
  Eigen::Index sparsity() const;
  /// Max |column sum| over all columns.
  double max_column_sum_error() const;
  /// Max |Q_jj|.
  double max_exit_rate() const;
  /// Induced 1-norm (max absolute column sum).
  double norm1() const;

  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(q_); }

 private:
  SparseMatrix q_;
  int nodes_ = 0;
  int states_ = 0;
};

/// Digit of node v in the little-endian base-q encoding of a global state.
int node_state(StateIndex state, int node, int q);
StateIndex with_node_state(StateIndex state, int node, int q, int value);
int infected_count(StateIndex state, int node_count);
/// Node 0 first, e.g. "0110100" for a 7-node binary state.
std::string state_label(StateIndex state, int node_count, int q);

RateMatrix build_sis_generator(const Network& network, const ModelSpec& spec,
                               const BuildOptions& options = {});
RateMatrix build_distancing_generator(const Network& network, const ModelSpec& spec,
                                      const BuildOptions& options = {});
RateMatrix build_opinion_generator(const Network& network, const ModelSpec& spec,
                                   const BuildOptions& options = {});
/// Dispatches on spec.kind.
RateMatrix build_generator(const Network& network, const ModelSpec& spec,
                           const BuildOptions& options = {});

/// Probability vector over the q^n global states.
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(Eigen::VectorXd values);

  const Eigen::VectorXd& values() const noexcept { return p_; }
  Eigen::Index size() const noexcept { return p_.size(); }
  double operator[](Eigen::Index i) const { return p_[i]; }

 private:
  Eigen::VectorXd p_;
};

/// Product distribution over independent nodes: weights[v][s] is the
/// probability that node v is in local state s.
struct ProductInitial {
  std::vector<std::vector<double>> weights;

  /// Binary nodes, node v infected with probability p[v].
  static ProductInitial binary(std::span<const double> infected_probability);
  static ProductInitial binary_uniform(int node_count, double infected_probability);
};

struct PointMassInitial {
  StateIndex index = 0;
  StateIndex dimension = 0;
};

struct UniformInitial {
  StateIndex dimension = 0;
};

ProbVector make_initial_distribution(const ProductInitial& spec, const BuildOptions& options = {});
ProbVector make_initial_distribution(const PointMassInitial& spec);
ProbVector make_initial_distribution(const UniformInitial& spec);

}  // namespace qdea
