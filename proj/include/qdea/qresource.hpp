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

// Resource arithmetic for the truncated-Taylor history-state algorithm:
// step count, truncation order, state-preparation tolerance, success
// probability constants, error bounds and an order-of-magnitude gate count.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdea/models.hpp"

namespace qdea {

enum class NormKind { one, spectral };

std::string to_string(NormKind kind);
NormKind norm_kind_from_string(const std::string& name);

struct MatrixNorm {
  double value = 0.0;
  NormKind kind = NormKind::one;
};

/// Induced 1-norm in O(nnz), or the spectral norm via a dense SVD for
/// dimensions up to 4096.
MatrixNorm matrix_norm(const SparseMatrix& m, NormKind kind = NormKind::one);

struct ResourceInputs {
  double epsilon = 0.01;
  double t_max = 1.0;
  MatrixNorm m_norm;
  double sparsity = 1.0;
  double kappa = 1.0;
  double x0_norm = 1.0;
  double c_norm = 0.0;
  double dimension = 2.0;
  /// Node count and q for the qubit tally; 0 means derive from dimension.
  int nodes = 0;
  int states_per_node = 2;

  /// Throws ValidationError unless epsilon is in (0, 1) and the rest positive
  /// (c_norm may be zero).
  void validate() const;
};

struct StepRecommendation {
  long long steps = 0;
  NormKind norm = NormKind::one;
};

/// T = ceil(t_max * ||M||).
StepRecommendation recommend_T(double t_max, const MatrixNorm& m_norm);

enum class TruncationBinding { formula, minimum_five, factorial };

std::string to_string(TruncationBinding b);

struct TruncationOrder {
  int k = 5;
  int formula_value = 0;
  TruncationBinding binding = TruncationBinding::formula;
};

/// max(5, ceil(log2((1 + t c/x0) kappa sqrt(3T)(T+1)/(4 eps))), min k with (k+1)! >= 2T).
TruncationOrder choose_truncation_order(const ResourceInputs& in, long long steps);
TruncationOrder choose_truncation_order(const ResourceInputs& in);

/// eps / (4 sqrt(66)).
double choose_delta(double epsilon);
/// 1 / (2 sqrt(66)), the largest admissible delta.
double delta_ceiling();

/// 2.8 kappa i (||x0|| + t_max ||c||) / (k+1)!.
double taylor_error_bound(double kappa, long long step, int k, double x0_norm, double t_c_norm);

struct SuccessProbability {
  double pre_projection = 0.0;   ///< 1/66
  double post_projection = 0.0;  ///< 1/264
  double series_factor = 0.0;    ///< 1.28, bound on sum_{j>=1} 1/j!^2
  double exact_series = 0.0;     ///< sum_{j>=1} 1/j!^2
  double garbage_constant = 0.0; ///< 1.28 * 4 / (3 - e)^2
  double garbage_bound = 0.0;    ///< 65
};

SuccessProbability success_probability_bounds();

/// || v/|v| - w/|w| || <= 2 |v - w| / |v|; returns (lhs, rhs).
std::pair<double, double> normalized_difference_check(const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// kappa k^2 t ||M|| s log^3(kappa k t ||M|| s N / delta), natural log and
/// unit constants. An order-of-magnitude proxy, not a prediction.
double gate_count_proxy(const ResourceInputs& in, int k, double delta);

struct QubitTally {
  int state = 0;
  int time = 0;
  int taylor = 0;
  int ancilla = 0;

  int total() const { return state + time + taylor + ancilla; }
};

/// State register ceil(n log2 q), time register ceil(log2(T+1)), Taylor
/// register ceil(log2(k+1)), and ceil(log2(s+1)) + 3 block-encoding ancillas.
QubitTally qubit_tally(const ResourceInputs& in, long long steps, int k);

struct ResourceEstimate {
  ResourceInputs inputs;
  long long steps = 0;
  TruncationOrder truncation;
  double delta = 0.0;
  SuccessProbability success;
  double gate_count = 0.0;
  QubitTally qubits;
};

ResourceEstimate estimate_resources(const ResourceInputs& in);
/// Uses the given step count instead of ceil(t_max ||M||).
ResourceEstimate estimate_resources(const ResourceInputs& in, long long steps);

/// Condition number of the (unit-column) eigenvector matrix; throws
/// NumericalError when it exceeds `limit` (numerically non-diagonalizable).
double eigenvector_condition_number(const Eigen::MatrixXd& m, double limit = 1e12);

struct TruncationValidation {
  double kappa = 0.0;
  std::vector<double> observed;  ///< ||x(ih) - y_i|| for i = 0..T
  std::vector<double> bound;     ///< per-step bound
  double max_observed = 0.0;
  bool bound_holds = true;
};

/// Steps y_{i+1} = S_k(Mh) y_i + P_k(Mh) h c with the order-k Taylor
/// polynomials and compares against the exact solution from a dense
/// matrix exponential. Dimension must be at most 64.
TruncationValidation validate_truncation(const Eigen::MatrixXd& m, const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& c, double h, int steps, int k);

}  // namespace qdea
