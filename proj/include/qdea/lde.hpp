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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qdea/models.hpp"

namespace qdea {

/// dx/dt = M x + c on [0, t_max], discretized into `steps` steps.
struct OdeProblem {
  SparseMatrix M;
  Eigen::VectorXd c;
  Eigen::VectorXd x0;
  double t_max = 1.0;
  int steps = 1;

  static OdeProblem markov(const RateMatrix& q, const ProbVector& x0, double t_max, int steps);

  double h() const { return t_max / steps; }
  Eigen::Index dimension() const { return M.rows(); }
  /// Throws ValidationError on inconsistent sizes or a non-positive step.
  void validate() const;
};

/// N x (T+1) dense history; column l holds x(t_offset + l*h).
struct HistoryMatrix {
  Eigen::MatrixXd columns;
  double h = 0.0;
  double t_offset = 0.0;
  std::string model_hash;

  Eigen::Index states() const { return columns.rows(); }
  Eigen::Index samples() const { return columns.cols(); }
  int steps() const { return static_cast<int>(columns.cols()) - 1; }
  double time(Eigen::Index l) const { return t_offset + static_cast<double>(l) * h; }
};

/// Forward Euler: x_{l+1} = x_l + h (M x_l + c). Throws NumericalError
/// naming the step at which a non-finite value first appears.
HistoryMatrix euler_step_history(const OdeProblem& problem, double t_offset = 0.0);

/// Contiguous sub-window [first, first + count) of a history.
HistoryMatrix history_window(const HistoryMatrix& history, Eigen::Index first, Eigen::Index count);

struct StabilityReport {
  double step_times_max_exit = 0.0;  ///< h * max_j |M_jj|
  double min_entry = 0.0;
  bool guaranteed_nonnegative = true;  ///< h * max |M_jj| <= 1
  bool negative_entries = false;       ///< any entry below -1e-12
};

StabilityReport check_stability(const OdeProblem& problem, const HistoryMatrix& history);

/// Extra block at (i, i - lag) of value -h * kernel, for every i >= lag.
struct MemoryTerm {
  int lag = 2;
  SparseMatrix kernel;
};

/// Block lower-triangular system A x = b with identity diagonal blocks.
///
/// Row block i is  x_i - sum_j B_ij x_j = b_i  where each stored term keeps
/// -A_ij (so the Euler subdiagonal stores I + hM). Terms of kind `copy` are
/// padding rows x_i - x_{i-1} = 0.
class LinearSystem {
 public:
  struct Term {
    Eigen::Index from_block = 0;
    /// Null for a plain copy (coefficient I).
    std::shared_ptr<const SparseMatrix> coefficient;
  };

  struct Padding {
    Eigen::Index anchor = 0;  ///< j*, the block being replicated
    Eigen::Index copies = 0;  ///< P
  };

  Eigen::Index state_dimension() const noexcept { return n_; }
  Eigen::Index block_count() const noexcept { return static_cast<Eigen::Index>(rows_.size()); }
  const std::vector<Term>& row_terms(Eigen::Index block) const { return rows_.at(block); }
  const Eigen::VectorXd& rhs() const noexcept { return b_; }
  const std::optional<Padding>& padding() const noexcept { return padding_; }
  double step() const noexcept { return h_; }

  /// Materialized A as one sparse matrix of size (blocks*N)^2.
  SparseMatrix to_sparse() const;

 private:
  friend LinearSystem assemble_system(const OdeProblem&, const std::vector<MemoryTerm>&);
  friend LinearSystem pad_for_time(const LinearSystem&, Eigen::Index, Eigen::Index);
  friend LinearSystem identity_system(Eigen::VectorXd b, Eigen::Index state_dimension);

  Eigen::Index n_ = 0;
  double h_ = 0.0;
  std::vector<std::vector<Term>> rows_;
  Eigen::VectorXd b_;
  std::optional<Padding> padding_;
};

/// Euler block system, b = (x0, h c, ..., h c). Memory lags must lie in [2, T].
LinearSystem assemble_system(const OdeProblem& problem, const std::vector<MemoryTerm>& memory = {});

/// A = I over `b.size() / state_dimension` blocks.
LinearSystem identity_system(Eigen::VectorXd b, Eigen::Index state_dimension);

/// Block forward substitution.
HistoryMatrix solve_history(const LinearSystem& system);

/// Drops Euler rows after block `anchor` and appends `copies` rows
/// x_{i+1} = x_i. Existing copy rows after the anchor are kept, so padding
/// twice at one anchor accumulates.
LinearSystem pad_for_time(const LinearSystem& system, Eigen::Index anchor, Eigen::Index copies);

/// Fraction of the flattened squared norm carried by the anchor block and its
/// copies in a solved padded history.
double amplified_mass_fraction(const HistoryMatrix& solved, const LinearSystem::Padding& padding);

/// Unit-norm flattening of a history; time is the slow index.
struct NormalizedHistory {
  Eigen::MatrixXd unit;             ///< columns / global_norm
  Eigen::VectorXd step_norms_sq;    ///< Z_l = ||x_l||^2 before normalization
  double global_norm = 0.0;         ///< Frobenius norm of the input
  double h = 0.0;
  double t_offset = 0.0;
  std::string model_hash;

  /// Flattened |x> in column-major order (state index fastest).
  Eigen::Map<const Eigen::VectorXd> flattened() const {
    return {unit.data(), unit.size()};
  }
};

NormalizedHistory normalize_history(const HistoryMatrix& history);

}  // namespace qdea
