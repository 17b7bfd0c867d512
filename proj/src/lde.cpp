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

#include "qdea/lde.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "qdea/error.hpp"

namespace qdea {

OdeProblem OdeProblem::markov(const RateMatrix& q, const ProbVector& x0, double t_max, int steps) {
  OdeProblem p;
  p.M = q.matrix();
  p.c = Eigen::VectorXd::Zero(q.dimension());
  p.x0 = x0.values();
  p.t_max = t_max;
  p.steps = steps;
  return p;
}

void OdeProblem::validate() const {
  if (steps < 1) throw ValidationError("step count must be at least 1");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("time span must be positive");
  if (M.rows() != M.cols()) throw ValidationError("M must be square");
  if (c.size() != M.rows() || x0.size() != M.rows()) {
    throw ValidationError("dimension mismatch: M is " + std::to_string(M.rows()) + ", c is " +
                          std::to_string(c.size()) + ", x0 is " + std::to_string(x0.size()));
  }
}

HistoryMatrix euler_step_history(const OdeProblem& problem, double t_offset) {
  problem.validate();
  const double h = problem.h();
  HistoryMatrix out;
  out.h = h;
  out.t_offset = t_offset;
  out.columns.resize(problem.dimension(), problem.steps + 1);
  out.columns.col(0) = problem.x0;
  Eigen::VectorXd derivative(problem.dimension());
  for (int l = 0; l < problem.steps; ++l) {
    derivative.noalias() = problem.M * out.columns.col(l);
    derivative += problem.c;
    out.columns.col(l + 1) = out.columns.col(l) + h * derivative;
    if (!out.columns.col(l + 1).allFinite()) {
      throw NumericalError("non-finite value in Euler history at step " + std::to_string(l + 1));
    }
  }
  return out;
}

HistoryMatrix history_window(const HistoryMatrix& history, Eigen::Index first, Eigen::Index count) {
  if (first < 0 || count < 1 || first + count > history.samples()) {
    throw ValidationError("history window out of range");
  }
  HistoryMatrix out;
  out.columns = history.columns.middleCols(first, count);
  out.h = history.h;
  out.t_offset = history.time(first);
  out.model_hash = history.model_hash;
  return out;
}

StabilityReport check_stability(const OdeProblem& problem, const HistoryMatrix& history) {
  StabilityReport r;
  double max_exit = 0.0;
  for (Eigen::Index j = 0; j < problem.M.outerSize(); ++j) {
    max_exit = std::max(max_exit, std::abs(problem.M.coeff(j, j)));
  }
  r.step_times_max_exit = problem.h() * max_exit;
  r.guaranteed_nonnegative = r.step_times_max_exit <= 1.0;
  r.min_entry = history.columns.size() > 0 ? history.columns.minCoeff() : 0.0;
  r.negative_entries = r.min_entry < -1e-12;
  return r;
}

SparseMatrix LinearSystem::to_sparse() const {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  for (Eigen::Index i = 0; i < block_count(); ++i) {
    const Eigen::Index row0 = i * n_;
    for (Eigen::Index k = 0; k < n_; ++k) triplets.emplace_back(row0 + k, row0 + k, 1.0);
    for (const Term& term : rows_[i]) {
      const Eigen::Index col0 = term.from_block * n_;
      if (!term.coefficient) {
        for (Eigen::Index k = 0; k < n_; ++k) triplets.emplace_back(row0 + k, col0 + k, -1.0);
        continue;
      }
      const SparseMatrix& c = *term.coefficient;
      for (Eigen::Index j = 0; j < c.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(c, j); it; ++it) {
          triplets.emplace_back(row0 + it.row(), col0 + it.col(), -it.value());
        }
      }
    }
  }
  const Eigen::Index size = block_count() * n_;
  SparseMatrix a(size, size);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

LinearSystem assemble_system(const OdeProblem& problem, const std::vector<MemoryTerm>& memory) {
  problem.validate();
  const Eigen::Index n = problem.dimension();
  const int steps = problem.steps;
  const double h = problem.h();
  for (const MemoryTerm& m : memory) {
    if (m.lag < 2) throw ValidationError("memory lag must be at least 2, got " + std::to_string(m.lag));
    if (m.lag > steps) {
      throw ValidationError("memory lag " + std::to_string(m.lag) + " exceeds step count " +
                            std::to_string(steps));
    }
    if (m.kernel.rows() != n || m.kernel.cols() != n) {
      throw ValidationError("memory kernel dimension does not match the state dimension");
    }
  }

  SparseMatrix identity(n, n);
  identity.setIdentity();
  auto euler = std::make_shared<const SparseMatrix>(identity + h * problem.M);

  LinearSystem sys;
  sys.n_ = n;
  sys.h_ = h;
  sys.rows_.resize(static_cast<std::size_t>(steps) + 1);
  for (int i = 1; i <= steps; ++i) sys.rows_[i].push_back({i - 1, euler});
  for (const MemoryTerm& m : memory) {
    auto block = std::make_shared<const SparseMatrix>(h * m.kernel);
    for (int i = m.lag; i <= steps; ++i) sys.rows_[i].push_back({i - m.lag, block});
  }

  sys.b_.resize(n * (steps + 1));
  sys.b_.head(n) = problem.x0;
  const Eigen::VectorXd forcing = h * problem.c;
  for (int i = 1; i <= steps; ++i) sys.b_.segment(i * n, n) = forcing;
  return sys;
}

LinearSystem identity_system(Eigen::VectorXd b, Eigen::Index state_dimension) {
  if (state_dimension < 1 || b.size() % state_dimension != 0 || b.size() == 0) {
    throw ValidationError("right-hand side is not a whole number of blocks");
  }
  LinearSystem sys;
  sys.n_ = state_dimension;
  sys.rows_.resize(static_cast<std::size_t>(b.size() / state_dimension));
  sys.b_ = std::move(b);
  return sys;
}

HistoryMatrix solve_history(const LinearSystem& system) {
  const Eigen::Index n = system.state_dimension();
  const Eigen::Index blocks = system.block_count();
  HistoryMatrix out;
  out.h = system.step();
  out.columns.resize(n, blocks);
  Eigen::VectorXd acc(n);
  for (Eigen::Index i = 0; i < blocks; ++i) {
    acc = system.rhs().segment(i * n, n);
    for (const auto& term : system.row_terms(i)) {
      if (term.coefficient) {
        acc.noalias() += *term.coefficient * out.columns.col(term.from_block);
      } else {
        acc += out.columns.col(term.from_block);
      }
    }
    out.columns.col(i) = acc;
  }
  return out;
}

LinearSystem pad_for_time(const LinearSystem& system, Eigen::Index anchor, Eigen::Index copies) {
  if (anchor < 0 || anchor >= system.block_count()) {
    throw ValidationError("padding anchor " + std::to_string(anchor) + " outside the system");
  }
  if (copies < 0) throw ValidationError("padding count must be nonnegative");

  LinearSystem out;
  out.n_ = system.n_;
  out.h_ = system.h_;
  Eigen::Index existing = 0;
  Eigen::Index origin = anchor;
  if (system.padding_ && system.padding_->anchor <= anchor) {
    // Everything after the old anchor is already a copy; keep it.
    origin = system.padding_->anchor;
    existing = system.padding_->copies;
  }
  const Eigen::Index kept = std::max(anchor, origin + existing) + 1;
  out.rows_.assign(system.rows_.begin(), system.rows_.begin() + kept);
  for (Eigen::Index i = 0; i < copies; ++i) out.rows_.push_back({{kept - 1 + i, nullptr}});

  const Eigen::Index n = system.n_;
  out.b_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.rows_.size()) * n);
  out.b_.head(kept * n) = system.b_.head(kept * n);
  out.padding_ = LinearSystem::Padding{origin, existing + copies};
  return out;
}

double amplified_mass_fraction(const HistoryMatrix& solved, const LinearSystem::Padding& padding) {
  const double total = solved.columns.squaredNorm();
  if (total == 0.0) throw ValidationError("zero history has no mass");
  const Eigen::Index first = padding.anchor;
  const Eigen::Index count = padding.copies + 1;
  if (first + count > solved.samples()) throw ValidationError("padding exceeds solved history");
  return solved.columns.middleCols(first, count).squaredNorm() / total;
}

NormalizedHistory normalize_history(const HistoryMatrix& history) {
  NormalizedHistory out;
  out.step_norms_sq = history.columns.colwise().squaredNorm().transpose();
  out.global_norm = std::sqrt(out.step_norms_sq.sum());
  if (!(out.global_norm > 0.0)) throw ValidationError("cannot normalize a zero history");
  out.unit = history.columns / out.global_norm;
  out.h = history.h;
  out.t_offset = history.t_offset;
  out.model_hash = history.model_hash;
  return out;
}

}  // namespace qdea
