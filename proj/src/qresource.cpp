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

#include "qdea/qresource.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "qdea/error.hpp"

namespace qdea {

namespace {

int ceil_log2(double x) { return x <= 1.0 ? 0 : static_cast<int>(std::ceil(std::log2(x))); }

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::string to_string(NormKind kind) { return kind == NormKind::one ? "one" : "spectral"; }

NormKind norm_kind_from_string(const std::string& name) {
  if (name == "one" || name == "1") return NormKind::one;
  if (name == "spectral" || name == "2") return NormKind::spectral;
  throw ValidationError("unknown norm kind '" + name + "' (expected one or spectral)");
}

MatrixNorm matrix_norm(const SparseMatrix& m, NormKind kind) {
  if (kind == NormKind::one) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m.outerSize(); ++j) {
      double sum = 0.0;
      for (SparseMatrix::InnerIterator it(m, j); it; ++it) sum += std::abs(it.value());
      worst = std::max(worst, sum);
    }
    return {worst, kind};
  }
  if (m.rows() > 4096 || m.cols() > 4096) {
    throw CapacityError("spectral norm is only computed densely up to dimension 4096");
  }
  const Eigen::MatrixXd dense(m);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
  return {svd.singularValues().size() ? svd.singularValues()[0] : 0.0, kind};
}

void ResourceInputs::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (!(t_max > 0.0)) throw ValidationError("t_max must be positive");
  if (!(m_norm.value > 0.0)) throw ValidationError("matrix norm must be positive");
  if (!(sparsity > 0.0)) throw ValidationError("sparsity must be positive");
  if (!(kappa >= 1.0)) throw ValidationError("kappa must be at least 1");
  if (!(x0_norm > 0.0)) throw ValidationError("initial vector norm must be positive");
  if (!(c_norm >= 0.0)) throw ValidationError("forcing norm must be nonnegative");
  if (!(dimension >= 1.0)) throw ValidationError("dimension must be at least 1");
}

StepRecommendation recommend_T(double t_max, const MatrixNorm& m_norm) {
  if (!(t_max > 0.0) || !(m_norm.value > 0.0)) throw ValidationError("recommend_T needs positive inputs");
  return {static_cast<long long>(std::ceil(t_max * m_norm.value)), m_norm.kind};
}

std::string to_string(TruncationBinding b) {
  switch (b) {
    case TruncationBinding::formula: return "formula";
    case TruncationBinding::minimum_five: return "k>=5";
    case TruncationBinding::factorial: return "(k+1)!>=2T";
  }
  return "unknown";
}

TruncationOrder choose_truncation_order(const ResourceInputs& in, long long steps) {
  in.validate();
  if (steps < 1) throw ValidationError("step count must be at least 1");
  const double t = static_cast<double>(steps);
  const double argument = (1.0 + in.t_max * in.c_norm / in.x0_norm) * in.kappa * std::sqrt(3.0 * t) *
                          (t + 1.0) / (4.0 * in.epsilon);
  TruncationOrder out;
  out.formula_value = static_cast<int>(std::ceil(std::log2(argument)));

  int factorial_min = 1;
  while (factorial(factorial_min + 1) < 2.0 * t) ++factorial_min;

  out.k = out.formula_value;
  out.binding = TruncationBinding::formula;
  if (5 > out.k) {
    out.k = 5;
    out.binding = TruncationBinding::minimum_five;
  }
  if (factorial_min > out.k) {
    out.k = factorial_min;
    out.binding = TruncationBinding::factorial;
  }
  return out;
}

TruncationOrder choose_truncation_order(const ResourceInputs& in) {
  return choose_truncation_order(in, recommend_T(in.t_max, in.m_norm).steps);
}

double choose_delta(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0, 1]");
  const double delta = epsilon / (4.0 * std::sqrt(66.0));
  if (delta > delta_ceiling()) throw NumericalError("delta exceeds 1/(2 sqrt(66))");
  return delta;
}

double delta_ceiling() { return 1.0 / (2.0 * std::sqrt(66.0)); }

double taylor_error_bound(double kappa, long long step, int k, double x0_norm, double t_c_norm) {
  if (step < 0 || k < 1) throw ValidationError("taylor_error_bound needs step >= 0 and k >= 1");
  return 2.8 * kappa * static_cast<double>(step) * (x0_norm + t_c_norm) / factorial(k + 1);
}

SuccessProbability success_probability_bounds() {
  SuccessProbability p;
  p.pre_projection = 1.0 / 66.0;
  p.post_projection = 1.0 / 264.0;
  p.series_factor = 1.28;
  for (int j = 1; j <= 30; ++j) p.exact_series += 1.0 / (factorial(j) * factorial(j));
  const double gap = 3.0 - std::numbers::e;
  p.garbage_constant = 1.28 * 4.0 / (gap * gap);
  p.garbage_bound = 65.0;
  return p;
}

std::pair<double, double> normalized_difference_check(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  const double nv = v.norm();
  const double nw = w.norm();
  if (nv == 0.0 || nw == 0.0) throw ValidationError("normalized difference needs nonzero vectors");
  return {(v / nv - w / nw).norm(), 2.0 * (v - w).norm() / nv};
}

double gate_count_proxy(const ResourceInputs& in, int k, double delta) {
  if (k < 1 || !(delta > 0.0)) throw ValidationError("gate count needs k >= 1 and delta > 0");
  const double lead = in.kappa * k * in.t_max * in.m_norm.value * in.sparsity;
  const double log_term = std::log(lead * in.dimension / delta);
  return lead * k * log_term * log_term * log_term;
}

QubitTally qubit_tally(const ResourceInputs& in, long long steps, int k) {
  QubitTally q;
  q.state = in.nodes > 0
                ? static_cast<int>(std::ceil(in.nodes * std::log2(static_cast<double>(in.states_per_node)) - 1e-12))
                : ceil_log2(in.dimension);
  q.time = ceil_log2(static_cast<double>(steps) + 1.0);
  q.taylor = ceil_log2(static_cast<double>(k) + 1.0);
  q.ancilla = ceil_log2(in.sparsity + 1.0) + 3;
  return q;
}

ResourceEstimate estimate_resources(const ResourceInputs& in, long long steps) {
  ResourceEstimate r;
  r.inputs = in;
  r.steps = steps;
  r.truncation = choose_truncation_order(in, steps);
  r.delta = choose_delta(in.epsilon);
  r.success = success_probability_bounds();
  r.gate_count = gate_count_proxy(in, r.truncation.k, r.delta);
  r.qubits = qubit_tally(in, steps, r.truncation.k);
  return r;
}

ResourceEstimate estimate_resources(const ResourceInputs& in) {
  in.validate();
  return estimate_resources(in, recommend_T(in.t_max, in.m_norm).steps);
}

double eigenvector_condition_number(const Eigen::MatrixXd& m, double limit) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Eigen::MatrixXcd v = es.eigenvectors();
  for (Eigen::Index j = 0; j < v.cols(); ++j) v.col(j).normalize();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
  const auto& s = svd.singularValues();
  const double smallest = s[s.size() - 1];
  const double kappa = smallest > 0.0 ? s[0] / smallest : std::numeric_limits<double>::infinity();
  if (!(kappa <= limit)) {
    throw NumericalError("matrix is numerically non-diagonalizable (eigenvector condition number " +
                         std::to_string(kappa) + ")");
  }
  return kappa;
}

TruncationValidation validate_truncation(const Eigen::MatrixXd& m, const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& c, double h, int steps, int k) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || x0.size() != n || c.size() != n) throw ValidationError("dimension mismatch");
  if (n > 64) throw CapacityError("truncation validation uses a dense oracle; dimension must be <= 64");
  if (steps < 1 || k < 1 || !(h > 0.0)) throw ValidationError("need steps >= 1, k >= 1 and h > 0");

  TruncationValidation out;
  const bool zero = m.cwiseAbs().maxCoeff() == 0.0;
  out.kappa = zero ? 1.0 : eigenvector_condition_number(m);

  // S = sum_{j<=k} (Mh)^j / j!,  P = sum_{1<=j<=k} (Mh)^{j-1} h / j!
  const Eigen::MatrixXd mh = m * h;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd series = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd forcing = Eigen::MatrixXd::Zero(n, n);
  for (int j = 1; j <= k; ++j) {
    forcing += power * (h / factorial(j));
    power = power * mh;
    series += power / factorial(j);
  }
  const Eigen::VectorXd forcing_step = forcing * c;

  // Augmented generator [[M, c], [0, 0]] carries the forcing exactly.
  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(n + 1, n + 1);
  augmented.topLeftCorner(n, n) = m;
  augmented.topRightCorner(n, 1) = c;
  Eigen::VectorXd start(n + 1);
  start << x0, 1.0;

  const double t_max = h * steps;
  Eigen::VectorXd y = x0;
  for (int i = 0; i <= steps; ++i) {
    const Eigen::MatrixXd flow = (augmented * (h * i)).exp();
    const Eigen::VectorXd exact = (flow * start).head(n);
    const double err = (exact - y).norm();
    const double bound = taylor_error_bound(out.kappa, i, k, x0.norm(), t_max * c.norm());
    out.observed.push_back(err);
    out.bound.push_back(bound);
    out.max_observed = std::max(out.max_observed, err);
    if (err > bound) out.bound_holds = false;
    y = series * y + forcing_step;
  }
  return out;
}

}  // namespace qdea
