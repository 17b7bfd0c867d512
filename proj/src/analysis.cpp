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

#include "qdea/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>

#include <fftw3.h>

#include <Eigen/SVD>

#include "qdea/error.hpp"

namespace qdea {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(Eigen::Index n) { return n > 0 && std::has_single_bit(static_cast<std::uint64_t>(n)); }

Eigen::Index floor_power_of_two(Eigen::Index n) {
  return static_cast<Eigen::Index>(std::bit_floor(static_cast<std::uint64_t>(n)));
}

Eigen::Index ceil_power_of_two(Eigen::Index n) {
  return static_cast<Eigen::Index>(std::bit_ceil(static_cast<std::uint64_t>(n)));
}

/// Windowed copy with one series per column (time runs down the rows).
Eigen::MatrixXd windowed_series(const Eigen::MatrixXd& rows_are_series, const WindowPlan& plan) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(plan.output_length, rows_are_series.rows());
  out.topRows(plan.kept) = rows_are_series.middleCols(plan.first, plan.kept).transpose();
  return out;
}

Eigen::VectorXd fourier_axis(Eigen::Index length, double h) {
  Eigen::VectorXd axis(length);
  const double span = static_cast<double>(length) * h;
  for (Eigen::Index k = 0; k < length; ++k) {
    const Eigen::Index signed_k = k <= length / 2 ? k : k - length;
    axis[k] = span > 0.0 ? static_cast<double>(signed_k) / span : static_cast<double>(signed_k);
  }
  return axis;
}

/// Support duration of every Haar wavelet in time units.
Eigen::VectorXd haar_axis(Eigen::Index length, double h) {
  Eigen::VectorXd axis(length);
  const double span = static_cast<double>(length) * (h > 0.0 ? h : 1.0);
  axis[0] = span;
  for (Eigen::Index m = 1; m < length; ++m) {
    axis[m] = span / static_cast<double>(std::bit_floor(static_cast<std::uint64_t>(m)));
  }
  return axis;
}

}  // namespace

SVDResult svd_history(const Eigen::MatrixXd& x, std::optional<Eigen::Index> rank) {
  if (x.size() == 0 || x.cwiseAbs().maxCoeff() == 0.0) {
    throw ValidationError("cannot decompose a zero history");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index full = std::min(x.rows(), x.cols());

  SVDResult out;
  Eigen::Index r = 0;
  if (rank) {
    if (*rank < 1) throw ValidationError("requested rank must be positive");
    r = std::min(*rank, full);
    out.rank_clamped = *rank > full;
  } else {
    const double tol = s[0] * static_cast<double>(std::max(x.rows(), x.cols())) *
                       std::numeric_limits<double>::epsilon();
    while (r < full && s[r] > tol) ++r;
    r = std::max<Eigen::Index>(r, 1);
  }
  out.sigma = s.head(r);
  out.left = svd.matrixU().leftCols(r);
  out.right = svd.matrixV().leftCols(r);

  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.left.rows(); ++i) {
      const double a = std::abs(out.left(i, j));
      if (a > best) {
        best = a;
        pivot = i;
      }
    }
    if (out.left(pivot, j) < 0.0) {
      out.left.col(j) *= -1.0;
      out.right.col(j) *= -1.0;
    }
  }
  return out;
}

Eigen::Index effective_rank(const Eigen::VectorXd& sigma, double fraction) {
  const double total = sigma.squaredNorm();
  if (total == 0.0) return 0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < sigma.size(); ++j) {
    acc += sigma[j] * sigma[j];
    if (acc >= fraction * total) return j + 1;
  }
  return sigma.size();
}

double truncation_error(const Eigen::VectorXd& sigma, Eigen::Index r) {
  if (r >= sigma.size()) return 0.0;
  return sigma.tail(sigma.size() - r).norm();
}

ScaledVectors scaled_singular_vectors(const SVDResult& svd) {
  const Eigen::VectorXd root = svd.sigma.cwiseSqrt();
  return {svd.left * root.asDiagonal(), svd.right * root.asDiagonal()};
}

std::string to_string(TransformKind kind) {
  return kind == TransformKind::fourier ? "fourier" : "haar";
}

std::string to_string(WindowPolicy::Kind kind) {
  switch (kind) {
    case WindowPolicy::Kind::full: return "full";
    case WindowPolicy::Kind::trunc_tail: return "trunc-tail";
    case WindowPolicy::Kind::trunc_head: return "trunc-head";
    case WindowPolicy::Kind::zero_pad: return "zero-pad";
  }
  return "unknown";
}

WindowPolicy WindowPolicy::parse(const std::string& name) {
  if (name == "full") return {Kind::full};
  if (name == "trunc-tail") return {Kind::trunc_tail};
  if (name == "trunc-head") return {Kind::trunc_head};
  if (name == "zero-pad") return {Kind::zero_pad};
  throw ValidationError("unknown window policy '" + name +
                        "' (expected full, trunc-tail, trunc-head or zero-pad)");
}

WindowPlan plan_window(Eigen::Index length, const WindowPolicy& policy, TransformKind kind) {
  WindowPlan plan;
  plan.policy = policy;
  plan.input_length = length;
  plan.first = 0;
  plan.kept = length;
  plan.output_length = length;
  switch (policy.kind) {
    case WindowPolicy::Kind::full:
      break;
    case WindowPolicy::Kind::trunc_tail:
      plan.kept = plan.output_length = floor_power_of_two(length);
      break;
    case WindowPolicy::Kind::trunc_head:
      plan.kept = plan.output_length = floor_power_of_two(length);
      plan.first = length - plan.kept;
      break;
    case WindowPolicy::Kind::zero_pad:
      plan.output_length = ceil_power_of_two(length);
      break;
  }
  if (plan.output_length < 2) throw ValidationError("transform needs at least two samples");
  if (kind == TransformKind::haar && !is_power_of_two(plan.output_length)) {
    throw ValidationError("Haar transform needs a power-of-two length, got " +
                          std::to_string(plan.output_length) +
                          "; choose window trunc-tail, trunc-head or zero-pad");
  }
  return plan;
}

Eigen::VectorXd Spectrum::power() const {
  return coefficients.cwiseAbs2().colwise().sum().transpose();
}

Spectrum fourier_time(const Eigen::MatrixXd& x, double h, const WindowPolicy& window) {
  Spectrum out;
  out.kind = TransformKind::fourier;
  out.h = h;
  out.window = plan_window(x.cols(), window, TransformKind::fourier);
  const Eigen::Index length = out.window.output_length;
  const Eigen::Index series = x.rows();

  Eigen::MatrixXcd buffer = windowed_series(x, out.window).cast<std::complex<double>>();
  Eigen::MatrixXcd result(length, series);
  {
    auto* in = reinterpret_cast<fftw_complex*>(buffer.data());
    auto* res = reinterpret_cast<fftw_complex*>(result.data());
    int n = static_cast<int>(length);
    fftw_plan plan;
    {
      std::lock_guard lock(fftw_planner_mutex());
      plan = fftw_plan_many_dft(1, &n, static_cast<int>(series), in, nullptr, 1, n, res, nullptr, 1,
                                n, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw NumericalError("FFTW could not plan a transform of length " + std::to_string(n));
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  result /= std::sqrt(static_cast<double>(length));
  out.coefficients = result.transpose();
  out.axis = fourier_axis(length, h);
  return out;
}

Spectrum fourier_time(const Eigen::VectorXd& series, double h, const WindowPolicy& window) {
  return fourier_time(Eigen::MatrixXd(series.transpose()), h, window);
}

void haar_forward(std::span<double> data) {
  const std::size_t n = data.size();
  if (!std::has_single_bit(n)) throw ValidationError("Haar transform needs a power-of-two length");
  std::vector<double> scratch(n);
  const double r = 1.0 / std::sqrt(2.0);
  // Each pass halves the approximation band; details of the pass land in
  // [half, len), which is exactly the scale-major coefficient order.
  for (std::size_t len = n; len > 1; len /= 2) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
      scratch[i] = (data[2 * i] + data[2 * i + 1]) * r;
      scratch[half + i] = (data[2 * i] - data[2 * i + 1]) * r;
    }
    std::copy_n(scratch.begin(), len, data.begin());
  }
}

void haar_inverse(std::span<double> data) {
  const std::size_t n = data.size();
  if (!std::has_single_bit(n)) throw ValidationError("Haar transform needs a power-of-two length");
  std::vector<double> scratch(n);
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t len = 2; len <= n; len *= 2) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
      scratch[2 * i] = (data[i] + data[half + i]) * r;
      scratch[2 * i + 1] = (data[i] - data[half + i]) * r;
    }
    std::copy_n(scratch.begin(), len, data.begin());
  }
}

Eigen::MatrixXd haar_matrix(Eigen::Index length) {
  if (!is_power_of_two(length)) throw ValidationError("Haar matrix needs a power-of-two size");
  Eigen::MatrixXd h(length, length);
  h.row(0).setConstant(1.0 / std::sqrt(static_cast<double>(length)));
  for (Eigen::Index m = 1; m < length; ++m) {
    const auto level = static_cast<Eigen::Index>(std::bit_floor(static_cast<std::uint64_t>(m)));
    const Eigen::Index offset = m - level;
    const Eigen::Index support = length / level;
    const double amp = std::sqrt(static_cast<double>(level) / static_cast<double>(length));
    h.row(m).setZero();
    h.row(m).segment(offset * support, support / 2).setConstant(amp);
    h.row(m).segment(offset * support + support / 2, support / 2).setConstant(-amp);
  }
  return h;
}

Spectrum haar_time(const Eigen::MatrixXd& x, double h, const WindowPolicy& window) {
  Spectrum out;
  out.kind = TransformKind::haar;
  out.h = h;
  out.window = plan_window(x.cols(), window, TransformKind::haar);
  Eigen::MatrixXd buffer = windowed_series(x, out.window);
  for (Eigen::Index s = 0; s < buffer.cols(); ++s) {
    haar_forward(std::span<double>(buffer.col(s).data(), static_cast<std::size_t>(buffer.rows())));
  }
  out.coefficients = buffer.transpose().cast<std::complex<double>>();
  out.axis = haar_axis(out.window.output_length, h);
  return out;
}

Spectrum haar_time(const Eigen::VectorXd& series, double h, const WindowPolicy& window) {
  return haar_time(Eigen::MatrixXd(series.transpose()), h, window);
}

Spectrum transform_right_vectors(const SVDResult& svd, TransformKind kind, double h,
                                 const WindowPolicy& window) {
  const Eigen::MatrixXd rows = svd.right.transpose();
  return kind == TransformKind::fourier ? fourier_time(rows, h, window) : haar_time(rows, h, window);
}

PowerSpectrum power_spectrum(const NormalizedHistory& history, const WindowPolicy& window,
                             TransformKind kind) {
  const Spectrum s = kind == TransformKind::fourier ? fourier_time(history.unit, history.h, window)
                                                    : haar_time(history.unit, history.h, window);
  return {s.power(), s.axis, s.kind, s.window};
}

Eigen::Index dominant_nonzero_bin(const Eigen::VectorXd& power) {
  const Eigen::Index n = power.size();
  if (n < 2) throw ValidationError("spectrum has no nonzero bins");
  Eigen::Index best = 1;
  for (Eigen::Index k = 2; k < n; ++k) {
    if (power[k] > power[best]) best = k;
  }
  return best <= n / 2 ? best : n - best;
}

}  // namespace qdea
