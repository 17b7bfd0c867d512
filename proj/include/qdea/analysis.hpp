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

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdea/lde.hpp"

namespace qdea {

struct SVDResult {
  Eigen::VectorXd sigma;  ///< nonincreasing
  Eigen::MatrixXd left;   ///< N x R, state profiles
  Eigen::MatrixXd right;  ///< (T+1) x R, temporal profiles
  bool rank_clamped = false;

  Eigen::Index rank() const { return sigma.size(); }
};

/// Thin SVD of the history. In every left vector the entry of largest
/// magnitude is positive (lowest index on ties). A requested rank above
/// min(N, T+1) is clamped and flagged.
SVDResult svd_history(const Eigen::MatrixXd& x, std::optional<Eigen::Index> rank = std::nullopt);
inline SVDResult svd_history(const HistoryMatrix& x, std::optional<Eigen::Index> rank = std::nullopt) {
  return svd_history(x.columns, rank);
}

/// Smallest rank whose leading squared singular values reach `fraction` of
/// the total.
Eigen::Index effective_rank(const Eigen::VectorXd& sigma, double fraction);

/// Frobenius error of the best rank-r approximation, from the tail of sigma.
double truncation_error(const Eigen::VectorXd& sigma, Eigen::Index r);

struct ScaledVectors {
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
};

/// Columns multiplied by sqrt(sigma_j).
ScaledVectors scaled_singular_vectors(const SVDResult& svd);

enum class TransformKind { fourier, haar };

std::string to_string(TransformKind kind);

/// How a time axis meets a transform's length requirement.
struct WindowPolicy {
  enum class Kind {
    full,        ///< keep every sample
    trunc_tail,  ///< keep the first power-of-two samples
    trunc_head,  ///< keep the last power-of-two samples
    zero_pad,    ///< pad with zeros up to the next power of two
  };
  Kind kind = Kind::full;

  static WindowPolicy fourier_default() { return {Kind::full}; }
  static WindowPolicy haar_default() { return {Kind::trunc_tail}; }
  static WindowPolicy parse(const std::string& name);
};

std::string to_string(WindowPolicy::Kind kind);

/// Result of applying the windowing policy to `length` samples.
struct WindowPlan {
  WindowPolicy policy;
  Eigen::Index input_length = 0;
  Eigen::Index first = 0;          ///< first retained input sample
  Eigen::Index kept = 0;           ///< retained input samples
  Eigen::Index output_length = 0;  ///< kept plus zero padding
};

WindowPlan plan_window(Eigen::Index length, const WindowPolicy& policy, TransformKind kind);

struct Spectrum {
  /// One row per input series (state, or singular vector), one column per bin.
  Eigen::MatrixXcd coefficients;
  /// Cycles per unit time for Fourier bins (signed); scale index for Haar.
  Eigen::VectorXd axis;
  TransformKind kind = TransformKind::fourier;
  WindowPlan window;
  double h = 0.0;

  /// Per-bin sum over rows of squared magnitudes.
  Eigen::VectorXd power() const;
  double total_power() const { return coefficients.squaredNorm(); }
};

/// Unitary DFT along the time axis (columns of x). Bin k has frequency
/// k / (T' h), folded to negative values above T'/2.
Spectrum fourier_time(const Eigen::MatrixXd& x, double h, const WindowPolicy& window = WindowPolicy::fourier_default());
inline Spectrum fourier_time(const HistoryMatrix& x, const WindowPolicy& window = WindowPolicy::fourier_default()) {
  return fourier_time(x.columns, x.h, window);
}
Spectrum fourier_time(const Eigen::VectorXd& series, double h, const WindowPolicy& window = WindowPolicy::fourier_default());

/// Orthonormal Haar transform along the time axis. Coefficient 0 is the
/// constant wavelet, then scale-major (coarsest first), translation within
/// a scale.
Spectrum haar_time(const Eigen::MatrixXd& x, double h, const WindowPolicy& window = WindowPolicy::haar_default());
inline Spectrum haar_time(const HistoryMatrix& x, const WindowPolicy& window = WindowPolicy::haar_default()) {
  return haar_time(x.columns, x.h, window);
}
Spectrum haar_time(const Eigen::VectorXd& series, double h, const WindowPolicy& window = WindowPolicy::haar_default());

/// In-place orthonormal Haar transform and its inverse on one power-of-two
/// length series.
void haar_forward(std::span<double> data);
void haar_inverse(std::span<double> data);

/// Explicit L x L Haar matrix, rows in coefficient order.
Eigen::MatrixXd haar_matrix(Eigen::Index length);

/// Applies the transform to every right singular vector (rows of the result
/// are singular vectors).
Spectrum transform_right_vectors(const SVDResult& svd, TransformKind kind, double h,
                                 const WindowPolicy& window);

/// Per-bin total squared magnitude of the transformed normalized history.
struct PowerSpectrum {
  Eigen::VectorXd power;
  Eigen::VectorXd axis;
  TransformKind kind = TransformKind::fourier;
  WindowPlan window;
};

PowerSpectrum power_spectrum(const NormalizedHistory& history,
                             const WindowPolicy& window = WindowPolicy::fourier_default(),
                             TransformKind kind = TransformKind::fourier);

/// Index of the largest-power nonzero Fourier bin, reported as |signed bin|.
Eigen::Index dominant_nonzero_bin(const Eigen::VectorXd& power);

}  // namespace qdea
