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

// Reference implementations used as test oracles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace qdea::oracle {

// Cyclic Jacobi eigenvalue iteration for a symmetric matrix.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off < 1e-300) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

inline Eigen::MatrixXcd dense_dft(Eigen::Index n) {
  Eigen::MatrixXcd f(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      f(k, j) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), angle);
    }
  }
  return f;
}

// Haar basis built recursively: H_{2n} = [H_n ⊗ (1, 1); I_n ⊗ (1, -1)] / √2,
// then rows reordered so that each detail level is contiguous.
inline Eigen::MatrixXd recursive_haar(Eigen::Index n) {
  if (n == 1) return Eigen::MatrixXd::Ones(1, 1);
  const Eigen::MatrixXd half = recursive_haar(n / 2);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    for (Eigen::Index j = 0; j < n / 2; ++j) {
      out(i, 2 * j) = half(i, j) * r;
      out(i, 2 * j + 1) = half(i, j) * r;
    }
    out(n / 2 + i, 2 * i) = r;
    out(n / 2 + i, 2 * i + 1) = -r;
  }
  return out;
}

}  // namespace qdea::oracle
