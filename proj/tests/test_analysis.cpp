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

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qdea/analysis.hpp"
#include "qdea/error.hpp"
#include "qdea/lde.hpp"
#include "qdea/scenario.hpp"
#include "oracles.hpp"

using namespace qdea;
using cd = std::complex<double>;
using namespace qdea::oracle;

namespace {

HistoryMatrix seven_node_window() {
  const auto doc = parse_network(bundled_data_dir() / "networks" / "seven_node_sis.json");
  const RateMatrix q = build_generator(doc.network, doc.model);
  const ProbVector x0 = make_initial_distribution(ProductInitial::binary_uniform(7, 0.35));
  const HistoryMatrix full = euler_step_history(OdeProblem::markov(q, x0, 2.0, 2054));
  return history_window(full, 1027, 1028);
}

const HistoryMatrix& cached_window() {
  static const HistoryMatrix x = seven_node_window();
  return x;
}

}  // namespace

TEST(Svd, RankOneRecoversFactors) {
  const Eigen::Vector4d u = Eigen::Vector4d(1, -2, 3, 1).normalized();
  const Eigen::Vector3d v = Eigen::Vector3d(-1, 1, 2).normalized();
  const SVDResult s = svd_history(Eigen::MatrixXd(3.0 * u * v.transpose()));
  ASSERT_EQ(s.rank(), 1);
  EXPECT_NEAR(s.sigma[0], 3.0, 1e-14);
  // The largest-magnitude left entry (3/√15) must be positive.
  EXPECT_LE((s.left.col(0) - u).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((s.right.col(0) - v).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Svd, SignConventionFlipsBothFactors) {
  const Eigen::Vector3d u = Eigen::Vector3d(-3, 1, 0).normalized();
  const Eigen::Vector2d v = Eigen::Vector2d(1, 1).normalized();
  const SVDResult s = svd_history(Eigen::MatrixXd(2.0 * u * v.transpose()));
  EXPECT_GT(s.left(0, 0), 0.0);
  EXPECT_LE((s.left.col(0) + u).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((s.right.col(0) + v).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Svd, MatchesJacobiOracleOnRandomMatrices) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 16);
  for (int trial = 0; trial < 100; ++trial) {
    const int r = dim(rng), c = dim(rng);
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(r, c, [&] { return g(rng); });
    const SVDResult s = svd_history(x, std::min(r, c));
    const auto ev = jacobi_eigenvalues(x.transpose() * x);
    for (int i = 0; i < std::min(r, c); ++i) EXPECT_NEAR(s.sigma[i], std::sqrt(std::max(ev[i], 0.0)), 1e-9);
  }
}

TEST(Svd, RandomEightBySix) {
  std::mt19937_64 rng(86);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(8, 6, [&] { return u(rng); });
  const SVDResult s = svd_history(x);
  ASSERT_EQ(s.rank(), 6);
  const auto ev = jacobi_eigenvalues(x.transpose() * x);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.sigma[i], std::sqrt(ev[i]), 1e-10);
  EXPECT_LE((s.left * s.sigma.asDiagonal() * s.right.transpose() - x).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Svd, EckartYoungIdentity) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(12, 9, [&] { return g(rng); });
    const SVDResult full = svd_history(x, 9);
    for (Eigen::Index r = 1; r <= 9; ++r) {
      const SVDResult part = svd_history(x, r);
      const Eigen::MatrixXd approx = part.left * part.sigma.asDiagonal() * part.right.transpose();
      EXPECT_NEAR((x - approx).norm(), truncation_error(full.sigma, r), 1e-9);
    }
  }
}

TEST(Svd, RankClampAndZeroInput) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(3, 2);
  const SVDResult s = svd_history(x, 5);
  EXPECT_TRUE(s.rank_clamped);
  EXPECT_EQ(s.rank(), 2);
  EXPECT_THROW(svd_history(Eigen::MatrixXd::Zero(3, 3)), ValidationError);
}

TEST(Svd, EffectiveRank) {
  const Eigen::Vector3d sigma(3.0, 1.0, 0.1);
  // Cumulative energy fractions: 9/10.01, 10/10.01, 1.
  EXPECT_EQ(effective_rank(sigma, 0.89), 1);
  EXPECT_EQ(effective_rank(sigma, 0.9), 2);
  EXPECT_EQ(effective_rank(sigma, 0.9995), 3);
}

TEST(Svd, ScaledVectors) {
  SVDResult s;
  s.sigma = Eigen::Vector2d(4.0, 0.0);
  s.left = Eigen::MatrixXd::Identity(3, 2);
  s.right = Eigen::MatrixXd::Identity(2, 2);
  const ScaledVectors v = scaled_singular_vectors(s);
  EXPECT_DOUBLE_EQ(v.left.col(0).norm(), 2.0);
  EXPECT_DOUBLE_EQ(v.right.col(0).norm(), 2.0);
  EXPECT_EQ(v.left.col(1).norm(), 0.0);
}

TEST(SevenNodeAnalysis, SingularValuesDecaySteeply) {
  const SVDResult s = svd_history(cached_window(), 128);
  EXPECT_LE(effective_rank(s.sigma, 0.9999), 10);
  for (Eigen::Index i = 0; i + 1 < 8; ++i) EXPECT_GT(s.sigma[i], 5.0 * s.sigma[i + 1]);
}

TEST(SevenNodeAnalysis, FirstRightVectorIsNearlyConstant) {
  const SVDResult s = svd_history(cached_window(), 4);
  const Eigen::VectorXd first = scaled_singular_vectors(s).right.col(0).cwiseAbs();
  EXPECT_LE(first.maxCoeff() / first.minCoeff(), 2.0);
}

TEST(SevenNodeAnalysis, ZeroFrequencyDominates) {
  const NormalizedHistory n = normalize_history(cached_window());
  const PowerSpectrum p = power_spectrum(n);
  Eigen::Index arg = 0;
  p.power.maxCoeff(&arg);
  EXPECT_EQ(arg, 0);
  for (Eigen::Index k = 1; k < 6; ++k) EXPECT_GT(p.power[k], p.power[k + 1]);
  EXPECT_NEAR(p.power.sum(), 1.0, 1e-10);

  const SVDResult s = svd_history(cached_window(), 4);
  const Eigen::VectorXd first = transform_right_vectors(s, TransformKind::fourier, cached_window().h,
                                                        WindowPolicy::fourier_default())
                                    .coefficients.row(0)
                                    .cwiseAbs2()
                                    .transpose();
  EXPECT_GT(first[0], 0.5 * first.sum());
}

TEST(SevenNodeAnalysis, ZerothHaarDominates) {
  const NormalizedHistory n = normalize_history(cached_window());
  const PowerSpectrum p = power_spectrum(n, WindowPolicy::haar_default(), TransformKind::haar);
  EXPECT_EQ(p.window.output_length, 1024);
  Eigen::Index arg = 0;
  p.power.maxCoeff(&arg);
  EXPECT_EQ(arg, 0);
}

TEST(Fourier, ConstantSeriesIsAllZeroFrequency) {
  const Spectrum s = fourier_time(Eigen::VectorXd(Eigen::VectorXd::Constant(37, 0.4)), 0.1);
  EXPECT_NEAR(std::abs(s.coefficients(0, 0)), 0.4 * std::sqrt(37.0), 1e-13);
  EXPECT_LE(s.coefficients.row(0).tail(36).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(s.axis[1], 1.0 / 3.7, 1e-14);
  EXPECT_LT(s.axis[36], 0.0);
}

TEST(Fourier, MatchesDenseDft) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (const Eigen::Index n : {2, 3, 7, 16, 100, 256}) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(3, n, [&] { return g(rng); });
    const Spectrum s = fourier_time(x, 1.0);
    const Eigen::MatrixXcd expected = (dense_dft(n) * x.transpose().cast<cd>()).transpose();
    EXPECT_LE((s.coefficients - expected).cwiseAbs().maxCoeff(), 1e-12) << n;
  }
}

TEST(Fourier, UnitaryAtPowerOfTwoAndOddSizes) {
  for (const Eigen::Index n : {8, 63, 1024}) {
    const Spectrum s = fourier_time(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)), 1.0);
    const Eigen::MatrixXcd u = s.coefficients.transpose();
    EXPECT_LE((u.adjoint() * u - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12) << n;
  }
}

TEST(Fourier, CosineGivesSymmetricBins) {
  const Eigen::Index n = 64;
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) x[t] = std::cos(2.0 * std::numbers::pi * 5.0 * t / n);
  const Spectrum s = fourier_time(x, 1.0 / n);
  const Eigen::VectorXd p = s.power();
  EXPECT_NEAR(p[5], p[n - 5], 1e-12);
  EXPECT_NEAR(p[5] + p[n - 5], p.sum(), 1e-10);
  EXPECT_EQ(dominant_nonzero_bin(p), 5);
  EXPECT_NEAR(s.axis[5], 5.0, 1e-12);
  EXPECT_NEAR(s.axis[n - 5], -5.0, 1e-12);
}

TEST(Fourier, RotationHistoryPeaksAtFive) {
  const double omega = 2.0 * std::numbers::pi * 5.0;
  const int steps = 1024;
  const double h = 1.0 / steps;
  Eigen::MatrixXd analytic(2, steps + 1);
  for (int l = 0; l <= steps; ++l) analytic.col(l) << std::cos(omega * l * h), std::sin(omega * l * h);
  const Eigen::MatrixXcd oracle = (dense_dft(steps + 1) * analytic.transpose().cast<cd>()).transpose();
  EXPECT_EQ(dominant_nonzero_bin(oracle.cwiseAbs2().colwise().sum().transpose()), 5);

  OdeProblem p;
  p.M = SparseMatrix(2, 2);
  p.M.insert(0, 1) = -omega;
  p.M.insert(1, 0) = omega;
  p.c = Eigen::VectorXd::Zero(2);
  p.x0 = Eigen::Vector2d(1.0, 0.0);
  p.t_max = 1.0;
  p.steps = steps;
  const PowerSpectrum s = power_spectrum(normalize_history(euler_step_history(p)));
  EXPECT_EQ(dominant_nonzero_bin(s.power), 5);
}

TEST(Fourier, DampedOscillationWidthGrowsWithDecay) {
  const double b = 2.0 * std::numbers::pi * 8.0;
  const Eigen::Index n = 4096;
  const double h = 4.0 / static_cast<double>(n);
  auto spread = [&](double a) {
    Eigen::VectorXd x(n);
    for (Eigen::Index t = 0; t < n; ++t) x[t] = std::exp(a * t * h) * std::cos(b * t * h);
    const Spectrum s = fourier_time(x, h);
    const Eigen::VectorXd p = s.power();
    const Eigen::Index peak = dominant_nonzero_bin(p);
    EXPECT_NEAR(std::abs(s.axis[peak]), 8.0, 0.25);
    double mass = 0.0, second = 0.0;
    for (Eigen::Index k = 1; k < n / 2; ++k) {
      mass += p[k];
      second += p[k] * (s.axis[k] - 8.0) * (s.axis[k] - 8.0);
    }
    return second / mass;
  };
  const double narrow = spread(-0.5);
  const double wide = spread(-4.0);
  EXPECT_GT(wide, narrow);
}

TEST(Fourier, PointMassStaticHistoryIsDelta) {
  HistoryMatrix x;
  x.columns = Eigen::MatrixXd::Zero(4, 50);
  x.columns.row(2).setOnes();
  x.h = 0.01;
  const PowerSpectrum p = power_spectrum(normalize_history(x));
  EXPECT_NEAR(p.power[0], 1.0, 1e-12);
  EXPECT_LE(p.power.tail(49).maxCoeff(), 1e-24);
}

TEST(Haar, ConstantMapsToZerothCoefficient) {
  std::vector<double> v(8, 1.5);
  haar_forward(v);
  EXPECT_NEAR(v[0], 1.5 * std::sqrt(8.0), 1e-14);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_NEAR(v[i], 0.0, 1e-15);
}

TEST(Haar, ImpulseLengthFour) {
  std::vector<double> v = {1.0, 0.0, 0.0, 0.0};
  haar_forward(v);
  EXPECT_NEAR(v[0], 0.5, 1e-15);
  EXPECT_NEAR(v[1], 0.5, 1e-15);
  EXPECT_NEAR(v[2], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v[3], 0.0, 1e-15);
}

TEST(Haar, MatrixMatchesRecursiveConstruction) {
  for (const Eigen::Index n : {2, 4, 8, 64, 256}) {
    const Eigen::MatrixXd h = haar_matrix(n);
    EXPECT_LE((h - recursive_haar(n)).cwiseAbs().maxCoeff(), 1e-14) << n;
  }
}

TEST(Haar, ForwardAgreesWithMatrixAndIsUnitary) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (const Eigen::Index n : {2, 16, 1024}) {
    const Eigen::MatrixXd h = haar_matrix(n);
    EXPECT_LE((h.transpose() * h - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(n, [&] { return g(rng); });
    Eigen::VectorXd y = x;
    haar_forward(std::span<double>(y.data(), static_cast<std::size_t>(n)));
    EXPECT_LE((y - h * x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(y.squaredNorm(), x.squaredNorm(), 1e-10 * x.squaredNorm());
    haar_inverse(std::span<double>(y.data(), static_cast<std::size_t>(n)));
    EXPECT_LE((y - x).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Haar, NonPowerOfTwoNeedsWindow) {
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(1028);
  EXPECT_THROW(haar_time(x, 1.0, WindowPolicy{WindowPolicy::Kind::full}), ValidationError);
  const Spectrum tail = haar_time(x, 1.0);
  EXPECT_EQ(tail.window.first, 0);
  EXPECT_EQ(tail.window.kept, 1024);
  const Spectrum head = haar_time(x, 1.0, WindowPolicy::parse("trunc-head"));
  EXPECT_EQ(head.window.first, 4);
  const Spectrum pad = haar_time(x, 1.0, WindowPolicy::parse("zero-pad"));
  EXPECT_EQ(pad.window.output_length, 2048);
  EXPECT_NEAR(pad.total_power(), 1028.0, 1e-9);
  EXPECT_THROW(WindowPolicy::parse("hann"), ValidationError);
}

TEST(Haar, AxisIsSupportDuration) {
  const Spectrum s = haar_time(Eigen::VectorXd(Eigen::VectorXd::Ones(8)), 0.5);
  EXPECT_DOUBLE_EQ(s.axis[0], 4.0);
  EXPECT_DOUBLE_EQ(s.axis[1], 4.0);
  EXPECT_DOUBLE_EQ(s.axis[2], 2.0);
  EXPECT_DOUBLE_EQ(s.axis[7], 1.0);
}

TEST(TransformProperty, ParsevalOnRandomSeries) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (Eigen::Index n = 2; n <= 1024; n *= 2) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(3, n, [&] { return g(rng); });
    const double e = x.squaredNorm();
    EXPECT_NEAR(fourier_time(x, 1.0).total_power(), e, 1e-10 * e);
    EXPECT_NEAR(haar_time(x, 1.0).total_power(), e, 1e-10 * e);
    const Eigen::MatrixXd odd = Eigen::MatrixXd::NullaryExpr(2, n + 1, [&] { return g(rng); });
    EXPECT_NEAR(fourier_time(odd, 1.0).total_power(), odd.squaredNorm(), 1e-10 * odd.squaredNorm());
  }
}

TEST(TransformProperty, RightVectorTransformCommutesWithStateProjection) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(10, 64, [&] { return g(rng); });
  const SVDResult s = svd_history(x, 10);
  for (const TransformKind kind : {TransformKind::fourier, TransformKind::haar}) {
    const WindowPolicy w = kind == TransformKind::fourier ? WindowPolicy::fourier_default() : WindowPolicy::haar_default();
    const Spectrum direct = kind == TransformKind::fourier ? fourier_time(x, 1.0, w) : haar_time(x, 1.0, w);
    const Spectrum vectors = transform_right_vectors(s, kind, 1.0, w);
    const Eigen::MatrixXcd projected = s.left.transpose().cast<cd>() * direct.coefficients;
    const Eigen::MatrixXcd scaled = s.sigma.cast<cd>().asDiagonal() * vectors.coefficients;
    EXPECT_LE((projected - scaled).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(TransformProperty, ConstantRightVector) {
  SVDResult s;
  s.sigma = Eigen::VectorXd::Ones(1);
  s.left = Eigen::MatrixXd::Ones(1, 1);
  s.right = Eigen::MatrixXd::Constant(16, 1, 0.25);
  for (const TransformKind kind : {TransformKind::fourier, TransformKind::haar}) {
    const Spectrum t = transform_right_vectors(s, kind, 1.0, WindowPolicy::haar_default());
    EXPECT_NEAR(std::abs(t.coefficients(0, 0)), 1.0, 1e-14);
    EXPECT_LE(t.coefficients.row(0).tail(15).cwiseAbs().maxCoeff(), 1e-14);
  }
}
