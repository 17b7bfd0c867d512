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
#include <bit>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "qdea/error.hpp"
#include "qdea/lde.hpp"
#include "qdea/models.hpp"
#include "qdea/sampling.hpp"
#include "qdea/scenario.hpp"

using namespace qdea;

namespace {

RateMatrix dense_generator(const Eigen::MatrixXd& q) {
  return RateMatrix::from_matrix(q.sparseView());
}

Eigen::MatrixXd two_state(double a, double b) {
  Eigen::MatrixXd q(2, 2);
  q << -a, b, a, -b;
  return q;
}

Network path_network(int n, double rate) {
  std::vector<Edge> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, rate});
  return Network(n, 2, edges);
}

ModelSpec sis_spec(double recovery) {
  ModelSpec spec;
  spec.kind = ModelKind::sis;
  spec.recovery_rate = recovery;
  return spec;
}

// Law at time t from the matrix exponential of a small dense generator.
Eigen::VectorXd exact_law(const Eigen::MatrixXd& q, const Eigen::VectorXd& x0, double t) {
  return (q * t).exp() * x0;
}

const NetworkDocument& seven_node() {
  static const NetworkDocument doc = parse_network(bundled_data_dir() / "networks" / "seven_node_sis.json");
  return doc;
}

}  // namespace

TEST(Transitions, NetworkMatchesMatrix) {
  const auto& doc = seven_node();
  const RateMatrix q = build_generator(doc.network, doc.model);
  const MatrixTransitions from_matrix(q);
  const NetworkTransitions from_network(doc.network, doc.model);
  ASSERT_EQ(from_matrix.dimension(), from_network.dimension());
  std::vector<Jump> a, b;
  auto by_target = [](const Jump& x, const Jump& y) { return x.target < y.target; };
  for (StateIndex s = 0; s < from_matrix.dimension(); ++s) {
    from_matrix.outgoing(s, a);
    from_network.outgoing(s, b);
    std::sort(a.begin(), a.end(), by_target);
    std::sort(b.begin(), b.end(), by_target);
    ASSERT_EQ(a.size(), b.size()) << "state " << s;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].target, b[i].target);
      EXPECT_NEAR(a[i].rate, b[i].rate, 1e-14);
      EXPECT_GT(a[i].rate, 0.0);
    }
  }
}

TEST(Gillespie, SingleNodeRecoveryTime) {
  // One infected node, no edges: the single event is recovery at rate r.
  const double r = 0.33;
  const NetworkTransitions model(Network(1, 2, {}), sis_spec(r));
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    PhiloxStream rng(11, static_cast<std::uint64_t>(i));
    const Trajectory tr = gillespie_trajectory(model, 1, 1e9, rng);
    ASSERT_EQ(tr.events.size(), 1u);
    EXPECT_EQ(tr.final_state(), 0u);
    const double tau = tr.events[0].first;
    sum += tau;
    sq += tau * tau;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, 1.0 / r, 3 * se);
}

TEST(Gillespie, ZeroGeneratorNeverMoves) {
  const MatrixTransitions model(dense_generator(Eigen::MatrixXd::Zero(4, 4)));
  for (StateIndex s = 0; s < 4; ++s) {
    PhiloxStream rng(3, s);
    Trajectory tr;
    EXPECT_EQ(gillespie_sample(model, s, 100.0, rng, &tr), s);
    EXPECT_TRUE(tr.events.empty());
  }
}

TEST(Gillespie, TwoStateLawAtFixedTime) {
  const double a = 0.7, b = 0.2, t = 4.0;
  const MatrixTransitions model(dense_generator(two_state(a, b)));
  const double p1 = a / (a + b) * (1.0 - std::exp(-(a + b) * t));
  const auto report = estimate_observable_mc(model, InitialSampler::point(0), ObservableSpec::indicator(1), t,
                                             100000, 77);
  EXPECT_NEAR(report.estimate, p1, 3.5 * report.standard_error);
  EXPECT_NEAR(report.standard_error, std::sqrt(p1 * (1 - p1) / 100000.0), 1e-4);
}

TEST(Gillespie, TrajectoriesFlipOneNodeAtATime) {
  const auto& doc = seven_node();
  const NetworkTransitions model(doc.network, doc.model);
  const auto init = InitialSampler::product(ProductInitial::binary_uniform(7, 0.35));
  for (std::uint64_t i = 0; i < 200; ++i) {
    PhiloxStream rng(5, i);
    const StateIndex start = init.sample(rng);
    const Trajectory tr = gillespie_trajectory(model, start, 3.0, rng);
    StateIndex prev = tr.initial;
    double prev_t = 0.0;
    for (const auto& [time, state] : tr.events) {
      EXPECT_EQ(std::popcount(prev ^ state), 1);
      EXPECT_GT(time, prev_t);
      EXPECT_LE(time, 3.0);
      prev = state;
      prev_t = time;
    }
  }
}

TEST(Estimator, ConstantObservableHasNoSpread) {
  const auto& doc = seven_node();
  const NetworkTransitions model(doc.network, doc.model);
  const auto init = InitialSampler::product(ProductInitial::binary_uniform(7, 0.35));
  const auto r = estimate_observable_mc(model, init, ObservableSpec::constant(1.0), 1.0, 500, 1);
  EXPECT_DOUBLE_EQ(r.estimate, 1.0);
  EXPECT_DOUBLE_EQ(r.standard_error, 0.0);
  EXPECT_EQ(r.samples, 500u);
  EXPECT_EQ(r.estimator, "mc:" + ObservableSpec::constant(1.0).name);
}

TEST(Estimator, TwoNodeInfectedCountMatchesEuler) {
  const Network net = path_network(2, 1.2);
  const ModelSpec spec = sis_spec(0.33);
  const RateMatrix q = build_generator(net, spec);
  const ProbVector x0 = make_initial_distribution(ProductInitial::binary_uniform(2, 0.35));
  const HistoryMatrix hist = euler_step_history(OdeProblem::markov(q, x0, 1.0, 100000));
  const auto count = ObservableSpec::popcount(2);
  const double exact = exact_observable(hist, count, hist.steps());
  const auto r = estimate_observable_mc(NetworkTransitions(net, spec),
                                        InitialSampler::product(ProductInitial::binary_uniform(2, 0.35)), count, 1.0,
                                        100000, 2024);
  EXPECT_NEAR(r.estimate, exact, 3.5 * r.standard_error);
}

TEST(Estimator, UnbiasedAcrossIndependentRuns) {
  const Eigen::MatrixXd q = two_state(0.5, 0.25);
  const MatrixTransitions model(dense_generator(q));
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  const double exact = exact_law(q, x0, 1.5)(1);
  const int runs = 200;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < runs; ++i) {
    const auto r =
        estimate_observable_mc(model, InitialSampler::point(0), ObservableSpec::indicator(1), 1.5, 500, 1000 + i);
    sum += r.estimate;
    sq += r.estimate * r.estimate;
  }
  const double mean = sum / runs;
  const double se = std::sqrt((sq / runs - mean * mean) / runs);
  EXPECT_NEAR(mean, exact, 3.5 * se);
}

TEST(Estimator, DeterministicAcrossThreadCounts) {
  const auto& doc = seven_node();
  const NetworkTransitions model(doc.network, doc.model);
  const auto init = InitialSampler::product(ProductInitial::binary_uniform(7, 0.35));
  const auto obs = ObservableSpec::popcount(7);
  SamplingOptions one, many;
  many.threads = 4;
  const auto a = estimate_observable_mc(model, init, obs, 1.0, 3000, 9, one);
  const auto b = estimate_observable_mc(model, init, obs, 1.0, 3000, 9, many);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.standard_error, b.standard_error);
  const auto g1 = collision_gram_estimate(model, init, 10, 20, 2000, 0.05, 4, one);
  const auto g2 = collision_gram_estimate(model, init, 10, 20, 2000, 0.05, 4, many);
  EXPECT_EQ(g1.estimate, g2.estimate);
}

TEST(Estimator, ConvergenceSlopeNearMinusHalf) {
  const Network net = path_network(2, 1.0);
  const ModelSpec spec = sis_spec(0.5);
  const Eigen::MatrixXd q = build_generator(net, spec).dense();
  const Eigen::VectorXd x0 = make_initial_distribution(ProductInitial::binary_uniform(2, 0.5)).values();
  const Eigen::VectorXd law = exact_law(q, x0, 1.0);
  double exact = 0.0;
  for (Eigen::Index k = 0; k < law.size(); ++k) exact += law(k) * std::popcount(static_cast<unsigned>(k));
  const auto points = convergence_study(NetworkTransitions(net, spec),
                                        InitialSampler::product(ProductInitial::binary_uniform(2, 0.5)),
                                        ObservableSpec::popcount(2), 1.0, exact, {100, 1000, 10000}, 30, 17);
  ASSERT_EQ(points.size(), 3u);
  const double slope = loglog_slope(points);
  EXPECT_GE(slope, -0.65);
  EXPECT_LE(slope, -0.35);
}

TEST(Estimator, LoglogSlopeOfExactPowerLaw) {
  std::vector<ConvergencePoint> pts;
  for (std::uint64_t s : {10u, 100u, 1000u}) pts.push_back({s, 3.0 / std::sqrt(static_cast<double>(s))});
  EXPECT_NEAR(loglog_slope(pts), -0.5, 1e-12);
  EXPECT_THROW(loglog_slope({pts[0]}), ValidationError);
}

TEST(FixedStep, LawEqualsEulerColumn) {
  const Network net = path_network(3, 1.0);
  const ModelSpec spec = sis_spec(0.4);
  const RateMatrix q = build_generator(net, spec);
  const double h = 0.1;
  const int steps = 10;
  const ProbVector x0 = make_initial_distribution(PointMassInitial{7, 8});
  const HistoryMatrix hist = euler_step_history(OdeProblem::markov(q, x0, h * steps, steps));
  const NetworkTransitions model(net, spec);
  const int n = 200000;
  std::vector<double> counts(8, 0.0);
  for (int i = 0; i < n; ++i) {
    PhiloxStream rng(8, static_cast<std::uint64_t>(i));
    counts[fixed_step_sample(model, 7, h, steps, rng)] += 1.0;
  }
  for (int k = 0; k < 8; ++k) {
    const double p = hist.columns(k, steps);
    const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
    EXPECT_NEAR(counts[k] / n, p, 4 * se + 1e-12) << "state " << k;
  }
}

TEST(FixedStep, RejectsUnstableStep) {
  const MatrixTransitions model(dense_generator(two_state(5.0, 1.0)));
  PhiloxStream rng(1, 1);
  EXPECT_THROW(fixed_step_sample(model, 0, 0.5, 4, rng), NumericalError);
}

TEST(ExactObservable, OverlapIdentityOnSevenNodes) {
  const auto& doc = seven_node();
  const RateMatrix q = build_generator(doc.network, doc.model);
  const ProbVector x0 = make_initial_distribution(ProductInitial::binary_uniform(7, 0.35));
  const HistoryMatrix hist = euler_step_history(OdeProblem::markov(q, x0, 2.0, 400));
  const auto obs = ObservableSpec::popcount(7);
  for (Eigen::Index l : {Eigen::Index{0}, Eigen::Index{57}, Eigen::Index{400}}) {
    const auto v = exact_observable_detail(hist, obs, l);
    double direct = 0.0;
    for (Eigen::Index k = 0; k < 128; ++k) direct += hist.columns(k, l) * std::popcount(static_cast<unsigned>(k));
    EXPECT_NEAR(v.direct, direct, 1e-12);
    EXPECT_NEAR(v.overlap_form, v.direct, 1e-10 * std::max(1.0, std::abs(v.direct)));
    EXPECT_NEAR(v.z_step, hist.columns.col(l).squaredNorm(), 1e-14);
    EXPECT_NEAR(v.z_observable, obs.norm_sq(128), 1e-9);
  }
  const auto one = ObservableSpec::constant(1.0);
  for (Eigen::Index l = 0; l <= 400; l += 40) EXPECT_NEAR(exact_observable(hist, one, l), 1.0, 1e-12);
}

TEST(ExactObservable, RandomOverlapChecks) {
  std::mt19937_64 gen(314);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 2 + static_cast<int>(gen() % 30);
    HistoryMatrix hist;
    hist.h = 0.1;
    hist.columns = Eigen::MatrixXd::NullaryExpr(dim, 3, [&] { return u(gen); });
    std::vector<double> values(dim);
    for (auto& v : values) v = u(gen) * 10 - 5;
    const auto obs = ObservableSpec::from_values(values);
    const auto d = exact_observable_detail(hist, obs, 1);
    double direct = 0.0;
    for (int k = 0; k < dim; ++k) direct += hist.columns(k, 1) * values[k];
    EXPECT_NEAR(d.direct, direct, 1e-12 * std::max(1.0, std::abs(direct)));
    EXPECT_NEAR(d.overlap_form, direct, 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST(ExactObservable, NormalizedObservableRange) {
  const auto obs = ObservableSpec::popcount(7).normalized(0.0, 7.0);
  EXPECT_DOUBLE_EQ(obs.evaluate(0), 0.0);
  EXPECT_DOUBLE_EQ(obs.evaluate(127), 1.0);
  EXPECT_THROW(ObservableSpec::popcount(7).normalized(1.0, 1.0), ValidationError);
}

TEST(InitialSampling, PointMassIndicatorIsOne) {
  const MatrixTransitions model(dense_generator(Eigen::MatrixXd::Zero(8, 8)));
  const auto r = estimate_observable_mc(model, InitialSampler::point(5), ObservableSpec::indicator(5), 2.0, 1000, 3);
  EXPECT_DOUBLE_EQ(r.estimate, 1.0);
  EXPECT_DOUBLE_EQ(r.standard_error, 0.0);
}

TEST(InitialSampling, TableAndProductAgree) {
  const auto spec = ProductInitial::binary_uniform(3, 0.3);
  const auto table = InitialSampler::from_distribution(make_initial_distribution(spec));
  const auto product = InitialSampler::product(spec);
  const ProbVector p = make_initial_distribution(spec);
  const int n = 100000;
  std::vector<double> ct(8, 0.0), cp(8, 0.0);
  for (int i = 0; i < n; ++i) {
    PhiloxStream a(1, static_cast<std::uint64_t>(i)), b(2, static_cast<std::uint64_t>(i));
    ct[table.sample(a)] += 1.0;
    cp[product.sample(b)] += 1.0;
  }
  for (int k = 0; k < 8; ++k) {
    const double se = std::sqrt(p[k] * (1 - p[k]) / n);
    EXPECT_NEAR(ct[k] / n, p[k], 4 * se);
    EXPECT_NEAR(cp[k] / n, p[k], 4 * se);
  }
}

TEST(Collision, FrozenPointMassAlwaysCollides) {
  const MatrixTransitions model(dense_generator(Eigen::MatrixXd::Zero(4, 4)));
  const auto r = collision_gram_estimate(model, InitialSampler::point(2), 0, 5, 300, 0.1, 1);
  EXPECT_DOUBLE_EQ(r.estimate, 1.0);
  ASSERT_TRUE(r.predicted_pairs_to_collision.has_value());
  EXPECT_DOUBLE_EQ(*r.predicted_pairs_to_collision, 1.0);
  EXPECT_EQ(pairs_to_first_collision(model, InitialSampler::point(2), 0, 0, 0.1, 1, 10), 1u);
}

TEST(Collision, ThreeNodeGramMatchesEuler) {
  const Network net = path_network(3, 1.0);
  const ModelSpec spec = sis_spec(0.33);
  const RateMatrix q = build_generator(net, spec);
  const ProbVector x0 = make_initial_distribution(ProductInitial::binary_uniform(3, 0.5));
  const double h = 0.01;
  const HistoryMatrix hist = euler_step_history(OdeProblem::markov(q, x0, 1.0, 100));
  const Eigen::MatrixXd law = (q.dense() * 0.4).exp() * x0.values();
  const Eigen::MatrixXd law2 = (q.dense() * 1.0).exp() * x0.values();
  const double exact = law.col(0).dot(law2.col(0));
  const auto r = collision_gram_estimate(NetworkTransitions(net, spec),
                                         InitialSampler::product(ProductInitial::binary_uniform(3, 0.5)), 40, 100,
                                         100000, h, 21);
  EXPECT_NEAR(r.estimate, exact, 3.5 * r.standard_error);
  EXPECT_NEAR(hist.columns.col(40).dot(hist.columns.col(100)), exact, 5e-3);
  EXPECT_DOUBLE_EQ(r.time, 0.4);
  EXPECT_DOUBLE_EQ(r.second_time, 1.0);
}

TEST(Collision, UniformPairsToFirstCollision) {
  const int n = 6;
  const StateIndex dim = StateIndex{1} << n;
  const MatrixTransitions model(dense_generator(Eigen::MatrixXd::Zero(dim, dim)));
  const auto init = InitialSampler::from_distribution(make_initial_distribution(UniformInitial{dim}));
  const int runs = 400;
  double sum = 0.0;
  for (int i = 0; i < runs; ++i) {
    sum += static_cast<double>(pairs_to_first_collision(model, init, 0, 0, 0.1, 500 + i, 100000));
  }
  const double mean = sum / runs;
  // Geometric with p = 2^-n: mean 2^n, standard error about 2^n / sqrt(runs).
  EXPECT_NEAR(mean, static_cast<double>(dim), 4.0 * dim / std::sqrt(runs));
}

TEST(Collision, RejectsBadArguments) {
  const MatrixTransitions model(dense_generator(Eigen::MatrixXd::Zero(2, 2)));
  EXPECT_THROW(collision_gram_estimate(model, InitialSampler::point(0), 0, 1, 0, 0.1, 1), ValidationError);
  EXPECT_THROW(collision_gram_estimate(model, InitialSampler::point(0), -1, 1, 5, 0.1, 1), ValidationError);
  EXPECT_THROW(collision_gram_estimate(model, InitialSampler::point(0), 0, 1, 5, 0.0, 1), ValidationError);
}
