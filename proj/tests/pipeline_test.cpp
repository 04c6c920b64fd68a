// Copyright 2026 The QERC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qerc/pipeline.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>
#include <set>

using namespace qerc;
using namespace qerc::pipeline;

namespace {

// Four noisy class prototypes in 24 dimensions.
Matrices synthetic(int per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd protos(4, 24);
    for (Eigen::Index i = 0; i < protos.size(); ++i) protos.data()[i] = 3 * g(rng);
    auto make = [&](int n) {
        Split s;
        s.images.resize(4 * n, 24);
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < n; ++i) {
                for (int p = 0; p < 24; ++p) s.images(k * n + i, p) = protos(k, p) + g(rng);
                s.labels.push_back(k);
            }
        return s;
    };
    return {make(per_class), make(per_class / 2)};
}

}  // namespace

TEST(ReservoirFeatures, RowsAreDistributions) {
    const auto m = synthetic(10, 1);
    const auto pca = fit_shared_pca(m, 6);
    const auto a = encoder_angles(pca, m, features::ComponentSelection::identity(6));
    const auto seq = quantum::build_reservoir({3, quantum::Variant::clifford_t, 4});
    const auto exact = reservoir_features(a.train, m.train, seq, 0, 0, 1);
    const auto sampled = reservoir_features(a.train, m.train, seq, 64, 9, 2);
    ASSERT_EQ(exact.cols(), 8);
    for (Eigen::Index r = 0; r < exact.rows(); ++r) {
        EXPECT_NEAR(exact.row(r).sum(), 1.0, 1e-12);
        EXPECT_NEAR(sampled.row(r).sum(), 1.0, 1e-12);
        for (Eigen::Index k = 0; k < 8; ++k) {
            const double counts = sampled(r, k) * 64;
            EXPECT_NEAR(counts, std::round(counts), 1e-9);
        }
    }
    EXPECT_EQ(sampled, reservoir_features(a.train, m.train, seq, 64, 9, 1));
    EXPECT_NE(sampled, reservoir_features(a.train, m.train, seq, 64, 10, 1));
}

TEST(ReservoirFeatures, ExactModeMatchesDirectSimulation) {
    const auto m = synthetic(6, 2);
    const auto pca = fit_shared_pca(m, 4);
    const auto a = encoder_angles(pca, m, features::ComponentSelection::identity(4));
    const auto seq = quantum::build_reservoir({2, quantum::Variant::clifford_t, 1});
    const auto f = reservoir_features(a.test, m.test, seq, 0, 0, 1);
    for (Eigen::Index r = 0; r < a.test.rows(); ++r) {
        std::vector<double> angles;
        for (Eigen::Index c = 0; c < a.test.cols(); ++c) angles.push_back(a.test(r, c));
        const auto p = quantum::measure_probs(quantum::apply(seq, quantum::encode(angles, 2)));
        for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(f(r, static_cast<Eigen::Index>(k)), p[k], 1e-14);
    }
}

TEST(EncoderAngles, TrainRangeMapsOntoZeroToPi) {
    const auto m = synthetic(8, 3);
    const auto pca = fit_shared_pca(m, 4);
    const auto a = encoder_angles(pca, m, features::ComponentSelection::parse("2-4,1"));
    for (Eigen::Index c = 0; c < 4; ++c) {
        EXPECT_NEAR(a.train.col(c).minCoeff(), 0.0, 1e-12);
        EXPECT_NEAR(a.train.col(c).maxCoeff(), std::numbers::pi, 1e-12);
        EXPECT_GE(a.test.col(c).minCoeff(), 0.0);
        EXPECT_LE(a.test.col(c).maxCoeff(), std::numbers::pi);
    }
    const auto identity = encoder_angles(pca, m, features::ComponentSelection::identity(4));
    EXPECT_EQ(a.train.col(3), identity.train.col(0));
    EXPECT_EQ(a.train.col(0), identity.train.col(1));
}

TEST(RunQerc, ComposesTheStages) {
    const auto m = synthetic(12, 4);
    const auto pca = fit_shared_pca(m, 6);
    QercConfig c;
    c.reservoir = {3, quantum::Variant::clifford_t, 5};
    c.shots = 0;
    c.train.epochs = 40;
    c.threads = 1;
    const auto r = run_qerc(pca, m, c);

    const auto a = encoder_angles(pca, m, features::ComponentSelection::identity(6));
    const auto seq = quantum::build_reservoir(c.reservoir);
    const auto ftrain = reservoir_features(a.train, m.train, seq, 0, 0, 1);
    const auto ftest = reservoir_features(a.test, m.test, seq, 0, 0, 1);
    const auto [model, tm] = classify::train(classify::LinearModel::zeros(8, true), ftrain, m.train.labels, c.train);
    const auto em = classify::evaluate(model, ftest, m.test.labels);
    EXPECT_EQ(r.train.accuracy, tm.accuracy);
    EXPECT_EQ(r.test.accuracy, em.accuracy);
    EXPECT_EQ(r.test.predictions, em.predictions);
    EXPECT_EQ(r.test.updates, 0);
    EXPECT_EQ(r.train.updates, 40 * 2);
}

TEST(RunQerc, DeterministicAndValidated) {
    const auto m = synthetic(8, 5);
    const auto pca = fit_shared_pca(m, 6);
    QercConfig c;
    c.reservoir = {2, quantum::Variant::clifford_t, 0};
    c.train.epochs = 10;
    c.threads = 1;
    const auto a = run_qerc(pca, m, c), b = run_qerc(pca, m, c);
    EXPECT_EQ(a.test.predictions, b.test.predictions);
    EXPECT_EQ(a.train.loss, b.train.loss);
    c.selection = features::ComponentSelection::identity(3);
    EXPECT_THROW(run_qerc(pca, m, c), InvalidArgument);
    c.selection.reset();
    c.reservoir.n_qubits = 10;
    EXPECT_THROW(run_qerc(pca, m, c), InvalidArgument);
}

TEST(Baselines, SeparablePrototypesAreLearned) {
    const auto m = synthetic(20, 6);
    classify::TrainConfig tc;
    tc.epochs = 100;
    tc.learning_rate = 0.1;
    EXPECT_GE(run_pixel_baseline(m, tc).test.accuracy, 0.9);
    const auto pca = fit_shared_pca(m, 4);
    EXPECT_GE(run_pca_baseline(pca, m, 4, tc).test.accuracy, 0.9);
}

TEST(Repetition, SeedsAdvanceTogether) {
    QercConfig c;
    c.reservoir.seed = 10;
    c.shot_seed = 20;
    c.train.seed = 30;
    std::set<std::uint64_t> reservoirs;
    for (int r = 0; r < 3; ++r) {
        const auto q = repetition(c, r);
        EXPECT_EQ(q.reservoir.seed, 10u + static_cast<unsigned>(r));
        EXPECT_EQ(q.shot_seed, 20u + static_cast<unsigned>(r));
        EXPECT_EQ(q.train.seed, 30u + static_cast<unsigned>(r));
        reservoirs.insert(q.reservoir.seed);
    }
    EXPECT_EQ(reservoirs.size(), 3u);
}
