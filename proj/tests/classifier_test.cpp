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

#include "qerc/classifier.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace qerc;
using namespace qerc::classify;

namespace {

// Four separated clusters in the plane, one per class.
std::pair<MatrixXd, std::vector<int>> clusters(int per_class, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.3);
    const double cx[4] = {3, -3, -3, 3}, cy[4] = {3, 3, -3, -3};
    MatrixXd x(4 * per_class, 2);
    std::vector<int> y;
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < per_class; ++i) {
            x(c * per_class + i, 0) = cx[c] + g(rng);
            x(c * per_class + i, 1) = cy[c] + g(rng);
            y.push_back(c);
        }
    return {x, y};
}

}  // namespace

TEST(Normalize, Examples) {
    EXPECT_EQ(normalize_input(VectorXd::Unit(4, 0), true), VectorXd::Unit(4, 0));
    const VectorXd u = normalize_input(VectorXd::Constant(4, 0.25), true);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(u(i), 0.5, 1e-15);
    const VectorXd v{{3.0, 4.0}};
    EXPECT_EQ(normalize_input(v, false), v);
    EXPECT_THROW(normalize_input(VectorXd::Zero(3), true), NumericalError);
}

TEST(Forward, SoftmaxProperties) {
    LinearModel m = LinearModel::zeros(3);
    const VectorXd x{{0.2, -1.0, 0.5}};
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(forward(m, x)(i), 0.25);
    m.weights.setRandom();
    m.bias.setRandom();
    const VectorXd p = forward(m, x);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    m.bias.array() += 123.0;
    EXPECT_LT((forward(m, x) - p).cwiseAbs().maxCoeff(), 1e-12);
    const VectorXd sharp = softmax(VectorXd{{10.0, 0.0, 0.0, 0.0}});
    EXPECT_NEAR(sharp(0), 1.0 / (1.0 + 3.0 * std::exp(-10.0)), 1e-15);
    EXPECT_THROW(forward(m, VectorXd::Zero(2)), InvalidArgument);
}

TEST(Loss, KnownValues) {
    LinearModel m = LinearModel::zeros(2);
    const MatrixXd x = MatrixXd::Ones(1, 2);
    const std::vector<int> y{2};
    EXPECT_NEAR(loss_and_grad(m, x, y).first, std::log(4.0), 1e-15);
    m.bias(2) = 60.0;
    EXPECT_LT(loss_and_grad(m, x, y).first, 1e-20);
    EXPECT_THROW(loss_and_grad(m, x, std::vector<int>{4}), InvalidArgument);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 0.5);
    std::uniform_int_distribution<int> label(0, 3);
    for (int draw = 0; draw < 20; ++draw) {
        const int dim = 3 + draw % 6, rows = 1 + draw % 5;
        LinearModel m = LinearModel::zeros(dim);
        for (Eigen::Index i = 0; i < m.weights.size(); ++i) m.weights.data()[i] = g(rng);
        for (int i = 0; i < 4; ++i) m.bias(i) = g(rng);
        MatrixXd x(rows, dim);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
        std::vector<int> y(static_cast<std::size_t>(rows));
        for (auto &v : y) v = label(rng);
        const Gradients an = loss_and_grad(m, x, y).second;
        VectorXd a(m.weights.size() + 4), n(m.weights.size() + 4);
        const double h = 1e-5;
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            double &p = i < m.weights.size() ? m.weights.data()[i] : m.bias(i - m.weights.size());
            a(i) = i < m.weights.size() ? an.weights.data()[i] : an.bias(i - m.weights.size());
            const double keep = p;
            p = keep + h;
            const double up = loss_and_grad(m, x, y).first;
            p = keep - h;
            const double down = loss_and_grad(m, x, y).first;
            p = keep;
            n(i) = (up - down) / (2 * h);
        }
        EXPECT_LE((a - n).norm() / std::max(a.norm(), n.norm()), 1e-5) << draw;
    }
}

TEST(AdaGrad, FirstStepAndZeroGradient) {
    LinearModel m = LinearModel::zeros(2);
    TrainConfig c;
    AdaGradState acc = AdaGradState::for_model(m);
    Gradients g{MatrixXd::Zero(4, 2), VectorXd::Zero(4)};
    adagrad_step(m, g, acc, c);
    EXPECT_EQ(m.weights, MatrixXd::Zero(4, 2));
    g.weights(1, 0) = 3.0;
    g.bias(3) = -0.02;
    adagrad_step(m, g, acc, c);
    EXPECT_NEAR(m.weights(1, 0), -c.learning_rate, 1e-9);
    EXPECT_NEAR(m.bias(3), c.learning_rate, 1e-6);
    AdaGradState wrong{MatrixXd::Zero(4, 3), VectorXd::Zero(4)};
    EXPECT_THROW(adagrad_step(m, g, wrong, c), InvalidArgument);
}

TEST(AdaGrad, ScriptedScalarSteps) {
    LinearModel m = LinearModel::zeros(1);
    m.weights(0, 0) = 1.0;
    TrainConfig c;
    c.learning_rate = 0.1;
    c.adagrad_epsilon = 1e-3;
    AdaGradState acc = AdaGradState::for_model(m);
    Gradients g{MatrixXd::Zero(4, 1), VectorXd::Zero(4)};
    g.weights(0, 0) = 0.5;
    adagrad_step(m, g, acc, c);
    g.weights(0, 0) = -0.2;
    adagrad_step(m, g, acc, c);
    // acc: 0.25 then 0.29.
    const double expected = 1.0 - 0.1 * 0.5 / (0.5 + 1e-3) + 0.1 * 0.2 / (std::sqrt(0.29) + 1e-3);
    EXPECT_NEAR(m.weights(0, 0), expected, 1e-15);
    EXPECT_NEAR(acc.weights(0, 0), 0.29, 1e-15);
}

TEST(Train, SeparableToySet) {
    const auto [x, y] = clusters(50, 1);
    TrainConfig c;
    c.epochs = 200;
    c.l2_normalize_inputs = false;
    const auto [model, metrics] = train(LinearModel::zeros(2), x, y, c);
    EXPECT_EQ(metrics.accuracy, 1.0);
    EXPECT_EQ(evaluate(model, x, y).accuracy, 1.0);
    EXPECT_EQ(metrics.epochs.size(), 200u);
}

TEST(Train, UpdateAccountingAndErrors) {
    const auto [x, y] = clusters(25, 2);
    TrainConfig c;
    c.epochs = 1;
    c.batch_size = 32;
    EXPECT_EQ(train(LinearModel::zeros(2), x, y, c).second.updates, 4);  // ceil(100 / 32)
    c.epochs = 0;
    EXPECT_THROW(train(LinearModel::zeros(2), x, y, c), InvalidArgument);
    c.epochs = 1;
    EXPECT_THROW(train(LinearModel::zeros(3), x, y, c), InvalidArgument);
    EXPECT_THROW(train(LinearModel::zeros(2), MatrixXd(0, 2), std::vector<int>{}, c), InvalidArgument);
}

TEST(Train, Deterministic) {
    const auto [x, y] = clusters(20, 3);
    TrainConfig c;
    c.epochs = 20;
    c.seed = 5;
    const auto a = train(LinearModel::zeros(2), x, y, c);
    const auto b = train(LinearModel::zeros(2), x, y, c);
    EXPECT_EQ(a.first.weights, b.first.weights);
    EXPECT_EQ(a.second.to_json(), b.second.to_json());
    c.seed = 6;
    EXPECT_NE(train(LinearModel::zeros(2), x, y, c).first.weights, a.first.weights);
}

TEST(Train, FullBatchLossIsMonotone) {
    const auto [x, y] = clusters(15, 4);
    TrainConfig c;
    c.epochs = 100;
    c.batch_size = static_cast<int>(x.rows());
    const auto metrics = train(LinearModel::zeros(2), x, y, c).second;
    for (std::size_t e = 1; e < metrics.epochs.size(); ++e) EXPECT_LE(metrics.epochs[e].loss, metrics.epochs[e - 1].loss + 1e-9);
}

TEST(Evaluate, ConfusionAndConstantPredictor) {
    const auto [x, y0] = clusters(10, 5);
    std::vector<int> y = y0;
    y[0] = y[1] = y[2] = 2;  // class counts 7, 10, 13, 10
    LinearModel m = LinearModel::zeros(2, false);
    m.bias(2) = 1.0;
    const Metrics e = evaluate(m, x, y);
    EXPECT_DOUBLE_EQ(e.accuracy, 13.0 / 40.0);
    EXPECT_EQ(e.confusion.rowwise().sum(), (Eigen::Matrix<long, 4, 1>(7, 10, 13, 10)));
    EXPECT_DOUBLE_EQ(static_cast<double>(e.confusion.trace()) / 40.0, e.accuracy);
}

TEST(Checkpoint, RoundTrip) {
    const auto [x, y] = clusters(10, 6);
    TrainConfig c;
    c.epochs = 5;
    const auto model = train(LinearModel::zeros(2), x, y, c).first;
    const auto path = std::filesystem::temp_directory_path() / "qerc_model_test.bin";
    save_model(model, c, path);
    const LinearModel back = load_model(path);
    EXPECT_EQ(back.weights, model.weights);
    EXPECT_EQ(back.bias, model.bias);
    EXPECT_EQ(back.l2_normalize, model.l2_normalize);
    std::filesystem::remove(path);
}
