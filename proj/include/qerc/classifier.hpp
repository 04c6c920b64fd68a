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

#pragma once

// Single-layer softmax readout trained with mean cross-entropy and AdaGrad.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qerc/error.hpp"
#include "qerc/io.hpp"
#include "qerc/labeler.hpp"

namespace qerc::classify {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr int kClasses = kNumPhases;

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 300;
    int batch_size = 32;
    double adagrad_epsilon = 1e-8;
    bool l2_normalize_inputs = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
        if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
        if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
        if (!(adagrad_epsilon >= 0.0)) throw InvalidArgument("AdaGrad epsilon must be non-negative");
    }
    bool operator==(const TrainConfig &) const = default;
};

struct LinearModel {
    MatrixXd weights;  // classes x D
    VectorXd bias;
    bool l2_normalize = true;

    static LinearModel zeros(Eigen::Index dim, bool l2_normalize = true) {
        return {MatrixXd::Zero(kClasses, dim), VectorXd::Zero(kClasses), l2_normalize};
    }
    Eigen::Index dim() const {
        return weights.cols();
    }
};

inline VectorXd normalize_input(const VectorXd &x, bool flag) {
    if (!flag) return x;
    const double n = x.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("cannot normalize a zero or non-finite input");
    return x / n;
}

inline MatrixXd normalize_rows(const MatrixXd &x, bool flag) {
    MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = normalize_input(x.row(r).transpose(), flag).transpose();
    return out;
}

inline VectorXd softmax(const VectorXd &logits) {
    const VectorXd e = (logits.array() - logits.maxCoeff()).exp();
    return e / e.sum();
}

/// softmax(W x + b) on an already-normalized input.
inline VectorXd forward(const LinearModel &m, const VectorXd &x) {
    if (x.size() != m.dim()) throw InvalidArgument("input dimension does not match the model");
    return softmax(m.weights * x + m.bias);
}

struct Gradients {
    MatrixXd weights;
    VectorXd bias;
};

/// Mean cross-entropy over the rows of `x` and its analytic gradient.
inline std::pair<double, Gradients> loss_and_grad(const LinearModel &m, const MatrixXd &x, std::span<const int> labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size() || x.rows() == 0) throw InvalidArgument("batch shape mismatch");
    Gradients g{MatrixXd::Zero(m.weights.rows(), m.weights.cols()), VectorXd::Zero(m.bias.size())};
    double loss = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const int y = labels[static_cast<std::size_t>(r)];
        if (y < 0 || y >= kClasses) throw InvalidArgument("label outside 0..3");
        const VectorXd xr = x.row(r).transpose();
        const VectorXd logits = m.weights * xr + m.bias;
        const double top = logits.maxCoeff();
        const double lse = top + std::log((logits.array() - top).exp().sum());
        loss += lse - logits(y);
        VectorXd delta = (logits.array() - lse).exp();
        delta(y) -= 1.0;
        g.weights.noalias() += delta * xr.transpose();
        g.bias += delta;
    }
    const double inv = 1.0 / static_cast<double>(x.rows());
    g.weights *= inv;
    g.bias *= inv;
    return {loss * inv, g};
}

struct AdaGradState {
    MatrixXd weights;
    VectorXd bias;

    static AdaGradState for_model(const LinearModel &m) {
        return {MatrixXd::Zero(m.weights.rows(), m.weights.cols()), VectorXd::Zero(m.bias.size())};
    }
};

inline void adagrad_step(LinearModel &m, const Gradients &g, AdaGradState &acc, const TrainConfig &c) {
    if (acc.weights.rows() != m.weights.rows() || acc.weights.cols() != m.weights.cols() || acc.bias.size() != m.bias.size()) {
        throw InvalidArgument("AdaGrad accumulator shape mismatch");
    }
    acc.weights.array() += g.weights.array().square();
    acc.bias.array() += g.bias.array().square();
    m.weights.array() -= c.learning_rate * g.weights.array() / (acc.weights.array().sqrt() + c.adagrad_epsilon);
    m.bias.array() -= c.learning_rate * g.bias.array() / (acc.bias.array().sqrt() + c.adagrad_epsilon);
}

struct EpochStats {
    double loss;
    double accuracy;
};

struct Metrics {
    std::vector<EpochStats> epochs;
    double accuracy = 0.0;
    double loss = 0.0;
    Eigen::Matrix<long, kClasses, kClasses> confusion = Eigen::Matrix<long, kClasses, kClasses>::Zero();  // truth x predicted
    std::vector<int> predictions;
    long updates = 0;

    nlohmann::json to_json() const {
        nlohmann::json conf = nlohmann::json::array();
        for (int r = 0; r < kClasses; ++r) {
            std::vector<long> row;
            for (int c = 0; c < kClasses; ++c) row.push_back(confusion(r, c));
            conf.push_back(row);
        }
        nlohmann::json ep = nlohmann::json::array();
        for (const auto &e : epochs) ep.push_back({e.loss, e.accuracy});
        return {{"accuracy", accuracy}, {"loss", loss}, {"confusion", conf}, {"updates", updates}, {"epochs", ep}};
    }
};

inline int argmax(const VectorXd &v) {
    Eigen::Index i = 0;
    v.maxCoeff(&i);
    return static_cast<int>(i);
}

/// Inputs are the raw rows; normalization follows the model flag.
inline Metrics evaluate(const LinearModel &m, const MatrixXd &x, std::span<const int> labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw InvalidArgument("evaluation shape mismatch");
    Metrics out;
    if (x.rows() == 0) return out;
    const MatrixXd xn = normalize_rows(x, m.l2_normalize);
    long correct = 0;
    for (Eigen::Index r = 0; r < xn.rows(); ++r) {
        const VectorXd p = forward(m, xn.row(r).transpose());
        const int pred = argmax(p);
        const int y = labels[static_cast<std::size_t>(r)];
        out.predictions.push_back(pred);
        out.confusion(y, pred) += 1;
        correct += pred == y;
        out.loss -= std::log(std::max(p(y), 1e-300));
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(x.rows());
    out.loss /= static_cast<double>(x.rows());
    return out;
}

inline std::pair<LinearModel, Metrics> train(LinearModel model, const MatrixXd &x, std::span<const int> labels,
                                             const TrainConfig &config) {
    config.validate();
    if (x.rows() == 0) throw InvalidArgument("training set is empty");
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw InvalidArgument("training shape mismatch");
    if (x.cols() != model.dim()) throw InvalidArgument("input dimension does not match the model");
    model.l2_normalize = config.l2_normalize_inputs;
    const MatrixXd xn = normalize_rows(x, model.l2_normalize);
    AdaGradState acc = AdaGradState::for_model(model);
    std::mt19937_64 rng(config.seed);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Metrics metrics;
    const auto n = static_cast<std::size_t>(x.rows());
    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            MatrixXd bx(static_cast<Eigen::Index>(len), xn.cols());
            std::vector<int> by(len);
            for (std::size_t i = 0; i < len; ++i) {
                bx.row(static_cast<Eigen::Index>(i)) = xn.row(order[start + i]);
                by[i] = labels[static_cast<std::size_t>(order[start + i])];
            }
            adagrad_step(model, loss_and_grad(model, bx, by).second, acc, config);
            ++metrics.updates;
        }
        const Metrics e = evaluate(model, x, labels);
        if (!std::isfinite(e.loss)) throw NumericalError("training loss became non-finite");
        metrics.epochs.push_back({e.loss, e.accuracy});
    }
    const Metrics last = evaluate(model, x, labels);
    metrics.accuracy = last.accuracy;
    metrics.loss = last.loss;
    metrics.confusion = last.confusion;
    metrics.predictions = last.predictions;
    return {model, metrics};
}

// Checkpoint: JSON header line, then float64 weights (row-major) and bias.

inline void save_model(const LinearModel &m, const TrainConfig &c, const std::filesystem::path &path) {
    std::vector<double> payload;
    for (Eigen::Index r = 0; r < m.weights.rows(); ++r)
        for (Eigen::Index k = 0; k < m.weights.cols(); ++k) payload.push_back(m.weights(r, k));
    payload.insert(payload.end(), m.bias.data(), m.bias.data() + m.bias.size());
    const nlohmann::json header{{"format", "qerc-linear"},
                                {"dim", m.dim()},
                                {"l2_normalize", m.l2_normalize},
                                {"config",
                                 {{"learning_rate", c.learning_rate},
                                  {"epochs", c.epochs},
                                  {"batch_size", c.batch_size},
                                  {"adagrad_epsilon", c.adagrad_epsilon},
                                  {"seed", c.seed}}},
                                {"sha256", io::sha256_of<double>(payload)}};
    std::string bytes = header.dump() + "\n";
    bytes.append(reinterpret_cast<const char *>(payload.data()), payload.size() * sizeof(double));
    io::write_text(path, bytes);
}

inline LinearModel load_model(const std::filesystem::path &path) {
    const std::string bytes = io::read_text(path);
    const auto nl = bytes.find('\n');
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception &) {
        throw DataError("bad model header in " + path.string());
    }
    const long dim = header.value("dim", 0L);
    const std::size_t count = static_cast<std::size_t>(kClasses * dim + kClasses);
    if (nl == std::string::npos || header.value("format", "") != "qerc-linear" || dim < 1 ||
        bytes.size() - nl - 1 != count * sizeof(double)) {
        throw DataError("malformed model file " + path.string());
    }
    std::vector<double> payload(count);
    std::memcpy(payload.data(), bytes.data() + nl + 1, count * sizeof(double));
    if (io::sha256_of<double>(payload) != header.value("sha256", "")) throw DataError("model checksum mismatch in " + path.string());
    LinearModel m;
    m.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(payload.data(), kClasses, dim);
    m.bias = Eigen::Map<const VectorXd>(payload.data() + kClasses * dim, kClasses);
    m.l2_normalize = header.value("l2_normalize", true);
    return m;
}

}  // namespace qerc::classify
