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

// End-to-end experiment steps: dataset matrices, PCA features, reservoir
// features, readout training and evaluation, and the classical baselines.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qerc/classifier.hpp"
#include "qerc/dataset.hpp"
#include "qerc/featurizer.hpp"
#include "qerc/parallel.hpp"
#include "qerc/phase_viz.hpp"
#include "qerc/qreservoir.hpp"

namespace qerc::pipeline {

using Eigen::MatrixXd;

struct Split {
    MatrixXd images;  // rows are samples
    std::vector<int> labels;
    std::vector<const dataset::Sample *> samples;
};

struct Matrices {
    Split train;
    Split test;
};

inline Split collect_split(const dataset::Dataset &d, const dataset::Manifest &view, dataset::Split which) {
    Split s;
    s.samples = view.split(which);
    s.images.resize(static_cast<Eigen::Index>(s.samples.size()), static_cast<Eigen::Index>(d.pixels()));
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        const auto img = d.image(*s.samples[i]);
        for (std::size_t p = 0; p < img.size(); ++p) s.images(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = img[p];
        s.labels.push_back(phase_code(s.samples[i]->label));
    }
    return s;
}

/// `view` may be a thinned or balanced manifest over the same images.
inline Matrices collect(const dataset::Dataset &d, const dataset::Manifest &view) {
    Matrices m{collect_split(d, view, dataset::Split::train), collect_split(d, view, dataset::Split::test)};
    if (m.train.labels.empty()) throw DataError("dataset has no training samples");
    return m;
}

inline Matrices collect(const dataset::Dataset &d) {
    return collect(d, d.manifest);
}

struct QercConfig {
    quantum::ReservoirSpec reservoir;
    int shots = 2048;
    std::uint64_t shot_seed = 0;
    classify::TrainConfig train;
    std::optional<features::ComponentSelection> selection;  // default 1..2 N_Q
    unsigned threads = default_threads();

    features::ComponentSelection resolved_selection() const {
        return selection ? *selection : features::ComponentSelection::identity(2 * reservoir.n_qubits);
    }
};

struct Angles {
    MatrixXd train;
    MatrixXd test;
};

/// Selected PCA coordinates rescaled to [0, pi] with train-fitted ranges.
inline Angles encoder_angles(const features::PcaModel &pca, const Matrices &m, const features::ComponentSelection &sel) {
    const MatrixXd raw_train = features::project_all(pca, m.train.images, sel);
    const MatrixXd raw_test = features::project_all(pca, m.test.images, sel);
    const auto scale = features::fit_rescale(raw_train);
    return {features::apply_rescale_all(scale, raw_train), features::apply_rescale_all(scale, raw_test)};
}

/// One probability vector per row; shot streams are keyed by the sample seed.
inline MatrixXd reservoir_features(const MatrixXd &angles, const Split &split, const quantum::GateSequence &seq, int shots,
                                   std::uint64_t shot_seed, unsigned threads) {
    const int n = seq.n_qubits;
    MatrixXd out(angles.rows(), Eigen::Index{1} << n);
    parallel_for(static_cast<std::size_t>(angles.rows()), threads, [&](std::size_t r) {
        const Eigen::VectorXd x = angles.row(static_cast<Eigen::Index>(r)).transpose();
        const auto st = quantum::apply(seq, quantum::encode(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), n));
        const std::uint64_t key = split.samples.empty() ? r : split.samples[r]->seed ^ (static_cast<std::uint64_t>(split.samples[r]->split) << 63);
        const auto probs = quantum::sample_shots(quantum::measure_probs(st), shots, dataset::mix64(shot_seed ^ dataset::mix64(key)));
        for (std::size_t k = 0; k < probs.size(); ++k) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = probs[k];
    });
    return out;
}

struct RunResult {
    classify::Metrics train;
    classify::Metrics test;
    std::vector<viz::Prediction> test_predictions;
};

inline std::vector<viz::Prediction> keyed_predictions(const Split &s, const classify::Metrics &m) {
    std::vector<viz::Prediction> out;
    for (std::size_t i = 0; i < s.samples.size(); ++i)
        out.push_back({s.samples[i]->f_index, s.samples[i]->chi_index, phase_from_code(m.predictions[i])});
    return out;
}

inline RunResult fit_and_score(const MatrixXd &train_x, const MatrixXd &test_x, const Matrices &m, const classify::TrainConfig &cfg) {
    auto [model, train_metrics] = classify::train(classify::LinearModel::zeros(train_x.cols(), cfg.l2_normalize_inputs), train_x,
                                                  m.train.labels, cfg);
    RunResult r;
    r.train = std::move(train_metrics);
    r.test = classify::evaluate(model, test_x, m.test.labels);
    r.test_predictions = keyed_predictions(m.test, r.test);
    return r;
}

/// PCA model large enough for every selection used in an experiment.
inline features::PcaModel fit_shared_pca(const Matrices &m, int k) {
    return features::fit_pca(m.train.images, k);
}

inline RunResult run_qerc(const features::PcaModel &pca, const Matrices &m, const QercConfig &cfg) {
    cfg.reservoir.validate();
    const auto sel = cfg.resolved_selection();
    if (sel.size() != static_cast<std::size_t>(2 * cfg.reservoir.n_qubits)) {
        throw InvalidArgument("component selection must have 2 x n_qubits entries");
    }
    const Angles a = encoder_angles(pca, m, sel);
    const auto seq = quantum::build_reservoir(cfg.reservoir);
    const MatrixXd ftrain = reservoir_features(a.train, m.train, seq, cfg.shots, cfg.shot_seed, cfg.threads);
    const MatrixXd ftest = reservoir_features(a.test, m.test, seq, cfg.shots, cfg.shot_seed, cfg.threads);
    return fit_and_score(ftrain, ftest, m, cfg.train);
}

/// Linear readout on the same rescaled PCA angles the encoder would see.
inline RunResult run_pca_baseline(const features::PcaModel &pca, const Matrices &m, int n_components, classify::TrainConfig cfg) {
    const Angles a = encoder_angles(pca, m, features::ComponentSelection::identity(n_components));
    cfg.l2_normalize_inputs = false;
    return fit_and_score(a.train, a.test, m, cfg);
}

/// Linear readout on per-pixel standardized images.
inline RunResult run_pixel_baseline(const Matrices &m, classify::TrainConfig cfg) {
    const auto st = features::standardize_fit(m.train.images);
    cfg.l2_normalize_inputs = false;
    return fit_and_score(features::standardize_apply(st, m.train.images), features::standardize_apply(st, m.test.images), m, cfg);
}

/// Repetition r varies the reservoir, shot and shuffle seeds together.
inline QercConfig repetition(QercConfig cfg, int r) {
    const auto k = static_cast<std::uint64_t>(r);
    cfg.reservoir.seed += k;
    cfg.shot_seed += k;
    cfg.train.seed += k;
    return cfg;
}

}  // namespace qerc::pipeline
