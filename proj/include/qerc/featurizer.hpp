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

// PCA compression of training images, component selection, min-max rescale
// to encoder angles in [0, pi], and per-pixel standardization for baselines.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qerc/error.hpp"
#include "qerc/io.hpp"

namespace qerc::features {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PcaModel {
    VectorXd mean;
    MatrixXd components;  // k x d, orthonormal rows, descending variance
    VectorXd variances;
    VectorXd variance_ratios;

    int k() const {
        return static_cast<int>(components.rows());
    }
    int dim() const {
        return static_cast<int>(components.cols());
    }
};

/// Rows of `data` are samples. Uses the n x n Gram matrix when n < d.
inline PcaModel fit_pca(const MatrixXd &data, int k) {
    const auto n = data.rows();
    const auto d = data.cols();
    if (k < 1) throw InvalidArgument("PCA needs k >= 1");
    if (n < k + 1) throw InvalidArgument("PCA with k=" + std::to_string(k) + " needs at least k+1 samples");
    PcaModel m;
    m.mean = data.colwise().mean().transpose();
    const MatrixXd centered = data.rowwise() - m.mean.transpose();
    const double denom = static_cast<double>(n - 1);

    VectorXd eigvals;
    MatrixXd axes;  // d x r, columns unit length
    if (n < d) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(centered * centered.transpose() / denom);
        eigvals = eig.eigenvalues().reverse();
        const MatrixXd u = eig.eigenvectors().rowwise().reverse();
        axes.resize(d, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            VectorXd v = centered.transpose() * u.col(i);
            const double norm = v.norm();
            axes.col(i) = norm > 0.0 ? VectorXd(v / norm) : VectorXd::Zero(d);
        }
    } else {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(centered.transpose() * centered / denom);
        eigvals = eig.eigenvalues().reverse();
        axes = eig.eigenvectors().rowwise().reverse();
    }
    eigvals = eigvals.cwiseMax(0.0);
    const double total = eigvals.sum();
    const double cutoff = 1e-10 * std::max(total, 1e-300);
    const auto rank = (eigvals.array() > cutoff).count();
    if (k > rank) {
        throw NumericalError("PCA k=" + std::to_string(k) + " exceeds data rank " + std::to_string(rank));
    }
    m.components.resize(k, d);
    m.variances = eigvals.head(k);
    m.variance_ratios = m.variances / total;
    for (int i = 0; i < k; ++i) {
        VectorXd v = axes.col(i);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        m.components.row(i) = v.transpose();
    }
    return m;
}

struct VarianceTable {
    std::vector<double> ratios;
    std::vector<double> cumulative;

    std::string csv() const {
        std::ostringstream out;
        out.precision(17);
        out << "component,ratio,cumulative\n";
        for (std::size_t i = 0; i < ratios.size(); ++i) out << i + 1 << ',' << ratios[i] << ',' << cumulative[i] << '\n';
        return out.str();
    }
};

inline VarianceTable explained_variance(const PcaModel &m) {
    VarianceTable t;
    double run = 0.0;
    for (Eigen::Index i = 0; i < m.variance_ratios.size(); ++i) {
        t.ratios.push_back(m.variance_ratios(i));
        run += m.variance_ratios(i);
        t.cumulative.push_back(run);
    }
    return t;
}

/// Ordered 1-based component indices.
struct ComponentSelection {
    std::vector<int> indices;

    static ComponentSelection identity(int n) {
        ComponentSelection s;
        for (int i = 1; i <= n; ++i) s.indices.push_back(i);
        return s;
    }

    /// "1-12,15,16" style lists.
    static ComponentSelection parse(std::string_view text) {
        ComponentSelection s;
        const auto number = [&](std::string_view tok) {
            int v = 0;
            const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty()) {
                throw InvalidArgument("bad component index '" + std::string(tok) + "'");
            }
            return v;
        };
        while (!text.empty()) {
            const auto comma = text.find(',');
            std::string_view tok = text.substr(0, comma);
            while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
            while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
            const auto dash = tok.find('-');
            if (dash == std::string_view::npos) {
                s.indices.push_back(number(tok));
            } else {
                const int lo = number(tok.substr(0, dash));
                const int hi = number(tok.substr(dash + 1));
                if (hi < lo) throw InvalidArgument("descending component range '" + std::string(tok) + "'");
                for (int i = lo; i <= hi; ++i) s.indices.push_back(i);
            }
            if (comma == std::string_view::npos) break;
            text.remove_prefix(comma + 1);
        }
        if (s.indices.empty()) throw InvalidArgument("empty component selection");
        return s;
    }

    std::string str() const {
        std::string out;
        std::size_t i = 0;
        while (i < indices.size()) {
            std::size_t j = i;
            while (j + 1 < indices.size() && indices[j + 1] == indices[j] + 1) ++j;
            if (!out.empty()) out += ',';
            out += std::to_string(indices[i]);
            if (j > i) out += '-' + std::to_string(indices[j]);
            i = j + 1;
        }
        return out;
    }

    void validate(int k) const {
        std::set<int> seen;
        for (int i : indices) {
            if (i < 1 || i > k) throw InvalidArgument("component " + std::to_string(i) + " outside 1.." + std::to_string(k));
            if (!seen.insert(i).second) throw InvalidArgument("component " + std::to_string(i) + " selected twice");
        }
    }
    int max_index() const {
        return indices.empty() ? 0 : *std::max_element(indices.begin(), indices.end());
    }
    std::size_t size() const {
        return indices.size();
    }
    bool operator==(const ComponentSelection &) const = default;
};

inline VectorXd project(const PcaModel &m, const VectorXd &image, const ComponentSelection &sel) {
    sel.validate(m.k());
    if (image.size() != m.dim()) throw InvalidArgument("image dimension does not match the PCA model");
    const VectorXd centered = image - m.mean;
    VectorXd out(static_cast<Eigen::Index>(sel.size()));
    for (std::size_t i = 0; i < sel.size(); ++i) out(static_cast<Eigen::Index>(i)) = m.components.row(sel.indices[i] - 1).dot(centered);
    return out;
}

/// Rows are samples.
inline MatrixXd project_all(const PcaModel &m, const MatrixXd &images, const ComponentSelection &sel) {
    sel.validate(m.k());
    if (images.cols() != m.dim()) throw InvalidArgument("image dimension does not match the PCA model");
    MatrixXd axes(static_cast<Eigen::Index>(sel.size()), m.dim());
    for (std::size_t i = 0; i < sel.size(); ++i) axes.row(static_cast<Eigen::Index>(i)) = m.components.row(sel.indices[i] - 1);
    return (images.rowwise() - m.mean.transpose()) * axes.transpose();
}

struct RescaleParams {
    VectorXd min;
    VectorXd max;
};

inline RescaleParams fit_rescale(const MatrixXd &raw) {
    if (raw.rows() == 0) throw InvalidArgument("rescale needs training features");
    return {raw.colwise().minCoeff().transpose(), raw.colwise().maxCoeff().transpose()};
}

/// Train min -> 0, train max -> pi, clamped; constant components -> pi/2.
inline VectorXd apply_rescale(const RescaleParams &p, const VectorXd &raw) {
    if (raw.size() != p.min.size()) throw InvalidArgument("rescale dimension mismatch");
    VectorXd out(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        const double span = p.max(i) - p.min(i);
        out(i) = span > 0.0 ? std::clamp((raw(i) - p.min(i)) / span * std::numbers::pi, 0.0, std::numbers::pi)
                            : std::numbers::pi / 2;
    }
    return out;
}

inline MatrixXd apply_rescale_all(const RescaleParams &p, const MatrixXd &raw) {
    MatrixXd out(raw.rows(), raw.cols());
    for (Eigen::Index r = 0; r < raw.rows(); ++r) out.row(r) = apply_rescale(p, raw.row(r).transpose()).transpose();
    return out;
}

struct Standardizer {
    VectorXd mean;
    VectorXd stddev;
};

inline Standardizer standardize_fit(const MatrixXd &train) {
    if (train.rows() == 0) throw InvalidArgument("standardization needs training data");
    Standardizer s;
    s.mean = train.colwise().mean().transpose();
    s.stddev = ((train.rowwise() - s.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    return s;
}

/// Zero-variance pixels map to 0.
inline MatrixXd standardize_apply(const Standardizer &s, const MatrixXd &x) {
    if (x.cols() != s.mean.size()) throw InvalidArgument("standardization dimension mismatch");
    MatrixXd out = x.rowwise() - s.mean.transpose();
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const double sd = s.stddev(c);
        if (sd > 1e-12 * std::max(1.0, std::abs(s.mean(c)))) out.col(c) /= sd;
        else out.col(c).setZero();
    }
    return out;
}

// Persistence: one JSON header line, then little-endian float64 payload
// (mean, components row-major, variances, ratios).

inline void save_pca(const PcaModel &m, const std::filesystem::path &path) {
    std::vector<double> payload;
    payload.insert(payload.end(), m.mean.data(), m.mean.data() + m.mean.size());
    for (int r = 0; r < m.k(); ++r)
        for (int c = 0; c < m.dim(); ++c) payload.push_back(m.components(r, c));
    payload.insert(payload.end(), m.variances.data(), m.variances.data() + m.variances.size());
    payload.insert(payload.end(), m.variance_ratios.data(), m.variance_ratios.data() + m.variance_ratios.size());
    const nlohmann::json header{{"format", "qerc-pca"}, {"k", m.k()}, {"dim", m.dim()},
                                {"sha256", io::sha256_of<double>(payload)}};
    std::string bytes = header.dump() + "\n";
    bytes.append(reinterpret_cast<const char *>(payload.data()), payload.size() * sizeof(double));
    io::write_text(path, bytes);
}

inline PcaModel load_pca(const std::filesystem::path &path) {
    const std::string bytes = io::read_text(path);
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw DataError("truncated PCA file " + path.string());
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception &) {
        throw DataError("bad PCA header in " + path.string());
    }
    const int k = header.value("k", 0), d = header.value("dim", 0);
    const std::size_t count = static_cast<std::size_t>(d) + static_cast<std::size_t>(k) * d + 2 * static_cast<std::size_t>(k);
    if (header.value("format", "") != "qerc-pca" || k < 1 || d < 1 || bytes.size() - nl - 1 != count * sizeof(double)) {
        throw DataError("malformed PCA file " + path.string());
    }
    std::vector<double> payload(count);
    std::memcpy(payload.data(), bytes.data() + nl + 1, count * sizeof(double));
    if (io::sha256_of<double>(payload) != header.value("sha256", "")) throw DataError("PCA checksum mismatch in " + path.string());
    PcaModel m;
    const double *p = payload.data();
    m.mean = Eigen::Map<const VectorXd>(p, d);
    p += d;
    m.components = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(p, k, d);
    p += static_cast<std::ptrdiff_t>(k) * d;
    m.variances = Eigen::Map<const VectorXd>(p, k);
    p += k;
    m.variance_ratios = Eigen::Map<const VectorXd>(p, k);
    return m;
}

}  // namespace qerc::features
