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

// Angle encoding of feature vectors, the fixed random Clifford + T reservoir
// and its ablations, and exact or shot-sampled output probabilities.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qerc/circuit.hpp"
#include "qerc/clifford.hpp"

namespace qerc::quantum {

enum class Variant : std::uint8_t { clifford_t, clifford_only, t_only };

inline std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::clifford_t:
            return "CliffordT";
        case Variant::clifford_only:
            return "CliffordOnly";
        case Variant::t_only:
            return "TOnly";
    }
    return "?";
}

inline Variant variant_from_name(std::string_view s) {
    for (Variant v : {Variant::clifford_t, Variant::clifford_only, Variant::t_only})
        if (s == variant_name(v)) return v;
    throw InvalidArgument("unknown reservoir variant '" + std::string(s) + "'");
}

struct ReservoirSpec {
    int n_qubits = 8;
    Variant variant = Variant::clifford_t;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_qubits < 2 || n_qubits > kMaxQubits) throw InvalidArgument("reservoir needs 2..9 qubits");
    }
    nlohmann::json to_json() const {
        return {{"n_qubits", n_qubits}, {"variant", variant_name(variant)}, {"seed", seed}};
    }
    static ReservoirSpec from_json(const nlohmann::json &j) {
        return {j.at("n_qubits").get<int>(), variant_from_name(j.at("variant").get<std::string>()), j.at("seed").get<std::uint64_t>()};
    }
    bool operator==(const ReservoirSpec &) const = default;
};

/// Qubit l gets cos(x_l/2)|0> + e^{i x_{n+l}} sin(x_l/2)|1>.
inline StateVector encode(std::span<const double> features, int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) throw InvalidArgument("qubit count must be in 1..9");
    if (features.size() != static_cast<std::size_t>(2 * n_qubits)) {
        throw InvalidArgument("encoding needs " + std::to_string(2 * n_qubits) + " features, got " + std::to_string(features.size()));
    }
    std::vector<cplx> zero(static_cast<std::size_t>(n_qubits)), one(static_cast<std::size_t>(n_qubits));
    for (int l = 0; l < n_qubits; ++l) {
        const double theta = features[static_cast<std::size_t>(l)];
        const double phi = features[static_cast<std::size_t>(n_qubits + l)];
        zero[static_cast<std::size_t>(l)] = std::cos(theta / 2);
        one[static_cast<std::size_t>(l)] = std::polar(std::sin(theta / 2), phi);
    }
    StateVector st{n_qubits, std::vector<cplx>(std::size_t{1} << n_qubits)};
    for (std::size_t b = 0; b < st.dim(); ++b) {
        cplx a = 1.0;
        for (int l = 0; l < n_qubits; ++l) a *= (b >> l) & 1u ? one[static_cast<std::size_t>(l)] : zero[static_cast<std::size_t>(l)];
        st.amps[b] = a;
    }
    return st;
}

inline GateSequence build_reservoir(const ReservoirSpec &spec) {
    spec.validate();
    GateSequence seq{spec.n_qubits, {}};
    if (spec.variant != Variant::t_only) seq = sample_clifford(spec.n_qubits, spec.seed);
    if (spec.variant != Variant::clifford_only) {
        for (int q = 0; q < spec.n_qubits; ++q) {
            seq.gates.push_back({GateKind::h, q});
            seq.gates.push_back({GateKind::t, q});
            seq.gates.push_back({GateKind::h, q});
        }
    }
    return seq;
}

inline std::vector<double> measure_probs(const StateVector &st) {
    std::vector<double> p(st.dim());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(st.amps[i]);
    return p;
}

/// Empirical frequencies of `shots` draws; shots = 0 returns probs unchanged.
inline std::vector<double> sample_shots(std::span<const double> probs, int shots, std::uint64_t seed) {
    if (shots < 0) throw InvalidArgument("shots must be >= 0");
    if (shots == 0) return {probs.begin(), probs.end()};
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
    std::vector<double> counts(probs.size(), 0.0);
    for (int s = 0; s < shots; ++s) counts[dist(rng)] += 1.0;
    for (auto &c : counts) c /= shots;
    return counts;
}

}  // namespace qerc::quantum
