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

// Gate sequences over {H, S, S^dagger, CNOT, T} and a dense statevector.
// Basis index bit l is qubit l.

#include <complex>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "qerc/error.hpp"

namespace qerc::quantum {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 9;

enum class GateKind : std::uint8_t { h, s, sdg, cnot, t };

struct Gate {
    GateKind kind;
    int q0;
    int q1 = -1;  // CNOT target
    bool operator==(const Gate &) const = default;
};

inline std::string gate_name(GateKind k) {
    switch (k) {
        case GateKind::h:
            return "h";
        case GateKind::s:
            return "s";
        case GateKind::sdg:
            return "sdg";
        case GateKind::cnot:
            return "cx";
        case GateKind::t:
            return "t";
    }
    return "?";
}

struct GateSequence {
    int n_qubits = 1;
    std::vector<Gate> gates;

    void validate() const {
        if (n_qubits < 1 || n_qubits > kMaxQubits) throw InvalidArgument("qubit count must be in 1..9");
        for (const auto &g : gates) {
            if (g.q0 < 0 || g.q0 >= n_qubits) throw InvalidArgument("gate qubit out of range");
            if (g.kind == GateKind::cnot && (g.q1 < 0 || g.q1 >= n_qubits || g.q1 == g.q0)) {
                throw InvalidArgument("CNOT needs distinct control and target in range");
            }
        }
    }
    bool operator==(const GateSequence &) const = default;
};

struct StateVector {
    int n_qubits = 1;
    std::vector<cplx> amps;

    static StateVector basis(int n, std::size_t index = 0) {
        if (n < 1 || n > kMaxQubits) throw InvalidArgument("qubit count must be in 1..9");
        StateVector s{n, std::vector<cplx>(std::size_t{1} << n, 0.0)};
        s.amps.at(index) = 1.0;
        return s;
    }
    std::size_t dim() const {
        return amps.size();
    }
    double norm() const {
        double acc = 0.0;
        for (const auto &a : amps) acc += std::norm(a);
        return std::sqrt(acc);
    }
};

inline void apply_gate(StateVector &st, const Gate &g) {
    const std::size_t dim = st.dim();
    const std::size_t bit = std::size_t{1} << g.q0;
    switch (g.kind) {
        case GateKind::h: {
            const double r = std::numbers::sqrt2 / 2;
            for (std::size_t i = 0; i < dim; ++i) {
                if (i & bit) continue;
                const cplx a = st.amps[i], b = st.amps[i | bit];
                st.amps[i] = r * (a + b);
                st.amps[i | bit] = r * (a - b);
            }
            break;
        }
        case GateKind::s:
        case GateKind::sdg:
        case GateKind::t: {
            const cplx phase = g.kind == GateKind::s     ? cplx(0, 1)
                               : g.kind == GateKind::sdg ? cplx(0, -1)
                                                         : std::polar(1.0, std::numbers::pi / 4);
            for (std::size_t i = 0; i < dim; ++i)
                if (i & bit) st.amps[i] *= phase;
            break;
        }
        case GateKind::cnot: {
            const std::size_t tbit = std::size_t{1} << g.q1;
            for (std::size_t i = 0; i < dim; ++i)
                if ((i & bit) && !(i & tbit)) std::swap(st.amps[i], st.amps[i | tbit]);
            break;
        }
    }
}

inline StateVector apply(const GateSequence &seq, StateVector st) {
    if (seq.n_qubits != st.n_qubits) throw InvalidArgument("sequence and state qubit counts differ");
    for (const auto &g : seq.gates) apply_gate(st, g);
    return st;
}

}  // namespace qerc::quantum
