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

// Stabilizer tableaux, uniform sampling of the n-qubit Clifford group and
// synthesis of a tableau into H, S, S^dagger and CNOT.
//
// A tableau stores the images U X_i U^dagger (rows 0..n-1) and U Z_i U^dagger
// (rows n..2n-1) as bit masks with a sign bit; x = z = 1 on a qubit means Y.

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

#include "qerc/circuit.hpp"

namespace qerc::quantum {

struct PauliRow {
    std::uint32_t x = 0;
    std::uint32_t z = 0;
    bool sign = false;
    bool operator==(const PauliRow &) const = default;
};

struct Tableau {
    int n = 1;
    std::vector<PauliRow> rows;

    static Tableau identity(int n) {
        Tableau t{n, std::vector<PauliRow>(static_cast<std::size_t>(2 * n))};
        for (int i = 0; i < n; ++i) {
            t.rows[static_cast<std::size_t>(i)].x = 1u << i;
            t.rows[static_cast<std::size_t>(n + i)].z = 1u << i;
        }
        return t;
    }
    PauliRow &destabilizer(int i) {
        return rows[static_cast<std::size_t>(i)];
    }
    PauliRow &stabilizer(int i) {
        return rows[static_cast<std::size_t>(n + i)];
    }

    /// Conjugates every row by the gate: P -> g P g^dagger.
    void apply(const Gate &g) {
        const std::uint32_t a = 1u << g.q0;
        for (auto &r : rows) {
            const bool xa = r.x & a, za = r.z & a;
            switch (g.kind) {
                case GateKind::h:
                    r.sign ^= xa && za;
                    r.x = (r.x & ~a) | (za ? a : 0u);
                    r.z = (r.z & ~a) | (xa ? a : 0u);
                    break;
                case GateKind::s:
                    r.sign ^= xa && za;
                    if (xa) r.z ^= a;
                    break;
                case GateKind::sdg:
                    r.sign ^= xa && !za;
                    if (xa) r.z ^= a;
                    break;
                case GateKind::cnot: {
                    const std::uint32_t b = 1u << g.q1;
                    const bool xb = r.x & b, zb = r.z & b;
                    r.sign ^= xa && zb && (xb == za);
                    if (xa) r.x ^= b;
                    if (zb) r.z ^= a;
                    break;
                }
                case GateKind::t:
                    throw InvalidArgument("T is not a Clifford gate");
            }
        }
    }

    bool operator==(const Tableau &) const = default;
};

inline Tableau tableau_of(const GateSequence &seq) {
    seq.validate();
    Tableau t = Tableau::identity(seq.n_qubits);
    for (const auto &g : seq.gates) t.apply(g);
    return t;
}

/// Symplectic form on (x, z) pairs.
inline bool symplectic(const PauliRow &a, const PauliRow &b) {
    return (std::popcount((a.x & b.z) ^ (a.z & b.x)) & 1) != 0;
}

/// Uniform over the Clifford group modulo global phase: a uniform symplectic
/// basis built pair by pair in the complement of the pairs chosen so far,
/// plus uniform sign bits.
inline Tableau random_clifford_tableau(int n, std::mt19937_64 &rng) {
    if (n < 1 || n > kMaxQubits) throw InvalidArgument("qubit count must be in 1..9");
    const std::uint32_t mask = (1u << n) - 1u;
    std::vector<PauliRow> vs, ws;
    const auto draw = [&] {
        PauliRow u{static_cast<std::uint32_t>(rng()) & mask, static_cast<std::uint32_t>(rng()) & mask, false};
        // Projection onto the symplectic complement of the chosen pairs.
        PauliRow out = u;
        for (std::size_t j = 0; j < vs.size(); ++j) {
            if (symplectic(u, ws[j])) out.x ^= vs[j].x, out.z ^= vs[j].z;
            if (symplectic(u, vs[j])) out.x ^= ws[j].x, out.z ^= ws[j].z;
        }
        return out;
    };
    for (int i = 0; i < n; ++i) {
        PauliRow v;
        do v = draw();
        while (v.x == 0 && v.z == 0);
        PauliRow w;
        do w = draw();
        while (!symplectic(v, w));
        vs.push_back(v);
        ws.push_back(w);
    }
    Tableau t{n, std::vector<PauliRow>(static_cast<std::size_t>(2 * n))};
    for (int i = 0; i < n; ++i) {
        t.destabilizer(i) = vs[static_cast<std::size_t>(i)];
        t.stabilizer(i) = ws[static_cast<std::size_t>(i)];
    }
    for (auto &r : t.rows) r.sign = rng() & 1u;
    return t;
}

/// A circuit whose tableau equals `target`.
inline GateSequence synthesize(Tableau target) {
    const int n = target.n;
    std::vector<Gate> reduce;
    const auto push = [&](Gate g) {
        target.apply(g);
        reduce.push_back(g);
    };
    for (int i = 0; i < n; ++i) {
        // Destabilizer i -> X_i.
        for (int j = i; j < n; ++j) {
            const std::uint32_t b = 1u << j;
            PauliRow &d = target.destabilizer(i);
            if ((d.z & b) && !(d.x & b)) push({GateKind::h, j});
            else if ((d.z & b) && (d.x & b)) push({GateKind::s, j});
        }
        if (!(target.destabilizer(i).x & (1u << i))) {
            int j = i + 1;
            while (!(target.destabilizer(i).x & (1u << j))) ++j;
            push({GateKind::cnot, j, i});
        }
        for (int j = i + 1; j < n; ++j)
            if (target.destabilizer(i).x & (1u << j)) push({GateKind::cnot, i, j});
        // Stabilizer i -> Z_i, keeping X_i fixed.
        for (int j = i + 1; j < n; ++j) {
            const std::uint32_t b = 1u << j;
            const PauliRow &s = target.stabilizer(i);
            if ((s.x & b) && (s.z & b)) {
                push({GateKind::s, j});
                push({GateKind::h, j});
            } else if (s.x & b) {
                push({GateKind::h, j});
            }
            if (target.stabilizer(i).z & b) push({GateKind::cnot, j, i});
        }
        if (target.stabilizer(i).x & (1u << i)) {
            push({GateKind::h, i});
            push({GateKind::s, i});
            push({GateKind::h, i});
        }
    }
    // Remaining signs are a Pauli; undo the reduction after applying it.
    GateSequence out{n, {}};
    for (int i = 0; i < n; ++i) {
        if (target.destabilizer(i).sign) {  // Z_i
            out.gates.push_back({GateKind::s, i});
            out.gates.push_back({GateKind::s, i});
        }
        if (target.stabilizer(i).sign) {  // X_i
            out.gates.push_back({GateKind::h, i});
            out.gates.push_back({GateKind::s, i});
            out.gates.push_back({GateKind::s, i});
            out.gates.push_back({GateKind::h, i});
        }
    }
    for (auto it = reduce.rbegin(); it != reduce.rend(); ++it) {
        Gate g = *it;
        if (g.kind == GateKind::s) g.kind = GateKind::sdg;
        else if (g.kind == GateKind::sdg) g.kind = GateKind::s;
        out.gates.push_back(g);
    }
    return out;
}

inline GateSequence sample_clifford(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return synthesize(random_clifford_tableau(n, rng));
}

}  // namespace qerc::quantum
