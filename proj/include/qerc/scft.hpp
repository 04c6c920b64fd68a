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

// Self-consistent field solver for an AB diblock copolymer melt on a periodic
// 2D lattice. Chain statistics follow the modified diffusion equation
//   dQ/ds = (b^2/6) lap Q - beta V(r) Q
// integrated with a symmetric pseudospectral split step; mean fields are
//   V_A = chi phi_B + gamma,  V_B = chi phi_A + gamma
// and gamma is a Lagrange field pushing phi_A + phi_B toward 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qerc/error.hpp"
#include "qerc/lattice.hpp"

namespace qerc::scft {

struct MaterialParams {
    double f = 0.5;
    double chi = 0.0;
    int n_segments = 25;
    /// Statistical segment length in box units.
    double bond_length = 1.0;
    double beta = 1.0;

    double chi_n() const {
        return chi * n_segments;
    }

    void validate() const {
        if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("volume fraction f must lie in (0, 1)");
        if (!(chi >= 0.0) || !std::isfinite(chi)) throw InvalidArgument("chi must be finite and >= 0");
        if (n_segments < 1) throw InvalidArgument("n_segments must be >= 1");
        if (!(bond_length > 0.0)) throw InvalidArgument("bond_length must be > 0");
        if (!(beta > 0.0)) throw InvalidArgument("beta must be > 0");
    }
};

struct SimConfig {
    Lattice lattice{};
    int contour_steps = 500;
    int max_iterations = 3000;
    double mixing_rate = 0.15;
    double incompressibility_rate = 1.0;
    double tolerance = 1e-4;
    /// Initial fields are uniform noise in [-noise_amplitude, noise_amplitude].
    double noise_amplitude = 0.01;
    double divergence_threshold = 1e3;
    std::uint64_t seed = 0;

    void validate() const {
        if (!is_power_of_two(lattice.nx) || !is_power_of_two(lattice.ny)) {
            throw InvalidArgument("lattice dimensions must be powers of two");
        }
        if (!(lattice.lx > 0.0 && lattice.ly > 0.0)) throw InvalidArgument("system size must be positive");
        if (contour_steps < 2) throw InvalidArgument("contour_steps must be >= 2");
        if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
        if (!(mixing_rate >= 0.0 && mixing_rate <= 1.0)) throw InvalidArgument("mixing_rate must lie in [0, 1]");
        if (!(incompressibility_rate >= 0.0)) throw InvalidArgument("incompressibility_rate must be >= 0");
        if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be > 0");
        if (!(noise_amplitude >= 0.0)) throw InvalidArgument("noise_amplitude must be >= 0");
    }
    bool operator==(const SimConfig &) const = default;
};

using Field = std::vector<double>;

struct FieldState {
    Field w_a;
    Field w_b;
    Field gamma;
    Field phi_a;
    Field phi_b;
};

enum class Block : std::uint8_t { a, b };
enum class Direction : std::uint8_t { forward, backward };

struct ContourStep {
    double ds;
    Block block;
};

/// Contour discretization. The A block [0, fN] gets round(f * contour_steps)
/// equal steps and the B block the rest, so the junction always sits on a node.
struct ContourPlan {
    int steps_a = 0;
    int steps_b = 0;
    double ds_a = 0.0;
    double ds_b = 0.0;

    int total_steps() const {
        return steps_a + steps_b;
    }

    static ContourPlan make(const MaterialParams &params, int contour_steps) {
        ContourPlan plan;
        plan.steps_a = std::clamp(static_cast<int>(std::lround(params.f * contour_steps)), 1, contour_steps - 1);
        plan.steps_b = contour_steps - plan.steps_a;
        plan.ds_a = params.f * params.n_segments / plan.steps_a;
        plan.ds_b = (1.0 - params.f) * params.n_segments / plan.steps_b;
        return plan;
    }

    std::vector<ContourStep> sequence(Direction direction) const {
        std::vector<ContourStep> out;
        out.reserve(static_cast<std::size_t>(total_steps()));
        const auto push = [&](int count, double ds, Block block) {
            for (int i = 0; i < count; ++i) out.push_back({ds, block});
        };
        if (direction == Direction::forward) {
            push(steps_a, ds_a, Block::a);
            push(steps_b, ds_b, Block::b);
        } else {
            push(steps_b, ds_b, Block::b);
            push(steps_a, ds_a, Block::a);
        }
        return out;
    }
};

/// Full contour history Q(r, s_j), j = 0..steps.
struct Propagator {
    Direction direction = Direction::forward;
    int steps = 0;
    std::size_t sites = 0;
    std::vector<double> q;

    std::span<const double> at(int step) const {
        return {q.data() + static_cast<std::size_t>(step) * sites, sites};
    }
    std::span<double> at(int step) {
        return {q.data() + static_cast<std::size_t>(step) * sites, sites};
    }
};

struct Microstructure {
    Field phi_a;
    Lattice lattice;
    MaterialParams params;
    std::uint64_t seed = 0;
    bool converged = false;
    int iterations_used = 0;
    double residual = 0.0;
};

/// Raised when the residual blows past the guard threshold.
class DivergedError : public NumericalError {
   public:
    DivergedError(const std::string &what, std::vector<double> trace)
        : NumericalError(what), trace_(std::move(trace)) {
    }
    const std::vector<double> &trace() const {
        return trace_;
    }

   private:
    std::vector<double> trace_;
};

namespace detail {

// 53-bit uniform in [0, 1); spelled out so streams do not depend on the
// standard library's distribution implementation.
inline double unit_uniform(std::mt19937_64 &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void require_finite(std::span<const double> field, const char *name) {
    for (double v : field) {
        if (!std::isfinite(v)) throw InvalidArgument(std::string("non-finite value in field ") + name);
    }
}

inline double mean(std::span<const double> field) {
    double sum = 0.0;
    for (double v : field) sum += v;
    return sum / static_cast<double>(field.size());
}

}  // namespace detail

inline FieldState init_fields(const MaterialParams &params, const SimConfig &config) {
    params.validate();
    config.validate();
    const std::size_t m = config.lattice.size();
    FieldState state;
    state.w_a.resize(m);
    state.w_b.resize(m);
    state.gamma.assign(m, 0.0);
    state.phi_a.assign(m, params.f);
    state.phi_b.assign(m, 1.0 - params.f);
    std::mt19937_64 rng(config.seed);
    const double amp = config.noise_amplitude;
    for (std::size_t i = 0; i < m; ++i) {
        state.w_a[i] = amp * (2.0 * detail::unit_uniform(rng) - 1.0);
        state.w_b[i] = amp * (2.0 * detail::unit_uniform(rng) - 1.0);
    }
    return state;
}

/// Integrates the modified diffusion equation from Q(r, 0) = 1 along `plan`
/// in the given direction. Each step is exp(-beta V ds/2) exp((b^2/6) ds lap)
/// exp(-beta V ds/2).
inline Propagator solve_propagator(std::span<const double> w_a, std::span<const double> w_b, const ContourPlan &plan,
                                   Direction direction, const MaterialParams &params, SpectralDiffusion &diffusion) {
    const std::size_t m = diffusion.lattice().size();
    if (w_a.size() != m || w_b.size() != m) throw InvalidArgument("potential field does not match the lattice");
    detail::require_finite(w_a, "w_a");
    detail::require_finite(w_b, "w_b");

    const double b2_6 = params.bond_length * params.bond_length / 6.0;
    const std::vector<double> kernel_a = diffusion.kernel(b2_6 * plan.ds_a);
    const std::vector<double> kernel_b = diffusion.kernel(b2_6 * plan.ds_b);
    std::vector<double> half_a(m), half_b(m);
    for (std::size_t i = 0; i < m; ++i) {
        half_a[i] = std::exp(-0.5 * params.beta * w_a[i] * plan.ds_a);
        half_b[i] = std::exp(-0.5 * params.beta * w_b[i] * plan.ds_b);
    }

    const auto steps = plan.sequence(direction);
    Propagator prop;
    prop.direction = direction;
    prop.steps = static_cast<int>(steps.size());
    prop.sites = m;
    prop.q.resize((steps.size() + 1) * m);
    std::fill_n(prop.q.begin(), m, 1.0);

    std::vector<double> work(m);
    for (int j = 0; j < prop.steps; ++j) {
        const bool is_a = steps[static_cast<std::size_t>(j)].block == Block::a;
        const auto &half = is_a ? half_a : half_b;
        auto prev = prop.at(j);
        for (std::size_t i = 0; i < m; ++i) work[i] = half[i] * prev[i];
        diffusion.apply(work, is_a ? kernel_a : kernel_b);
        auto next = prop.at(j + 1);
        for (std::size_t i = 0; i < m; ++i) next[i] = half[i] * work[i];
    }
    return prop;
}

/// Segment densities from the contour integral of Q_fwd(r, s) Q_bwd(r, N - s)
/// (trapezoid rule per block). Each block is normalized so that its spatial
/// mean is f (A) or 1 - f (B).
inline std::pair<Field, Field> compute_density(const Propagator &fwd, const Propagator &bwd, const ContourPlan &plan,
                                               const MaterialParams &params) {
    const int total = plan.total_steps();
    if (fwd.steps != total || bwd.steps != total || fwd.sites != bwd.sites) {
        throw InvalidArgument("propagators do not match the contour plan");
    }
    const std::size_t m = fwd.sites;
    const double partition = detail::mean(fwd.at(total));
    if (!(partition > 0.0) || !std::isfinite(partition)) {
        throw NumericalError("single-chain partition function vanished");
    }

    Field int_a(m, 0.0), int_b(m, 0.0);
    const auto accumulate = [&](Field &acc, int first, int last, double ds) {
        for (int j = first; j <= last; ++j) {
            const double weight = (j == first || j == last) ? 0.5 * ds : ds;
            auto qf = fwd.at(j);
            auto qb = bwd.at(total - j);
            for (std::size_t i = 0; i < m; ++i) acc[i] += weight * qf[i] * qb[i];
        }
    };
    accumulate(int_a, 0, plan.steps_a, plan.ds_a);
    accumulate(int_b, plan.steps_a, total, plan.ds_b);

    const double mean_a = detail::mean(int_a);
    const double mean_b = detail::mean(int_b);
    if (!(mean_a > 0.0) || !(mean_b > 0.0) || !std::isfinite(mean_a) || !std::isfinite(mean_b)) {
        throw NumericalError("degenerate segment density");
    }
    const double scale_a = params.f / mean_a;
    const double scale_b = (1.0 - params.f) / mean_b;
    for (std::size_t i = 0; i < m; ++i) {
        int_a[i] *= scale_a;
        int_b[i] *= scale_b;
    }
    return {std::move(int_a), std::move(int_b)};
}

/// Fourier multiplier inverting the homogeneous melt's total-density response
/// to a potential acting on every segment, -d(phi_A + phi_B)/d(gamma) at
/// wavevector k. The response is taken from the discretized split-step chain
/// (linearized about V = 0), so it matches the propagator exactly; the
/// continuum limit is N g_D(k^2 R_g^2). Used to precondition the gamma update.
inline std::vector<double> pressure_preconditioner(const MaterialParams &params, const ContourPlan &plan,
                                                   const SpectralDiffusion &diffusion) {
    const double b2_6 = params.bond_length * params.bond_length / 6.0;
    const double m = static_cast<double>(diffusion.lattice().size());
    const int total = plan.total_steps();
    const auto fwd = plan.sequence(Direction::forward);
    const auto bwd = plan.sequence(Direction::backward);

    // delta q_{j+1} = a_j delta q_j - (ds_j / 2)(a_j + 1) delta V, delta q_0 = 0
    const auto linear_history = [&](const std::vector<ContourStep> &steps, double k2, std::vector<double> &out) {
        out.assign(static_cast<std::size_t>(total) + 1, 0.0);
        for (int j = 0; j < total; ++j) {
            const double ds = steps[static_cast<std::size_t>(j)].ds;
            const double a = std::exp(-b2_6 * ds * k2);
            out[static_cast<std::size_t>(j) + 1] = a * out[static_cast<std::size_t>(j)] - 0.5 * ds * (a + 1.0);
        }
    };

    std::vector<double> out;
    out.reserve(diffusion.k_squared().size());
    std::vector<double> dq_f, dq_b;
    for (double k2 : diffusion.k_squared()) {
        if (k2 == 0.0) {
            out.push_back(0.0);
            continue;
        }
        linear_history(fwd, k2, dq_f);
        linear_history(bwd, k2, dq_b);
        double di = 0.0;
        for (int j = 0; j <= total; ++j) {
            const bool in_a = j <= plan.steps_a;
            const bool in_b = j >= plan.steps_a;
            double weight = 0.0;
            if (in_a) weight += (j == 0 || j == plan.steps_a) ? 0.5 * plan.ds_a : plan.ds_a;
            if (in_b) weight += (j == plan.steps_a || j == total) ? 0.5 * plan.ds_b : plan.ds_b;
            di += weight * (dq_f[static_cast<std::size_t>(j)] + dq_b[static_cast<std::size_t>(total - j)]);
        }
        const double response = -params.beta * di / params.n_segments;
        out.push_back(1.0 / (m * response));
    }
    return out;
}

/// Per-run solver buffers: FFT plans, contour plan and the pressure
/// preconditioner. Not shareable between threads.
struct Workspace {
    SpectralDiffusion diffusion;
    ContourPlan plan;
    std::vector<double> preconditioner;

    Workspace(const MaterialParams &params, const SimConfig &config)
        : diffusion(config.lattice), plan(ContourPlan::make(params, config.contour_steps)) {
        preconditioner = pressure_preconditioner(params, plan, diffusion);
    }
};

/// Simple-mixing relaxation of the mean fields toward their targets
///   V_A = chi phi_B + gamma,  V_B = chi phi_A + gamma.
/// gamma moves by kappa P[phi_A + phi_B - 1], P the inverse melt response,
/// and that increment is carried into both potentials unmixed; only the
/// exchange part relaxes at rate lambda. Returns the residual: the max-norm
/// of the potential changes, or the incompressibility defect if larger.
inline double update_fields(FieldState &state, const MaterialParams &params, const SimConfig &config,
                            Workspace &work) {
    const std::size_t m = state.w_a.size();
    const double lambda = config.mixing_rate;
    const double kappa = config.incompressibility_rate;

    Field dgamma(m);
    double max_defect = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        dgamma[i] = state.phi_a[i] + state.phi_b[i] - 1.0;
        max_defect = std::max(max_defect, std::abs(dgamma[i]));
    }
    if (max_defect > 0.0) {
        work.diffusion.apply(dgamma, work.preconditioner);
    } else {
        std::fill(dgamma.begin(), dgamma.end(), 0.0);
    }

    double residual = max_defect;
    for (std::size_t i = 0; i < m; ++i) {
        const double dg = kappa * dgamma[i];
        const double target_a = params.chi * state.phi_b[i] + state.gamma[i];
        const double target_b = params.chi * state.phi_a[i] + state.gamma[i];
        const double da = lambda * (target_a - state.w_a[i]) + dg;
        const double db = lambda * (target_b - state.w_b[i]) + dg;
        state.w_a[i] += da;
        state.w_b[i] += db;
        state.gamma[i] += dg;
        residual = std::max({residual, std::abs(da), std::abs(db)});
    }
    return residual;
}

inline double update_fields(FieldState &state, const MaterialParams &params, const SimConfig &config) {
    Workspace work(params, config);
    return update_fields(state, params, config, work);
}

/// One self-consistency pass: propagators and densities from the current
/// fields, then a field update. Returns the residual.
inline double iterate_once(FieldState &state, const MaterialParams &params, const SimConfig &config, Workspace &work) {
    const Propagator fwd = solve_propagator(state.w_a, state.w_b, work.plan, Direction::forward, params, work.diffusion);
    const Propagator bwd = solve_propagator(state.w_a, state.w_b, work.plan, Direction::backward, params, work.diffusion);
    auto [phi_a, phi_b] = compute_density(fwd, bwd, work.plan, params);
    state.phi_a = std::move(phi_a);
    state.phi_b = std::move(phi_b);
    return update_fields(state, params, config, work);
}

/// Iterates from a prepared field state until the residual drops below
/// tolerance or the iteration budget is spent.
inline Microstructure run_scft(const MaterialParams &params, const SimConfig &config, FieldState state) {
    params.validate();
    config.validate();
    if (state.w_a.size() != config.lattice.size()) throw InvalidArgument("initial state does not match the lattice");
    Workspace work(params, config);

    Microstructure out;
    out.lattice = config.lattice;
    out.params = params;
    out.seed = config.seed;
    std::vector<double> trace;
    for (int it = 1; it <= config.max_iterations; ++it) {
        double residual;
        try {
            residual = iterate_once(state, params, config, work);
        } catch (const Error &e) {
            throw DivergedError("SCFT diverged at iteration " + std::to_string(it) + ": " + e.what(), std::move(trace));
        }
        trace.push_back(residual);
        out.iterations_used = it;
        out.residual = residual;
        if (!std::isfinite(residual) || residual > config.divergence_threshold) {
            throw DivergedError("SCFT diverged at iteration " + std::to_string(it), std::move(trace));
        }
        if (residual <= config.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.phi_a = std::move(state.phi_a);
    return out;
}

inline Microstructure run_scft(const MaterialParams &params, SimConfig config, std::uint64_t seed) {
    config.seed = seed;
    return run_scft(params, config, init_fields(params, config));
}

}  // namespace qerc::scft
