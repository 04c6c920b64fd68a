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

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "qerc/error.hpp"

namespace qerc {

/// A periodic 2D lattice. Site (ix, iy) is stored at ix * ny + iy.
struct Lattice {
    int nx = 64;
    int ny = 64;
    double lx = 16.0;
    double ly = 16.0;

    std::size_t size() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(ix) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(iy);
    }
    bool operator==(const Lattice &) const = default;
};

inline bool is_power_of_two(int n) {
    return n > 0 && (n & (n - 1)) == 0;
}

namespace detail {

// FFTW's planner is not reentrant.
inline std::mutex &fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void *p) const {
        fftw_free(p);
    }
};

struct FftwPlanDestroy {
    void operator()(fftw_plan p) const {
        if (p != nullptr) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(p);
        }
    }
};

using FftwPlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDestroy>;

}  // namespace detail

/// Applies exp(factor * laplacian) to a real periodic field with a
/// real-to-complex FFT round trip. Work buffers and plans are owned by the
/// instance, so one instance per thread.
class SpectralDiffusion {
   public:
    explicit SpectralDiffusion(const Lattice &lattice)
        : lattice_(lattice), n_complex_(static_cast<std::size_t>(lattice.nx) * (lattice.ny / 2 + 1)) {
        if (!is_power_of_two(lattice.nx) || !is_power_of_two(lattice.ny)) {
            throw InvalidArgument("lattice dimensions must be powers of two");
        }
        real_.reset(static_cast<double *>(fftw_malloc(sizeof(double) * lattice.size())));
        spectral_.reset(static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * n_complex_)));
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            forward_.reset(fftw_plan_dft_r2c_2d(lattice.nx, lattice.ny, real_.get(), spectral_.get(), FFTW_ESTIMATE));
            backward_.reset(fftw_plan_dft_c2r_2d(lattice.nx, lattice.ny, spectral_.get(), real_.get(), FFTW_ESTIMATE));
        }
        k_squared_.resize(n_complex_);
        const int nyc = lattice.ny / 2 + 1;
        for (int ix = 0; ix < lattice.nx; ++ix) {
            const int mx = ix <= lattice.nx / 2 ? ix : ix - lattice.nx;
            const double kx = 2.0 * std::numbers::pi * mx / lattice.lx;
            for (int iy = 0; iy < nyc; ++iy) {
                const double ky = 2.0 * std::numbers::pi * iy / lattice.ly;
                k_squared_[static_cast<std::size_t>(ix) * nyc + iy] = kx * kx + ky * ky;
            }
        }
    }

    SpectralDiffusion(const SpectralDiffusion &) = delete;
    SpectralDiffusion &operator=(const SpectralDiffusion &) = delete;

    const Lattice &lattice() const {
        return lattice_;
    }

    /// Squared wavenumbers of the half-spectrum, in FFTW r2c layout.
    std::span<const double> k_squared() const {
        return k_squared_;
    }

    /// Fourier multiplier exp(-factor * k^2) with the 1/M normalization of the
    /// inverse transform folded in.
    std::vector<double> kernel(double factor) const {
        std::vector<double> out(n_complex_);
        const double norm = 1.0 / static_cast<double>(lattice_.size());
        for (std::size_t i = 0; i < n_complex_; ++i) {
            out[i] = std::exp(-factor * k_squared_[i]) * norm;
        }
        return out;
    }

    void apply(std::span<double> field, std::span<const double> kernel) {
        std::copy(field.begin(), field.end(), real_.get());
        fftw_execute(forward_.get());
        for (std::size_t i = 0; i < n_complex_; ++i) {
            spectral_.get()[i][0] *= kernel[i];
            spectral_.get()[i][1] *= kernel[i];
        }
        fftw_execute(backward_.get());
        std::copy(real_.get(), real_.get() + lattice_.size(), field.begin());
    }

   private:
    Lattice lattice_;
    std::size_t n_complex_;
    std::unique_ptr<double, detail::FftwFree> real_;
    std::unique_ptr<fftw_complex, detail::FftwFree> spectral_;
    detail::FftwPlanPtr forward_;
    detail::FftwPlanPtr backward_;
    std::vector<double> k_squared_;
};

}  // namespace qerc
