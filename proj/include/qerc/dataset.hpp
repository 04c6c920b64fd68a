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

// Grid enumeration, seeded SCFT generation, labels, splits, thinning and
// class balancing, and the on-disk container (float32 images + JSON manifest).

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "qerc/error.hpp"
#include "qerc/io.hpp"
#include "qerc/labeler.hpp"
#include "qerc/parallel.hpp"
#include "qerc/scft.hpp"

namespace qerc::dataset {

using nlohmann::json;

inline double round12(double v) {
    return std::round(v * 1e12) / 1e12;
}

inline std::vector<double> axis_values(double start, double stop, double step, const char *name) {
    if (!(step > 0.0) || !(stop >= start)) throw InvalidArgument(std::string(name) + " axis needs step > 0 and stop >= start");
    const double span = (stop - start) / step;
    const long n = std::lround(span);
    if (std::abs(span - static_cast<double>(n)) > 1e-9 * std::max(1.0, span)) {
        throw InvalidArgument(std::string(name) + " step does not divide the range");
    }
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) out.push_back(round12(start + static_cast<double>(i) * step));
    return out;
}

struct GridSpec {
    double f_start = 0.3;
    double f_stop = 0.5;
    double f_step = 0.0125;
    double chi_start = 0.1;
    double chi_stop = 1.0;
    double chi_step = 0.1;
    int n_fixed = 25;

    /// 5 x 4 points: f in {0.3, ..., 0.5}, chi N in {10, 15, 20, 25}.
    static GridSpec desk() {
        return {0.3, 0.5, 0.05, 0.4, 1.0, 0.2, 25};
    }

    std::vector<double> f_values() const {
        return axis_values(f_start, f_stop, f_step, "f");
    }
    std::vector<double> chi_values() const {
        return axis_values(chi_start, chi_stop, chi_step, "chi");
    }
    std::vector<double> chi_n_values() const {
        auto v = chi_values();
        for (auto &x : v) x = round12(x * n_fixed);
        return v;
    }
    void validate() const {
        if (n_fixed < 1) throw InvalidArgument("N must be positive");
        for (double f : f_values())
            if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("grid f values must lie in (0, 1)");
        for (double c : chi_values())
            if (c < 0.0) throw InvalidArgument("grid chi values must be non-negative");
    }
    bool operator==(const GridSpec &) const = default;
};

struct GridPoint {
    int f_index;
    int chi_index;
    double f;
    double chi;
    double chi_n;
};

/// Row-major: f outer, chi inner.
inline std::vector<GridPoint> build_grid(const GridSpec &spec) {
    spec.validate();
    const auto fs = spec.f_values();
    const auto chis = spec.chi_values();
    const auto chins = spec.chi_n_values();
    std::vector<GridPoint> out;
    for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = 0; j < chis.size(); ++j)
            out.push_back({static_cast<int>(i), static_cast<int>(j), fs[i], chis[j], chins[j]});
    return out;
}

enum class Split : std::uint8_t { train = 0, test = 1 };

inline std::string_view split_name(Split s) {
    return s == Split::train ? "train" : "test";
}

inline Split split_from_name(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw DataError("unknown split '" + std::string(s) + "'");
}

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t sample_seed(int f_index, int chi_index, Split split, int replica) {
    std::uint64_t h = mix64(0x71657263ULL ^ static_cast<std::uint64_t>(f_index));
    h = mix64(h ^ static_cast<std::uint64_t>(chi_index));
    h = mix64(h ^ static_cast<std::uint64_t>(split));
    return mix64(h ^ static_cast<std::uint64_t>(replica));
}

struct SeedCounts {
    int train = 24;
    int test = 10;
    bool operator==(const SeedCounts &) const = default;
};

struct Sample {
    int f_index = 0;
    int chi_index = 0;
    double f = 0.0;
    double chi_n = 0.0;
    Split split = Split::train;
    int replica = 0;
    std::uint64_t seed = 0;
    PhaseLabel label = PhaseLabel::disordered;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    std::int64_t image_index = -1;
    std::string sha256;

    auto key() const {
        return std::tuple(f_index, chi_index, split, replica, seed);
    }
};

struct FailedRun {
    int f_index;
    int chi_index;
    Split split;
    int replica;
    std::uint64_t seed;
    std::string message;
};

struct DownsampleSpec {
    std::vector<double> omit_f;
    std::vector<double> omit_chi_n;
    char variant = '-';

    /// Omits f = 0.3125 + 0.025 n (n = 0..7) and chi N = 2.5 + 5 n.
    static DownsampleSpec variant_a() {
        DownsampleSpec s{{}, {2.5, 7.5, 12.5, 17.5, 22.5}, 'A'};
        for (int n = 0; n < 8; ++n) s.omit_f.push_back(round12(0.3125 + 0.025 * n));
        return s;
    }
    /// Same f rows, chi N = 5 + 5 n.
    static DownsampleSpec variant_b() {
        DownsampleSpec s = variant_a();
        s.omit_chi_n = {5.0, 10.0, 15.0, 20.0, 25.0};
        s.variant = 'B';
        return s;
    }
    static DownsampleSpec from_variant(char v) {
        if (v == 'A' || v == 'a') return variant_a();
        if (v == 'B' || v == 'b') return variant_b();
        throw InvalidArgument(std::string("unknown downsample variant '") + v + "'");
    }
};

struct BalanceSpec {
    std::uint64_t seed = 0;
    int per_class = 0;
};

struct Manifest {
    int version = 1;
    GridSpec grid;
    SeedCounts seeds;
    scft::SimConfig sim;
    scft::MaterialParams material;
    std::string boundary_sha256;
    std::string images_file = "images.f32";
    std::string images_sha256;
    int image_nx = 64;
    int image_ny = 64;
    std::vector<Sample> samples;
    std::vector<FailedRun> failures;
    std::optional<DownsampleSpec> downsample;
    std::optional<BalanceSpec> balance;

    std::size_t count(Split s) const {
        return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [s](const Sample &x) { return x.split == s; }));
    }
    std::vector<const Sample *> split(Split s) const {
        std::vector<const Sample *> out;
        for (const auto &x : samples)
            if (x.split == s) out.push_back(&x);
        return out;
    }
    std::array<std::size_t, kNumPhases> class_counts(Split s) const {
        std::array<std::size_t, kNumPhases> out{};
        for (const auto &x : samples)
            if (x.split == s) ++out[static_cast<std::size_t>(phase_code(x.label))];
        return out;
    }
};

struct Dataset {
    Manifest manifest;
    std::vector<float> images;

    std::size_t pixels() const {
        return static_cast<std::size_t>(manifest.image_nx) * static_cast<std::size_t>(manifest.image_ny);
    }
    std::span<const float> image(const Sample &s) const {
        if (s.image_index < 0) throw DataError("sample has no image");
        return std::span<const float>(images).subspan(static_cast<std::size_t>(s.image_index) * pixels(), pixels());
    }
};

// JSON -----------------------------------------------------------------------

inline void to_json(json &j, const GridSpec &g) {
    j = json{{"f_start", g.f_start},     {"f_stop", g.f_stop},     {"f_step", g.f_step}, {"chi_start", g.chi_start},
             {"chi_stop", g.chi_stop}, {"chi_step", g.chi_step}, {"n_fixed", g.n_fixed}};
}
inline void from_json(const json &j, GridSpec &g) {
    j.at("f_start").get_to(g.f_start);
    j.at("f_stop").get_to(g.f_stop);
    j.at("f_step").get_to(g.f_step);
    j.at("chi_start").get_to(g.chi_start);
    j.at("chi_stop").get_to(g.chi_stop);
    j.at("chi_step").get_to(g.chi_step);
    j.at("n_fixed").get_to(g.n_fixed);
}

inline json sim_to_json(const scft::SimConfig &c) {
    return json{{"nx", c.lattice.nx},
                {"ny", c.lattice.ny},
                {"lx", c.lattice.lx},
                {"ly", c.lattice.ly},
                {"contour_steps", c.contour_steps},
                {"max_iterations", c.max_iterations},
                {"mixing_rate", c.mixing_rate},
                {"incompressibility_rate", c.incompressibility_rate},
                {"tolerance", c.tolerance},
                {"noise_amplitude", c.noise_amplitude},
                {"divergence_threshold", c.divergence_threshold}};
}
inline scft::SimConfig sim_from_json(const json &j) {
    scft::SimConfig c;
    j.at("nx").get_to(c.lattice.nx);
    j.at("ny").get_to(c.lattice.ny);
    j.at("lx").get_to(c.lattice.lx);
    j.at("ly").get_to(c.lattice.ly);
    j.at("contour_steps").get_to(c.contour_steps);
    j.at("max_iterations").get_to(c.max_iterations);
    j.at("mixing_rate").get_to(c.mixing_rate);
    j.at("incompressibility_rate").get_to(c.incompressibility_rate);
    j.at("tolerance").get_to(c.tolerance);
    j.at("noise_amplitude").get_to(c.noise_amplitude);
    j.at("divergence_threshold").get_to(c.divergence_threshold);
    return c;
}

inline json manifest_to_json(const Manifest &m) {
    json samples = json::array();
    for (const auto &s : m.samples) {
        samples.push_back({{"f_index", s.f_index},
                           {"chi_index", s.chi_index},
                           {"f", s.f},
                           {"chi_n", s.chi_n},
                           {"split", split_name(s.split)},
                           {"replica", s.replica},
                           {"seed", s.seed},
                           {"label", phase_code(s.label)},
                           {"converged", s.converged},
                           {"iterations", s.iterations},
                           {"residual", s.residual},
                           {"image_index", s.image_index},
                           {"sha256", s.sha256}});
    }
    json failures = json::array();
    for (const auto &f : m.failures) {
        failures.push_back({{"f_index", f.f_index},
                            {"chi_index", f.chi_index},
                            {"split", split_name(f.split)},
                            {"replica", f.replica},
                            {"seed", f.seed},
                            {"message", f.message}});
    }
    json j{{"version", m.version},
           {"grid", m.grid},
           {"seeds", {{"train", m.seeds.train}, {"test", m.seeds.test}}},
           {"sim", sim_to_json(m.sim)},
           {"material", {{"n_segments", m.material.n_segments}, {"bond_length", m.material.bond_length}, {"beta", m.material.beta}}},
           {"boundary_sha256", m.boundary_sha256},
           {"images", {{"file", m.images_file}, {"sha256", m.images_sha256}, {"nx", m.image_nx}, {"ny", m.image_ny}}},
           {"samples", samples},
           {"failures", failures},
           {"downsample", nullptr},
           {"balance", nullptr}};
    if (m.downsample) {
        j["downsample"] = {{"variant", std::string(1, m.downsample->variant)},
                           {"omit_f", m.downsample->omit_f},
                           {"omit_chi_n", m.downsample->omit_chi_n}};
    }
    if (m.balance) j["balance"] = {{"seed", m.balance->seed}, {"per_class", m.balance->per_class}};
    return j;
}

inline Manifest manifest_from_json(const json &j) {
    try {
        Manifest m;
        j.at("version").get_to(m.version);
        if (m.version != 1) throw DataError("unsupported manifest version " + std::to_string(m.version));
        j.at("grid").get_to(m.grid);
        j.at("seeds").at("train").get_to(m.seeds.train);
        j.at("seeds").at("test").get_to(m.seeds.test);
        m.sim = sim_from_json(j.at("sim"));
        j.at("material").at("n_segments").get_to(m.material.n_segments);
        j.at("material").at("bond_length").get_to(m.material.bond_length);
        j.at("material").at("beta").get_to(m.material.beta);
        j.at("boundary_sha256").get_to(m.boundary_sha256);
        const auto &im = j.at("images");
        im.at("file").get_to(m.images_file);
        im.at("sha256").get_to(m.images_sha256);
        im.at("nx").get_to(m.image_nx);
        im.at("ny").get_to(m.image_ny);
        for (const auto &s : j.at("samples")) {
            Sample x;
            s.at("f_index").get_to(x.f_index);
            s.at("chi_index").get_to(x.chi_index);
            s.at("f").get_to(x.f);
            s.at("chi_n").get_to(x.chi_n);
            x.split = split_from_name(s.at("split").get<std::string>());
            s.at("replica").get_to(x.replica);
            s.at("seed").get_to(x.seed);
            x.label = phase_from_code(s.at("label").get<int>());
            s.at("converged").get_to(x.converged);
            s.at("iterations").get_to(x.iterations);
            s.at("residual").get_to(x.residual);
            s.at("image_index").get_to(x.image_index);
            s.at("sha256").get_to(x.sha256);
            m.samples.push_back(std::move(x));
        }
        for (const auto &f : j.at("failures")) {
            m.failures.push_back({f.at("f_index").get<int>(), f.at("chi_index").get<int>(),
                                  split_from_name(f.at("split").get<std::string>()), f.at("replica").get<int>(),
                                  f.at("seed").get<std::uint64_t>(), f.at("message").get<std::string>()});
        }
        if (!j.at("downsample").is_null()) {
            const auto &d = j.at("downsample");
            DownsampleSpec spec;
            spec.variant = d.at("variant").get<std::string>().at(0);
            d.at("omit_f").get_to(spec.omit_f);
            d.at("omit_chi_n").get_to(spec.omit_chi_n);
            m.downsample = spec;
        }
        if (!j.at("balance").is_null()) {
            m.balance = BalanceSpec{j.at("balance").at("seed").get<std::uint64_t>(), j.at("balance").at("per_class").get<int>()};
        }
        return m;
    } catch (const json::exception &e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
}

inline std::string manifest_text(const Manifest &m) {
    return manifest_to_json(m).dump(2) + "\n";
}

// Container --------------------------------------------------------------------

inline void save(const Dataset &d, const std::filesystem::path &dir) {
    io::write_floats(dir / d.manifest.images_file, d.images);
    io::write_text(dir / "manifest.json", manifest_text(d.manifest));
}

inline Manifest load_manifest(const std::filesystem::path &dir) {
    const auto path = dir / "manifest.json";
    if (!std::filesystem::exists(path)) throw DataError("no dataset at " + dir.string() + " (run `generate` first)");
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::exception &e) {
        throw DataError("cannot parse " + path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

inline Dataset load(const std::filesystem::path &dir, bool verify = true) {
    Dataset d;
    d.manifest = load_manifest(dir);
    d.images = io::read_floats(dir / d.manifest.images_file);
    if (verify && io::sha256_of<float>(d.images) != d.manifest.images_sha256) {
        throw DataError("image container checksum mismatch in " + dir.string());
    }
    const std::size_t n = d.images.size() / std::max<std::size_t>(1, d.pixels());
    for (const auto &s : d.manifest.samples) {
        if (s.image_index < 0 || static_cast<std::size_t>(s.image_index) >= n) throw DataError("sample image index out of range");
    }
    return d;
}

// Generation -------------------------------------------------------------------

/// The sample list of a grid without running any solver: seeds and labels.
inline std::vector<Sample> plan_samples(const GridSpec &grid, const SeedCounts &seeds, const labeler::BoundaryTable &table) {
    if (seeds.train < 0 || seeds.test < 0) throw InvalidArgument("seed counts must be non-negative");
    std::vector<Sample> out;
    for (const auto &p : build_grid(grid)) {
        const PhaseLabel label = labeler::label_point(p.f, p.chi_n, table);
        for (Split split : {Split::train, Split::test}) {
            const int n = split == Split::train ? seeds.train : seeds.test;
            for (int r = 0; r < n; ++r) {
                Sample s;
                s.f_index = p.f_index;
                s.chi_index = p.chi_index;
                s.f = p.f;
                s.chi_n = p.chi_n;
                s.split = split;
                s.replica = r;
                s.seed = sample_seed(p.f_index, p.chi_index, split, r);
                s.label = label;
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

inline std::string table_checksum(const labeler::BoundaryTable &table) {
    std::string text;
    for (const auto &[name, knots] : table.curves)
        for (const auto &k : knots) text += name + "," + json(k.chi_n).dump() + "," + json(k.f).dump() + "\n";
    return io::sha256_hex(text);
}

/// Manifest skeleton with every planned sample, no images attached.
inline Manifest plan_manifest(const GridSpec &grid, const SeedCounts &seeds, const scft::SimConfig &sim,
                              const scft::MaterialParams &material, const labeler::BoundaryTable &table) {
    Manifest m;
    m.grid = grid;
    m.seeds = seeds;
    m.sim = sim;
    m.material = material;
    m.boundary_sha256 = table_checksum(table);
    m.image_nx = sim.lattice.nx;
    m.image_ny = sim.lattice.ny;
    m.samples = plan_samples(grid, seeds, table);
    return m;
}

struct GenerateOptions {
    unsigned threads = default_threads();
    std::function<void(std::size_t done, std::size_t total)> progress;
    /// Samples already present here with a matching key and checksum are reused.
    const Dataset *resume = nullptr;
};

inline Dataset generate_dataset(const GridSpec &grid, const scft::SimConfig &sim, const SeedCounts &seeds,
                                const labeler::BoundaryTable &table, const scft::MaterialParams &material = {},
                                const GenerateOptions &options = {}) {
    sim.validate();
    Manifest plan = plan_manifest(grid, seeds, sim, material, table);
    const std::size_t pixels = sim.lattice.size();
    const std::size_t total = plan.samples.size();

    std::map<decltype(Sample{}.key()), const Sample *> reusable;
    if (options.resume && sim_to_json(options.resume->manifest.sim) == sim_to_json(sim) &&
        options.resume->manifest.material.n_segments == material.n_segments &&
        options.resume->manifest.material.bond_length == material.bond_length &&
        options.resume->manifest.material.beta == material.beta && options.resume->pixels() == pixels) {
        for (const auto &s : options.resume->manifest.samples) reusable[s.key()] = &s;
    }

    std::vector<std::vector<float>> images(total);
    std::vector<std::optional<std::string>> errors(total);
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    parallel_for(total, options.threads, [&](std::size_t i) {
        Sample &s = plan.samples[i];
        if (auto it = reusable.find(s.key()); it != reusable.end()) {
            const auto img = options.resume->image(*it->second);
            if (io::sha256_of<float>(img) == it->second->sha256) {
                images[i].assign(img.begin(), img.end());
                s.converged = it->second->converged;
                s.iterations = it->second->iterations;
                s.residual = it->second->residual;
                s.sha256 = it->second->sha256;
            }
        }
        if (images[i].empty()) {
            scft::MaterialParams p = material;
            p.f = s.f;
            p.chi = s.chi_n / p.n_segments;
            try {
                const auto m = scft::run_scft(p, sim, s.seed);
                images[i].assign(m.phi_a.begin(), m.phi_a.end());
                s.converged = m.converged;
                s.iterations = m.iterations_used;
                s.residual = m.residual;
                s.sha256 = io::sha256_of<float>(images[i]);
            } catch (const NumericalError &e) {
                errors[i] = e.what();
            }
        }
        const std::size_t d = ++done;
        if (options.progress) {
            std::lock_guard lock(progress_mutex);
            options.progress(d, total);
        }
    });

    Dataset out;
    out.manifest = plan;
    out.manifest.samples.clear();
    for (std::size_t i = 0; i < total; ++i) {
        Sample s = plan.samples[i];
        if (errors[i]) {
            out.manifest.failures.push_back({s.f_index, s.chi_index, s.split, s.replica, s.seed, *errors[i]});
            continue;
        }
        s.image_index = static_cast<std::int64_t>(out.manifest.samples.size());
        out.images.insert(out.images.end(), images[i].begin(), images[i].end());
        out.manifest.samples.push_back(std::move(s));
    }
    out.manifest.images_sha256 = io::sha256_of<float>(out.images);
    return out;
}

// Thinning and balancing ---------------------------------------------------------

inline bool on_axis(const std::vector<double> &axis, double v) {
    return std::any_of(axis.begin(), axis.end(), [v](double a) { return std::abs(a - v) < 1e-9; });
}

inline Manifest downsample_training(const Manifest &m, const DownsampleSpec &spec) {
    const auto fs = m.grid.f_values();
    const auto chins = m.grid.chi_n_values();
    for (double f : spec.omit_f)
        if (!on_axis(fs, f)) throw InvalidArgument("downsample f=" + std::to_string(f) + " is not on the grid");
    for (double c : spec.omit_chi_n)
        if (!on_axis(chins, c)) throw InvalidArgument("downsample chiN=" + std::to_string(c) + " is not on the grid");
    Manifest out = m;
    out.samples.clear();
    for (const auto &s : m.samples) {
        if (s.split == Split::train && (on_axis(spec.omit_f, s.f) || on_axis(spec.omit_chi_n, s.chi_n))) continue;
        out.samples.push_back(s);
    }
    if (out.count(Split::train) == 0) throw DataError("downsampling removed every training sample");
    out.downsample = spec;
    return out;
}

/// Grid points (f index, chi index) that still carry training samples.
inline std::size_t training_points(const Manifest &m) {
    std::vector<std::pair<int, int>> pts;
    for (const auto &s : m.samples)
        if (s.split == Split::train) pts.emplace_back(s.f_index, s.chi_index);
    std::sort(pts.begin(), pts.end());
    return static_cast<std::size_t>(std::unique(pts.begin(), pts.end()) - pts.begin());
}

/// Equalizes training class counts to the smallest class by seeded uniform
/// subsampling without replacement. Test samples are untouched.
inline Manifest balance_classes(const Manifest &m, std::uint64_t seed) {
    std::array<std::vector<std::size_t>, kNumPhases> by_class;
    for (std::size_t i = 0; i < m.samples.size(); ++i)
        if (m.samples[i].split == Split::train) by_class[static_cast<std::size_t>(phase_code(m.samples[i].label))].push_back(i);
    std::size_t least = m.samples.size();
    for (int c = 0; c < kNumPhases; ++c) {
        if (by_class[static_cast<std::size_t>(c)].empty()) {
            throw DataError("cannot balance: no training samples labelled " + std::string(phase_name(phase_from_code(c))));
        }
        least = std::min(least, by_class[static_cast<std::size_t>(c)].size());
    }
    std::mt19937_64 rng(seed);
    std::vector<bool> keep(m.samples.size(), false);
    for (auto &members : by_class) {
        for (std::size_t i = 0; i < least; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
            std::swap(members[i], members[pick(rng)]);
            keep[members[i]] = true;
        }
    }
    Manifest out = m;
    out.samples.clear();
    for (std::size_t i = 0; i < m.samples.size(); ++i)
        if (m.samples[i].split == Split::test || keep[i]) out.samples.push_back(m.samples[i]);
    out.balance = BalanceSpec{seed, static_cast<int>(least)};
    return out;
}

}  // namespace qerc::dataset
