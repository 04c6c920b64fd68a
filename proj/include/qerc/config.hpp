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

// Run configuration shared by every subcommand, with a TOML-style text form.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qerc/classifier.hpp"
#include "qerc/dataset.hpp"
#include "qerc/error.hpp"
#include "qerc/featurizer.hpp"
#include "qerc/qreservoir.hpp"
#include "qerc/scft.hpp"

#ifndef QERC_DATA_DIR
#define QERC_DATA_DIR "data"
#endif

namespace qerc::cli {

/// Defaults reproduce the full-scale settings; `desk()` shrinks the grid,
/// seed counts and solver resolution.
struct RunConfig {
    std::string workdir = "qerc_work";
    std::string dataset;  // empty means <workdir>/dataset
    std::string boundary_table = QERC_DATA_DIR "/boundary_table.csv";

    dataset::GridSpec grid;
    dataset::SeedCounts seeds;
    scft::SimConfig sim;
    int threads = static_cast<int>(default_threads());

    int n_qubits = 8;
    std::string variant = "CliffordT";
    std::uint64_t reservoir_seed = 0;
    std::vector<int> shots{2048};
    std::uint64_t shot_seed = 0;
    classify::TrainConfig train;

    int repetitions = 3;
    std::string select;  // empty means components 1..2 N_Q
    int qubits_min = 2;
    int qubits_max = 9;
    std::string downsample = "A";
    bool balance = true;
    std::uint64_t balance_seed = 0;
    std::string predictions;  // predictions CSV consumed by `render`

    static RunConfig desk() {
        RunConfig c;
        c.apply_desk();
        return c;
    }
    void apply_desk() {
        grid = dataset::GridSpec::desk();
        seeds = {6, 3};
        sim.contour_steps = 50;
        sim.max_iterations = 400;
    }

    std::string dataset_dir() const {
        return dataset.empty() ? workdir + "/dataset" : dataset;
    }
    quantum::Variant reservoir_variant() const {
        return quantum::variant_from_name(variant);
    }
    features::ComponentSelection selection() const {
        return select.empty() ? features::ComponentSelection::identity(2 * n_qubits) : features::ComponentSelection::parse(select);
    }
    char downsample_variant() const {
        if (downsample.size() != 1) throw InvalidArgument("downsample variant must be A or B");
        return downsample[0];
    }

    void validate() const {
        grid.validate();
        sim.validate();
        train.validate();
        if (seeds.train < 1 || seeds.test < 1) throw InvalidArgument("seed counts must be >= 1");
        if (threads < 1) throw InvalidArgument("threads must be >= 1");
        quantum::ReservoirSpec{n_qubits, reservoir_variant(), reservoir_seed}.validate();
        if (shots.empty()) throw InvalidArgument("shots list must not be empty");
        for (int s : shots)
            if (s < 0) throw InvalidArgument("shots must be >= 0");
        if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
        if (qubits_min < 2 || qubits_max > quantum::kMaxQubits || qubits_min > qubits_max) {
            throw InvalidArgument("qubit range must satisfy 2 <= min <= max <= 9");
        }
        if (!select.empty() && selection().size() != static_cast<std::size_t>(2 * n_qubits)) {
            throw InvalidArgument("--select must name exactly 2 x n_qubits components");
        }
        dataset::DownsampleSpec::from_variant(downsample_variant());
    }

    bool operator==(const RunConfig &) const = default;
};

/// One configuration key: its text form, its flag and how to copy it.
struct Field {
    std::string key;   // section.name in the config file
    std::string flag;  // long command-line flag
    std::string help;
    std::function<std::string(const RunConfig &)> dump;
    std::function<void(RunConfig &, const std::vector<std::string> &)> parse;
    std::function<CLI::Option *(CLI::App &, RunConfig &)> bind;
    std::function<void(const RunConfig &, RunConfig &)> copy;
};

namespace detail {

inline std::string quote(const std::string &s) {
    return nlohmann::json(s).dump();
}

template <class T>
std::string dump_value(const T &v) {
    if constexpr (std::is_same_v<T, std::string>) {
        return quote(v);
    } else if constexpr (std::is_same_v<T, bool>) {
        return v ? "true" : "false";
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
        return out + "]";
    } else {
        return nlohmann::json(v).dump();
    }
}

template <class T>
T parse_scalar(const std::string &key, const std::string &text) {
    if constexpr (std::is_same_v<T, std::string>) {
        return text;
    } else {
        T out{};
        if (!CLI::detail::lexical_cast(text, out)) throw DataError("config key '" + key + "' has invalid value '" + text + "'");
        return out;
    }
}

template <class T>
T parse_value(const std::string &key, const std::vector<std::string> &inputs) {
    if constexpr (std::is_same_v<T, std::vector<int>>) {
        T out;
        for (const auto &s : inputs) out.push_back(parse_scalar<int>(key, s));
        return out;
    } else {
        if (inputs.size() != 1) throw DataError("config key '" + key + "' expects one value");
        return parse_scalar<T>(key, inputs[0]);
    }
}

}  // namespace detail

template <class T>
Field make_field(std::string key, std::string flag, std::string help, T &(*access)(RunConfig &)) {
    Field f;
    f.key = key;
    f.flag = std::move(flag);
    f.help = std::move(help);
    f.dump = [access](const RunConfig &c) { return detail::dump_value(access(const_cast<RunConfig &>(c))); };
    f.parse = [access, key](RunConfig &c, const std::vector<std::string> &in) { access(c) = detail::parse_value<T>(key, in); };
    f.bind = [access, flag = f.flag, help = f.help](CLI::App &app, RunConfig &c) {
        auto *opt = app.add_option("--" + flag, access(c), help);
        if constexpr (std::is_same_v<T, std::vector<int>>) opt->delimiter(',');
        return opt;
    };
    f.copy = [access](const RunConfig &from, RunConfig &to) { access(to) = access(const_cast<RunConfig &>(from)); };
    return f;
}

#define QERC_FIELD(key, flag, help, expr) make_field(key, flag, help, +[](RunConfig &c) -> auto & { return expr; })

inline const std::vector<Field> &fields() {
    static const std::vector<Field> all = {
        QERC_FIELD("paths.workdir", "workdir", "working directory (env QERC_WORKDIR)", c.workdir),
        QERC_FIELD("paths.dataset", "dataset", "dataset container directory", c.dataset),
        QERC_FIELD("paths.boundary_table", "boundary-table", "order-order boundary CSV", c.boundary_table),
        QERC_FIELD("grid.f_start", "f-start", "first f value", c.grid.f_start),
        QERC_FIELD("grid.f_stop", "f-stop", "last f value", c.grid.f_stop),
        QERC_FIELD("grid.f_step", "f-step", "f spacing", c.grid.f_step),
        QERC_FIELD("grid.chi_start", "chi-start", "first chi value", c.grid.chi_start),
        QERC_FIELD("grid.chi_stop", "chi-stop", "last chi value", c.grid.chi_stop),
        QERC_FIELD("grid.chi_step", "chi-step", "chi spacing", c.grid.chi_step),
        QERC_FIELD("grid.n", "n-segments", "chain length N", c.grid.n_fixed),
        QERC_FIELD("seeds.train", "train-seeds", "training samples per grid point", c.seeds.train),
        QERC_FIELD("seeds.test", "test-seeds", "test samples per grid point", c.seeds.test),
        QERC_FIELD("sim.nx", "nx", "lattice points along x", c.sim.lattice.nx),
        QERC_FIELD("sim.ny", "ny", "lattice points along y", c.sim.lattice.ny),
        QERC_FIELD("sim.lx", "lx", "box length along x", c.sim.lattice.lx),
        QERC_FIELD("sim.ly", "ly", "box length along y", c.sim.lattice.ly),
        QERC_FIELD("sim.contour_steps", "contour-steps", "contour steps per chain", c.sim.contour_steps),
        QERC_FIELD("sim.max_iterations", "max-iterations", "SCFT iteration cap", c.sim.max_iterations),
        QERC_FIELD("sim.mixing_rate", "mixing-rate", "field mixing rate", c.sim.mixing_rate),
        QERC_FIELD("sim.incompressibility_rate", "incompressibility-rate", "pressure field step", c.sim.incompressibility_rate),
        QERC_FIELD("sim.tolerance", "tolerance", "SCFT convergence tolerance", c.sim.tolerance),
        QERC_FIELD("sim.noise_amplitude", "noise-amplitude", "initial field noise", c.sim.noise_amplitude),
        QERC_FIELD("sim.divergence_threshold", "divergence-threshold", "field magnitude treated as divergence",
                   c.sim.divergence_threshold),
        QERC_FIELD("run.threads", "threads", "worker threads", c.threads),
        QERC_FIELD("reservoir.n_qubits", "n-qubits", "reservoir size", c.n_qubits),
        QERC_FIELD("reservoir.variant", "variant", "CliffordT, CliffordOnly or TOnly", c.variant),
        QERC_FIELD("reservoir.seed", "reservoir-seed", "Clifford sampling seed", c.reservoir_seed),
        QERC_FIELD("reservoir.shots", "shots", "shot counts, 0 for exact probabilities", c.shots),
        QERC_FIELD("reservoir.shot_seed", "shot-seed", "shot sampling seed", c.shot_seed),
        QERC_FIELD("train.learning_rate", "lr", "AdaGrad learning rate", c.train.learning_rate),
        QERC_FIELD("train.epochs", "epochs", "training epochs", c.train.epochs),
        QERC_FIELD("train.batch_size", "batch-size", "minibatch size", c.train.batch_size),
        QERC_FIELD("train.adagrad_epsilon", "adagrad-epsilon", "AdaGrad epsilon", c.train.adagrad_epsilon),
        QERC_FIELD("train.l2_normalize", "l2-normalize", "L2-normalize readout inputs", c.train.l2_normalize_inputs),
        QERC_FIELD("train.seed", "train-seed", "minibatch shuffle seed", c.train.seed),
        QERC_FIELD("experiment.repetitions", "repetitions", "repetitions per configuration", c.repetitions),
        QERC_FIELD("experiment.select", "select", "encoded PCA components, e.g. 1-12,15-16", c.select),
        QERC_FIELD("experiment.qubits_min", "qubits-min", "smallest reservoir in a sweep", c.qubits_min),
        QERC_FIELD("experiment.qubits_max", "qubits-max", "largest reservoir in a sweep", c.qubits_max),
        QERC_FIELD("experiment.downsample", "downsample", "training thinning variant A or B", c.downsample),
        QERC_FIELD("experiment.balance", "balance", "equalize class counts after thinning", c.balance),
        QERC_FIELD("experiment.balance_seed", "balance-seed", "class balancing seed", c.balance_seed),
        QERC_FIELD("experiment.predictions", "predictions", "predictions CSV to render and diff", c.predictions),
    };
    return all;
}

#undef QERC_FIELD

inline std::string to_text(const RunConfig &c) {
    std::string out, section;
    for (const auto &f : fields()) {
        const auto dot = f.key.find('.');
        const auto sec = f.key.substr(0, dot);
        if (sec != section) {
            out += (section.empty() ? "" : "\n") + ("[" + sec + "]\n");
            section = sec;
        }
        out += f.key.substr(dot + 1) + " = " + f.dump(c) + "\n";
    }
    return out;
}

/// Overlays the keys present in `text` onto `base`.
inline RunConfig parse_text(const std::string &text, RunConfig base = {}) {
    std::istringstream in(text);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_config(in);
    } catch (const CLI::Error &e) {
        throw DataError(std::string("config parse error: ") + e.what());
    }
    for (const auto &item : items) {
        const auto name = item.fullname();
        if (item.name == "++" || item.name == "--") continue;  // section markers
        auto it = std::find_if(fields().begin(), fields().end(), [&](const Field &f) { return f.key == name; });
        if (it == fields().end()) throw DataError("unknown config key '" + name + "'");
        it->parse(base, item.inputs);
    }
    return base;
}

inline nlohmann::json to_json(const RunConfig &c) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto &f : fields()) j[f.key] = nlohmann::json::parse(f.dump(c));
    return j;
}

}  // namespace qerc::cli
