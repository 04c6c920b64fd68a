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

// Subcommands, experiment records and the exit-code contract of `qerc`.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "qerc/config.hpp"
#include "qerc/dataset.hpp"
#include "qerc/io.hpp"
#include "qerc/labeler.hpp"
#include "qerc/phase_viz.hpp"
#include "qerc/pipeline.hpp"

namespace qerc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// One JSON line in <workdir>/records.jsonl. The checksum covers everything
/// except the timings, so replays of the same config compare equal.
struct ExperimentRecord {
    std::string command;
    json config;
    json inputs = json::object();
    json metrics = json::object();
    json artifacts = json::object();
    json timings = json::object();

    json body() const {
        return {{"command", command}, {"config", config}, {"inputs", inputs}, {"metrics", metrics}, {"artifacts", artifacts}};
    }
    std::string checksum() const {
        return io::sha256_hex(body().dump());
    }
    json to_json() const {
        json j = body();
        j["timings"] = timings;
        j["checksum"] = checksum();
        return j;
    }
};

class Stopwatch {
   public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

   private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Shared state of one invocation.
struct Context {
    RunConfig config;
    std::ostream *out = &std::cout;
    std::ostream *err = &std::cerr;

    fs::path workdir() const {
        return config.workdir;
    }
    fs::path dir(const std::string &name) const {
        fs::create_directories(workdir() / name);
        return workdir() / name;
    }
    labeler::BoundaryTable table() const {
        return labeler::BoundaryTable::load_csv(config.boundary_table);
    }
    ExperimentRecord record(const std::string &command) const {
        ExperimentRecord r;
        r.command = command;
        r.config = to_json(config);
        return r;
    }
    void write(const ExperimentRecord &r) const {
        fs::create_directories(workdir());
        io::append_line(workdir() / "records.jsonl", r.to_json().dump());
        *out << command_summary(r) << "\n";
    }
    static std::string command_summary(const ExperimentRecord &r) {
        std::string s = r.command;
        if (r.metrics.contains("test_accuracy")) s += " test_accuracy=" + viz::fmt(r.metrics["test_accuracy"].get<double>());
        if (r.metrics.contains("mean_test_accuracy")) {
            s += " mean_test_accuracy=" + viz::fmt(r.metrics["mean_test_accuracy"].get<double>());
        }
        return s + " checksum=" + r.checksum().substr(0, 12);
    }
};

inline json dataset_inputs(const dataset::Dataset &d) {
    return {{"manifest_sha256", io::sha256_hex(dataset::manifest_text(d.manifest))},
            {"images_sha256", d.manifest.images_sha256},
            {"boundary_sha256", d.manifest.boundary_sha256}};
}

inline dataset::Dataset load_dataset(const Context &ctx) {
    return dataset::load(ctx.config.dataset_dir(), true);
}

inline json run_metrics(const pipeline::RunResult &r) {
    return {{"train_accuracy", r.train.accuracy},
            {"train_loss", r.train.epochs.empty() ? r.train.loss : r.train.epochs.back().loss},
            {"test_accuracy", r.test.accuracy},
            {"test_loss", r.test.loss},
            {"confusion", r.test.to_json()["confusion"]}};
}

inline double mean(const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline pipeline::QercConfig qerc_config(const RunConfig &c, int n_qubits, quantum::Variant variant, int shots) {
    pipeline::QercConfig q;
    q.reservoir = {n_qubits, variant, c.reservoir_seed};
    q.shots = shots;
    q.shot_seed = c.shot_seed;
    q.train = c.train;
    q.threads = static_cast<unsigned>(c.threads);
    return q;
}

inline std::string pca_checksum(const features::PcaModel &pca) {
    return io::sha256_of<double>(std::span<const double>(pca.components.data(), static_cast<std::size_t>(pca.components.size())));
}

inline std::string predictions_csv(std::span<const viz::Prediction> preds) {
    std::string out = "f_index,chi_index,label\n";
    for (const auto &p : preds) out += std::to_string(p.f_index) + "," + std::to_string(p.chi_index) + "," + std::string(phase_name(p.label)) + "\n";
    return out;
}

inline std::vector<viz::Prediction> parse_predictions_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "f_index,chi_index,label") throw DataError("bad predictions header");
    std::vector<viz::Prediction> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string fi, ci, label;
        if (!std::getline(row, fi, ',') || !std::getline(row, ci, ',') || !std::getline(row, label)) throw DataError("malformed predictions row");
        int code = -1;
        for (int k = 0; k < kNumPhases; ++k)
            if (phase_name(phase_from_code(k)) == label) code = k;
        if (code < 0) throw DataError("unknown phase label '" + label + "'");
        try {
            out.push_back({std::stoi(fi), std::stoi(ci), phase_from_code(code)});
        } catch (const std::exception &) {
            throw DataError("non-numeric predictions row");
        }
    }
    return out;
}

/// Predicted diagram: SVG, CSV and raw predictions under `dir/stem.*`.
inline json write_diagram(const dataset::GridSpec &grid, std::span<const viz::Prediction> preds, const fs::path &dir,
                          const std::string &stem, const std::string &title) {
    const auto g = viz::vote_diagram(grid, preds);
    viz::render_phase_diagram(g, dir / (stem + ".svg"), title);
    io::write_text(dir / (stem + ".csv"), viz::diagram_csv(g));
    io::write_text(dir / (stem + "_predictions.csv"), predictions_csv(preds));
    return {{"svg", (dir / (stem + ".svg")).string()},
            {"csv", (dir / (stem + ".csv")).string()},
            {"predictions", (dir / (stem + "_predictions.csv")).string()}};
}

// Subcommands -------------------------------------------------------------------

inline int cmd_generate(Context &ctx) {
    const Stopwatch clock;
    const auto &c = ctx.config;
    const auto table = ctx.table();
    const fs::path dir = c.dataset_dir();
    std::optional<dataset::Dataset> previous;
    if (fs::exists(dir / "manifest.json")) previous = dataset::load(dir, true);

    dataset::GenerateOptions opts;
    opts.threads = static_cast<unsigned>(c.threads);
    opts.resume = previous ? &*previous : nullptr;
    opts.progress = [&](std::size_t done, std::size_t total) {
        if (done == total || done % 10 == 0) *ctx.err << "generate: " << done << "/" << total << "\n";
    };
    scft::MaterialParams material;
    material.n_segments = c.grid.n_fixed;
    const auto d = dataset::generate_dataset(c.grid, c.sim, c.seeds, table, material, opts);
    dataset::save(d, dir);

    auto rec = ctx.record("generate");
    rec.inputs = dataset_inputs(d);
    rec.metrics = {{"train_samples", d.manifest.count(dataset::Split::train)},
                   {"test_samples", d.manifest.count(dataset::Split::test)},
                   {"failures", d.manifest.failures.size()}};
    rec.artifacts = {{"dataset", dir.string()}};
    rec.timings = {{"seconds", clock.seconds()}};
    ctx.write(rec);
    return kOk;
}

inline int cmd_label(Context &ctx) {
    const Stopwatch clock;
    const auto &c = ctx.config;
    const auto table = ctx.table();
    const auto dir = ctx.dir("label");
    std::string labels = "f,chiN,label\n", spinodal = "f,chiN_spinodal\n";
    std::map<std::string, long> counts;
    for (const auto &p : dataset::build_grid(c.grid)) {
        const auto l = labeler::label_point(p.f, p.chi_n, table);
        labels += viz::fmt(p.f) + "," + viz::fmt(p.chi_n) + "," + std::string(phase_name(l)) + "\n";
        ++counts[std::string(phase_name(l))];
    }
    for (double f : c.grid.f_values()) spinodal += viz::fmt(f) + "," + viz::fmt(labeler::spinodal_chiN(f).chi_n, "%.10g") + "\n";
    io::write_text(dir / "labels.csv", labels);
    io::write_text(dir / "spinodal.csv", spinodal);

    auto rec = ctx.record("label");
    rec.inputs = {{"boundary_sha256", dataset::table_checksum(table)}};
    rec.metrics = {{"class_counts", counts}};
    rec.artifacts = {{"labels", (dir / "labels.csv").string()}, {"spinodal", (dir / "spinodal.csv").string()}};
    rec.timings = {{"seconds", clock.seconds()}};
    ctx.write(rec);
    return kOk;
}

inline int cmd_run(Context &ctx) {
    const Stopwatch clock;
    const auto &c = ctx.config;
    const auto d = load_dataset(ctx);
    const auto m = pipeline::collect(d);
    const auto sel = c.selection();
    const auto pca = pipeline::fit_shared_pca(m, std::max(sel.max_index(), 2 * c.n_qubits));
    const auto dir = ctx.dir("run");

    json summary = json::array();
    for (int shots : c.shots) {
        std::vector<double> accs;
        std::vector<viz::Prediction> votes;
        for (int r = 0; r < c.repetitions; ++r) {
            const Stopwatch rep_clock;
            auto q = pipeline::repetition(qerc_config(c, c.n_qubits, c.reservoir_variant(), shots), r);
            q.selection = sel;
            const auto res = pipeline::run_qerc(pca, m, q);
            accs.push_back(res.test.accuracy);
            votes.insert(votes.end(), res.test_predictions.begin(), res.test_predictions.end());

            auto rec = ctx.record("run");
            rec.inputs = dataset_inputs(d);
            rec.inputs["pca_sha256"] = pca_checksum(pca);
            rec.metrics = run_metrics(res);
            rec.metrics["shots"] = shots;
            rec.metrics["repetition"] = r;
            rec.metrics["reservoir_seed"] = q.reservoir.seed;
            rec.metrics["shot_seed"] = q.shot_seed;
            rec.metrics["train_seed"] = q.train.seed;
            rec.timings = {{"seconds", rep_clock.seconds()}};
            ctx.write(rec);
        }
        const std::string stem = "phase_diagram_shots" + std::to_string(shots);
        auto rec = ctx.record("run-summary");
        rec.inputs = dataset_inputs(d);
        rec.metrics = {{"shots", shots}, {"test_accuracies", accs}, {"mean_test_accuracy", mean(accs)}};
        rec.artifacts = write_diagram(d.manifest.grid, votes, dir, stem, "QERC " + std::to_string(c.n_qubits) + " qubits, shots " + std::to_string(shots));
        rec.timings = {{"seconds", clock.seconds()}};
        ctx.write(rec);
    }
    return kOk;
}

struct SweepRow {
    std::string series;
    bool dashed;
    int n_qubits;
    int repetition;
    double accuracy;
};

/// Rows sorted by qubit count; baselines sit at the largest size.
inline std::vector<SweepRow> sweep_rows(std::span<const viz::Series> series) {
    std::vector<SweepRow> rows;
    for (const auto &s : series)
        for (const auto &p : s.points)
            for (std::size_t r = 0; r < p.values.size(); ++r) rows.push_back({s.name, s.dashed, p.n_qubits, static_cast<int>(r), p.values[r]});
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow &a, const SweepRow &b) { return a.n_qubits < b.n_qubits; });
    return rows;
}

inline std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "series,dashed,n_qubits,repetition,accuracy\n";
    for (const auto &r : rows)
        out += r.series + "," + (r.dashed ? "1" : "0") + "," + std::to_string(r.n_qubits) + "," + std::to_string(r.repetition) + "," +
               viz::fmt(r.accuracy, "%.17g") + "\n";
    return out;
}

inline int cmd_sweep_qubits(Context &ctx) {
    const Stopwatch clock;
    const auto &c = ctx.config;
    const auto d = load_dataset(ctx);
    const auto m = pipeline::collect(d);
    const int k = 2 * c.qubits_max;
    const auto pca = pipeline::fit_shared_pca(m, k);
    const int shots = c.shots.front();

    viz::Series qerc{"QERC-" + c.variant, false, {}}, pixels{"pixels-standardized", true, {}}, pcs{"pca-features", true, {}};
    for (int n = c.qubits_min; n <= c.qubits_max; ++n) qerc.points.push_back({n, {}});
    pixels.points.push_back({c.qubits_max, {}});
    pcs.points.push_back({c.qubits_max, {}});
    for (int r = 0; r < c.repetitions; ++r) {
        for (int n = c.qubits_min; n <= c.qubits_max; ++n) {
            const auto q = pipeline::repetition(qerc_config(c, n, c.reservoir_variant(), shots), r);
            qerc.points[static_cast<std::size_t>(n - c.qubits_min)].values.push_back(pipeline::run_qerc(pca, m, q).test.accuracy);
        }
        const auto tc = pipeline::repetition(qerc_config(c, c.qubits_max, c.reservoir_variant(), shots), r).train;
        pixels.points[0].values.push_back(pipeline::run_pixel_baseline(m, tc).test.accuracy);
        pcs.points[0].values.push_back(pipeline::run_pca_baseline(pca, m, k, tc).test.accuracy);
        *ctx.err << "sweep-qubits: repetition " << r + 1 << "/" << c.repetitions << "\n";
    }
    const std::vector<viz::Series> series{qerc, pixels, pcs};
    const auto rows = sweep_rows(series);
    const auto dir = ctx.dir("sweep");
    io::write_text(dir / "accuracy.csv", sweep_csv(rows));
    viz::render_accuracy_curve(series, dir / "accuracy.svg");

    auto rec = ctx.record("sweep-qubits");
    rec.inputs = dataset_inputs(d);
    rec.inputs["pca_sha256"] = pca_checksum(pca);
    json per = json::object();
    for (const auto &p : qerc.points) per[std::to_string(p.n_qubits)] = mean(p.values);
    rec.metrics = {{"mean_accuracy_by_qubits", per},
                   {"pixel_baseline_mean", mean(pixels.points[0].values)},
                   {"pca_baseline_mean", mean(pcs.points[0].values)},
                   {"pca_baseline_components", k},
                   {"rows", rows.size()}};
    rec.artifacts = {{"csv", (dir / "accuracy.csv").string()}, {"svg", (dir / "accuracy.svg").string()}};
    rec.timings = {{"seconds", clock.seconds()}};
    ctx.write(rec);
    return kOk;
}

inline int cmd_ablate(Context &ctx) {
    const Stopwatch clock;
    const auto &c = ctx.config;
    const auto d = load_dataset(ctx);
    const auto m = pipeline::collect(d);
    const auto sel = c.selection();
    const auto pca = pipeline::fit_shared_pca(m, std::max(sel.max_index(), 2 * c.n_qubits));
    const auto dir = ctx.dir("ablate");

    std::vector<viz::Panel> panels;
    json means = json::object();
    for (auto v : {quantum::Variant::clifford_t, quantum::Variant::clifford_only, quantum::Variant::t_only}) {
        const Stopwatch vclock;
        std::vector<double> accs;
        std::vector<viz::Prediction> votes;
        for (int r = 0; r < c.repetitions; ++r) {
            auto q = pipeline::repetition(qerc_config(c, c.n_qubits, v, c.shots.front()), r);
            q.selection = sel;
            const auto res = pipeline::run_qerc(pca, m, q);
            accs.push_back(res.test.accuracy);
            votes.insert(votes.end(), res.test_predictions.begin(), res.test_predictions.end());
        }
        const std::string name(quantum::variant_name(v));
        panels.push_back({name, viz::vote_diagram(d.manifest.grid, votes)});
        means[name] = mean(accs);

        auto rec = ctx.record("ablate");
        rec.inputs = dataset_inputs(d);
        rec.inputs["pca_sha256"] = pca_checksum(pca);
        rec.metrics = {{"variant", name}, {"test_accuracies", accs}, {"mean_test_accuracy", mean(accs)}};
        rec.artifacts = write_diagram(d.manifest.grid, votes, dir, "phase_diagram_" + name, name);
        rec.timings = {{"seconds", vclock.seconds()}};
        ctx.write(rec);
    }
    viz::render_panels(panels, dir / "ablation.svg");
    *ctx.out << "ablate: " << means.dump() << "\n";
    return kOk;
}

inline int cmd_shift_components(Context &ctx) {
    const Stopwatch clock;
    const auto &c = ctx.config;
    const auto d = load_dataset(ctx);
    const auto m = pipeline::collect(d);
    const auto sel = c.selection();
    const auto identity = features::ComponentSelection::identity(2 * c.n_qubits);
    const auto pca = pipeline::fit_shared_pca(m, std::max(sel.max_index(), 2 * c.n_qubits));

    std::vector<double> base, shifted, deltas;
    for (int r = 0; r < c.repetitions; ++r) {
        auto q = pipeline::repetition(qerc_config(c, c.n_qubits, c.reservoir_variant(), c.shots.front()), r);
        q.selection = identity;
        base.push_back(pipeline::run_qerc(pca, m, q).test.accuracy);
        q.selection = sel;
        shifted.push_back(pipeline::run_qerc(pca, m, q).test.accuracy);
        deltas.push_back(shifted.back() - base.back());
    }
    auto rec = ctx.record("shift-components");
    rec.inputs = dataset_inputs(d);
    rec.inputs["pca_sha256"] = pca_checksum(pca);
    rec.metrics = {{"selection", sel.str()},
                   {"identity_accuracies", base},
                   {"selection_accuracies", shifted},
                   {"deltas", deltas},
                   {"mean_delta", mean(shifted) - mean(base)},
                   {"mean_test_accuracy", mean(shifted)}};
    rec.timings = {{"seconds", clock.seconds()}};
    ctx.write(rec);
    return kOk;
}

inline int cmd_generalize(Context &ctx) {
    const Stopwatch clock;
    const auto &c = ctx.config;
    const auto d = load_dataset(ctx);
    auto view = dataset::downsample_training(d.manifest, dataset::DownsampleSpec::from_variant(c.downsample_variant()));
    if (c.balance) view = dataset::balance_classes(view, c.balance_seed);
    const auto m = pipeline::collect(d, view);
    const auto sel = c.selection();
    const auto pca = pipeline::fit_shared_pca(m, std::max(sel.max_index(), 2 * c.n_qubits));
    const auto dir = ctx.dir("generalize");

    std::vector<double> accs;
    std::vector<viz::Prediction> votes;
    for (int r = 0; r < c.repetitions; ++r) {
        auto q = pipeline::repetition(qerc_config(c, c.n_qubits, c.reservoir_variant(), c.shots.front()), r);
        q.selection = sel;
        const auto res = pipeline::run_qerc(pca, m, q);
        accs.push_back(res.test.accuracy);
        votes.insert(votes.end(), res.test_predictions.begin(), res.test_predictions.end());
    }
    const std::string stem = std::string("phase_diagram_") + c.downsample_variant();
    auto rec = ctx.record("generalize");
    rec.inputs = dataset_inputs(d);
    rec.inputs["pca_sha256"] = pca_checksum(pca);
    json counts = json::object();
    const auto cc = view.class_counts(dataset::Split::train);
    for (int k = 0; k < kNumPhases; ++k) counts[std::string(phase_name(phase_from_code(k)))] = cc[static_cast<std::size_t>(k)];
    rec.metrics = {{"variant", std::string(1, c.downsample_variant())},
                   {"balanced", c.balance},
                   {"training_points", dataset::training_points(view)},
                   {"training_images", view.count(dataset::Split::train)},
                   {"class_counts", counts},
                   {"test_accuracies", accs},
                   {"mean_test_accuracy", mean(accs)}};
    rec.artifacts = write_diagram(d.manifest.grid, votes, dir, stem, std::string("Thinning ") + c.downsample_variant());
    const auto truth = viz::truth_diagram(d.manifest.grid, ctx.table());
    const std::vector<viz::Panel> panels{{"Truth", truth}, {"Predicted", viz::vote_diagram(d.manifest.grid, votes)}};
    viz::render_panels(panels, dir / (stem + "_panels.svg"));
    rec.artifacts["panels"] = (dir / (stem + "_panels.svg")).string();
    rec.timings = {{"seconds", clock.seconds()}};
    ctx.write(rec);
    return kOk;
}

inline int cmd_render(Context &ctx) {
    const Stopwatch clock;
    const auto &c = ctx.config;
    const auto table = ctx.table();
    const auto dir = ctx.dir("render");
    const auto truth = viz::truth_diagram(c.grid, table);
    viz::render_phase_diagram(truth, dir / "truth.svg", "Ground truth");
    viz::render_phase_diagram_png(truth, dir / "truth.png");
    io::write_text(dir / "truth.csv", viz::diagram_csv(truth));

    auto rec = ctx.record("render");
    rec.inputs = {{"boundary_sha256", dataset::table_checksum(table)}};
    rec.artifacts = {{"svg", (dir / "truth.svg").string()}, {"png", (dir / "truth.png").string()}, {"csv", (dir / "truth.csv").string()}};
    if (!c.predictions.empty()) {
        const auto text = io::read_text(c.predictions);
        const auto preds = parse_predictions_csv(text);
        const auto predicted = viz::vote_diagram(c.grid, preds);
        const auto report = viz::diff_diagram(predicted, truth);
        viz::render_phase_diagram(predicted, dir / "predicted.svg", "Predicted");
        io::write_text(dir / "mismatches.csv", report.csv());
        rec.inputs["predictions_sha256"] = io::sha256_hex(text);
        rec.metrics = {{"mismatches", report.mismatches.size()}, {"compared", report.compared}, {"cell_accuracy", report.cell_accuracy()}};
        rec.artifacts["predicted"] = (dir / "predicted.svg").string();
        rec.artifacts["mismatches"] = (dir / "mismatches.csv").string();
    }
    rec.timings = {{"seconds", clock.seconds()}};
    ctx.write(rec);
    return kOk;
}

// Entry point --------------------------------------------------------------------

/// Precedence: flags, then QERC_WORKDIR, then the --config file, then the
/// --desk-scale preset, then built-in defaults.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    CLI::App app{"Quantum reservoir classification of block copolymer phase images", "qerc"};
    app.require_subcommand(1);
    RunConfig flags;
    std::string config_path;
    bool desk = false;
    app.add_option("--config", config_path, "TOML-style config file")->check(CLI::ExistingFile);
    app.add_flag("--desk-scale", desk, "reduced grid, seeds and solver resolution");
    std::vector<std::pair<CLI::Option *, const Field *>> bound;
    for (const auto &f : fields()) bound.emplace_back(f.bind(app, flags), &f);

    using Handler = int (*)(Context &);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
        {"generate", "run the SCFT grid into a dataset container (resumable)", cmd_generate},
        {"label", "write ground-truth labels and spinodal values for the grid", cmd_label},
        {"run", "featurize, run the reservoir, train and evaluate", cmd_run},
        {"sweep-qubits", "accuracy versus reservoir size with both baselines", cmd_sweep_qubits},
        {"ablate", "compare CliffordT, CliffordOnly and TOnly reservoirs", cmd_ablate},
        {"shift-components", "accuracy change for a PCA component selection", cmd_shift_components},
        {"generalize", "train on a thinned grid and predict the full test grid", cmd_generalize},
        {"render", "render the ground-truth diagram and optional prediction diff", cmd_render},
    };
    Handler chosen = nullptr;
    for (const auto &[name, help, fn] : commands) {
        auto *sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&chosen, fn = fn] { chosen = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        Context ctx;
        ctx.out = &out;
        ctx.err = &err;
        RunConfig &cfg = ctx.config;
        if (desk) cfg.apply_desk();
        if (!config_path.empty()) cfg = parse_text(io::read_text(config_path), cfg);
        if (const char *env = std::getenv("QERC_WORKDIR"); env && *env) cfg.workdir = env;
        for (const auto &[opt, field] : bound)
            if (opt->count() > 0) field->copy(flags, cfg);
        cfg.validate();
        return chosen(ctx);
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const fs::filesystem_error &e) {
        err << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kData;
    }
}

}  // namespace qerc::cli
