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

// Majority-vote phase diagrams, deterministic SVG/PNG rendering, CSV tables,
// diagram diffs and accuracy-versus-qubit curves.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qerc/dataset.hpp"
#include "qerc/error.hpp"
#include "qerc/io.hpp"
#include "qerc/labeler.hpp"

namespace qerc::viz {

struct VotedCell {
    PhaseLabel label = PhaseLabel::disordered;
    double ratio = 1.0;
    bool tied = false;
    int votes = 0;
    bool operator==(const VotedCell &) const = default;
};

/// Modal label; ties go to the lowest class code and set `tied`.
inline VotedCell majority_vote(std::span<const PhaseLabel> predictions) {
    if (predictions.empty()) throw InvalidArgument("majority vote over an empty prediction list");
    std::array<int, kNumPhases> counts{};
    for (auto p : predictions) ++counts[static_cast<std::size_t>(phase_code(p))];
    const int best = *std::max_element(counts.begin(), counts.end());
    const int first = static_cast<int>(std::find(counts.begin(), counts.end(), best) - counts.begin());
    VotedCell c;
    c.label = phase_from_code(first);
    c.votes = static_cast<int>(predictions.size());
    c.ratio = static_cast<double>(best) / c.votes;
    c.tied = std::count(counts.begin(), counts.end(), best) > 1;
    return c;
}

struct PhaseDiagramGrid {
    std::vector<double> f_values;
    std::vector<double> chi_n_values;
    std::vector<std::optional<VotedCell>> cells;  // f-major

    static PhaseDiagramGrid empty(const dataset::GridSpec &spec) {
        PhaseDiagramGrid g{spec.f_values(), spec.chi_n_values(), {}};
        g.cells.resize(g.f_values.size() * g.chi_n_values.size());
        return g;
    }
    std::optional<VotedCell> &at(std::size_t fi, std::size_t ci) {
        return cells.at(fi * chi_n_values.size() + ci);
    }
    const std::optional<VotedCell> &at(std::size_t fi, std::size_t ci) const {
        return cells.at(fi * chi_n_values.size() + ci);
    }
    bool same_axes(const PhaseDiagramGrid &o) const {
        const auto eq = [](const std::vector<double> &a, const std::vector<double> &b) {
            return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) { return std::abs(x - y) < 1e-9; });
        };
        return eq(f_values, o.f_values) && eq(chi_n_values, o.chi_n_values);
    }
};

inline PhaseDiagramGrid truth_diagram(const dataset::GridSpec &spec, const labeler::BoundaryTable &table) {
    PhaseDiagramGrid g = PhaseDiagramGrid::empty(spec);
    for (std::size_t i = 0; i < g.f_values.size(); ++i)
        for (std::size_t j = 0; j < g.chi_n_values.size(); ++j)
            g.at(i, j) = VotedCell{labeler::label_point(g.f_values[i], g.chi_n_values[j], table), 1.0, false, 1};
    return g;
}

struct Prediction {
    int f_index;
    int chi_index;
    PhaseLabel label;
};

inline PhaseDiagramGrid vote_diagram(const dataset::GridSpec &spec, std::span<const Prediction> predictions) {
    PhaseDiagramGrid g = PhaseDiagramGrid::empty(spec);
    std::map<std::pair<int, int>, std::vector<PhaseLabel>> groups;
    for (const auto &p : predictions) {
        if (p.f_index < 0 || p.chi_index < 0 || static_cast<std::size_t>(p.f_index) >= g.f_values.size() ||
            static_cast<std::size_t>(p.chi_index) >= g.chi_n_values.size()) {
            throw InvalidArgument("prediction outside the diagram grid");
        }
        groups[{p.f_index, p.chi_index}].push_back(p.label);
    }
    for (const auto &[key, labels] : groups) g.at(static_cast<std::size_t>(key.first), static_cast<std::size_t>(key.second)) = majority_vote(labels);
    return g;
}

struct Palette {
    std::array<std::array<std::uint8_t, 3>, kNumPhases> rgb{{{158, 158, 158}, {31, 119, 180}, {44, 160, 44}, {214, 39, 40}}};

    std::string hex(PhaseLabel l) const {
        const auto &c = rgb[static_cast<std::size_t>(phase_code(l))];
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
        return buf;
    }
};

inline std::string fmt(double v, const char *spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct Panel {
    std::string title;
    PhaseDiagramGrid grid;
};

inline constexpr int kCell = 24;

/// Side-by-side panels; f runs left to right, chi N bottom to top.
inline std::string phase_diagram_svg(std::span<const Panel> panels, const Palette &palette = {}) {
    if (panels.empty()) throw InvalidArgument("nothing to render");
    const int left = 56, top = 28, bottom = 48, gap = 36;
    std::vector<int> widths;
    int total_w = left, max_h = 0;
    for (const auto &p : panels) {
        const int w = static_cast<int>(p.grid.f_values.size()) * kCell;
        widths.push_back(w);
        total_w += w + gap;
        max_h = std::max(max_h, static_cast<int>(p.grid.chi_n_values.size()) * kCell);
    }
    const int legend_h = 24;
    const int height = top + max_h + bottom + legend_h;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w << "\" height=\"" << height << "\" viewBox=\"0 0 "
        << total_w << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    int x0 = left;
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const auto &g = panels[k].grid;
        const int rows = static_cast<int>(g.chi_n_values.size());
        const int y0 = top + max_h - rows * kCell;
        out << "<g class=\"panel\">\n";
        out << "<text x=\"" << x0 + widths[k] / 2 << "\" y=\"" << top - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
            << panels[k].title << "</text>\n";
        for (std::size_t i = 0; i < g.f_values.size(); ++i)
            for (std::size_t j = 0; j < g.chi_n_values.size(); ++j) {
                const auto &c = g.at(i, j);
                const int x = x0 + static_cast<int>(i) * kCell;
                const int y = y0 + (rows - 1 - static_cast<int>(j)) * kCell;
                out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell << "\"";
                if (c) {
                    out << " fill=\"" << palette.hex(c->label) << "\" fill-opacity=\"" << fmt(c->ratio) << "\"";
                } else {
                    out << " fill=\"none\"";
                }
                out << " stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
            }
        for (std::size_t i = 0; i < g.f_values.size(); i += std::max<std::size_t>(1, g.f_values.size() / 5)) {
            out << "<text x=\"" << x0 + static_cast<int>(i) * kCell + kCell / 2 << "\" y=\"" << top + max_h + 14
                << "\" text-anchor=\"middle\">" << fmt(g.f_values[i], "%.4g") << "</text>\n";
        }
        for (std::size_t j = 0; j < g.chi_n_values.size(); ++j) {
            out << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + (rows - 1 - static_cast<int>(j)) * kCell + kCell / 2 + 4
                << "\" text-anchor=\"end\">" << fmt(g.chi_n_values[j], "%.4g") << "</text>\n";
        }
        out << "<text x=\"" << x0 + widths[k] / 2 << "\" y=\"" << top + max_h + 30 << "\" text-anchor=\"middle\">f</text>\n";
        out << "</g>\n";
        x0 += widths[k] + gap;
    }
    out << "<text x=\"14\" y=\"" << top + max_h / 2 << "\" transform=\"rotate(-90 14 " << top + max_h / 2
        << ")\" text-anchor=\"middle\">chiN</text>\n";
    int lx = left;
    const int ly = height - legend_h + 6;
    for (int c = 0; c < kNumPhases; ++c) {
        const auto l = phase_from_code(c);
        out << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << palette.hex(l) << "\"/>\n";
        out << "<text x=\"" << lx + 14 << "\" y=\"" << ly + 9 << "\">" << phase_name(l) << "</text>\n";
        lx += 80;
    }
    out << "</svg>\n";
    return out.str();
}

inline void render_phase_diagram(const PhaseDiagramGrid &grid, const std::filesystem::path &path, const std::string &title = "",
                                 const Palette &palette = {}) {
    const Panel p{title, grid};
    io::write_text(path, phase_diagram_svg(std::span(&p, 1), palette));
}

inline void render_panels(std::span<const Panel> panels, const std::filesystem::path &path, const Palette &palette = {}) {
    io::write_text(path, phase_diagram_svg(panels, palette));
}

/// Raster export: one kCell x kCell block per cell, alpha = ratio.
inline void render_phase_diagram_png(const PhaseDiagramGrid &g, const std::filesystem::path &path, const Palette &palette = {}) {
    const int cols = static_cast<int>(g.f_values.size()), rows = static_cast<int>(g.chi_n_values.size());
    const int w = cols * kCell, h = rows * kCell;
    std::vector<std::uint8_t> px(4 * static_cast<std::size_t>(w) * h, 0);
    for (int i = 0; i < cols; ++i)
        for (int j = 0; j < rows; ++j) {
            const auto &c = g.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (!c) continue;
            const auto &rgb = palette.rgb[static_cast<std::size_t>(phase_code(c->label))];
            const auto alpha = static_cast<std::uint8_t>(std::lround(std::clamp(c->ratio, 0.0, 1.0) * 255));
            for (int y = (rows - 1 - j) * kCell; y < (rows - j) * kCell; ++y)
                for (int x = i * kCell; x < (i + 1) * kCell; ++x) {
                    auto *p = &px[4 * (static_cast<std::size_t>(y) * w + x)];
                    p[0] = rgb[0], p[1] = rgb[1], p[2] = rgb[2], p[3] = alpha;
                }
        }
    io::write_png_rgba(path, w, h, px);
}

inline std::string diagram_csv(const PhaseDiagramGrid &g) {
    std::string out = "f,chiN,label,ratio,tied\n";
    for (std::size_t i = 0; i < g.f_values.size(); ++i)
        for (std::size_t j = 0; j < g.chi_n_values.size(); ++j) {
            const auto &c = g.at(i, j);
            if (!c) continue;
            out += fmt(g.f_values[i], "%.17g") + "," + fmt(g.chi_n_values[j], "%.17g") + "," + std::string(phase_name(c->label)) +
                   "," + fmt(c->ratio, "%.17g") + "," + (c->tied ? "1" : "0") + "\n";
        }
    return out;
}

struct Mismatch {
    double f;
    double chi_n;
    PhaseLabel predicted;
    PhaseLabel truth;
};

struct MismatchReport {
    std::vector<Mismatch> mismatches;
    std::size_t compared = 0;

    double cell_accuracy() const {
        return compared == 0 ? 0.0 : 1.0 - static_cast<double>(mismatches.size()) / static_cast<double>(compared);
    }
    std::string csv() const {
        std::string out = "f,chiN,predicted,truth\n";
        for (const auto &m : mismatches)
            out += fmt(m.f, "%.17g") + "," + fmt(m.chi_n, "%.17g") + "," + std::string(phase_name(m.predicted)) + "," +
                   std::string(phase_name(m.truth)) + "\n";
        return out;
    }
};

/// Cells present in both grids are compared.
inline MismatchReport diff_diagram(const PhaseDiagramGrid &predicted, const PhaseDiagramGrid &truth) {
    if (!predicted.same_axes(truth)) throw InvalidArgument("diagram axes differ");
    MismatchReport r;
    for (std::size_t i = 0; i < truth.f_values.size(); ++i)
        for (std::size_t j = 0; j < truth.chi_n_values.size(); ++j) {
            const auto &p = predicted.at(i, j);
            const auto &t = truth.at(i, j);
            if (!p || !t) continue;
            ++r.compared;
            if (p->label != t->label) r.mismatches.push_back({truth.f_values[i], truth.chi_n_values[j], p->label, t->label});
        }
    return r;
}

// Accuracy curves ----------------------------------------------------------------

struct CurvePoint {
    int n_qubits;
    std::vector<double> values;  // one per repetition
};

struct Series {
    std::string name;
    bool dashed = false;
    std::vector<CurvePoint> points;
};

inline std::string accuracy_csv(std::span<const Series> series) {
    std::string out = "series,dashed,n_qubits,repetition,accuracy\n";
    for (const auto &s : series)
        for (const auto &p : s.points)
            for (std::size_t r = 0; r < p.values.size(); ++r)
                out += s.name + "," + (s.dashed ? "1" : "0") + "," + std::to_string(p.n_qubits) + "," + std::to_string(r) + "," +
                       fmt(p.values[r], "%.17g") + "\n";
    return out;
}

inline std::vector<Series> parse_accuracy_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "series,dashed,n_qubits,repetition,accuracy") throw DataError("bad accuracy table header");
    std::vector<Series> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string name, dashed, nq, rep, acc;
        if (!std::getline(row, name, ',') || !std::getline(row, dashed, ',') || !std::getline(row, nq, ',') ||
            !std::getline(row, rep, ',') || !std::getline(row, acc)) {
            throw DataError("malformed accuracy row");
        }
        auto it = std::find_if(out.begin(), out.end(), [&](const Series &s) { return s.name == name; });
        if (it == out.end()) {
            out.push_back({name, dashed == "1", {}});
            it = std::prev(out.end());
        }
        const int n = std::stoi(nq);
        auto pt = std::find_if(it->points.begin(), it->points.end(), [n](const CurvePoint &p) { return p.n_qubits == n; });
        if (pt == it->points.end()) {
            it->points.push_back({n, {}});
            pt = std::prev(it->points.end());
        }
        pt->values.push_back(std::stod(acc));
    }
    return out;
}

inline std::string accuracy_curve_svg(std::span<const Series> series) {
    if (series.empty()) throw InvalidArgument("no series to plot");
    int qmin = 1 << 30, qmax = -1;
    for (const auto &s : series)
        for (const auto &p : s.points) qmin = std::min(qmin, p.n_qubits), qmax = std::max(qmax, p.n_qubits);
    if (qmax < 0) throw InvalidArgument("series have no points");
    const int w = 480, h = 320, l = 56, r = 140, t = 20, b = 44;
    const double pw = w - l - r, ph = h - t - b;
    const auto sx = [&](double q) { return l + (qmax == qmin ? pw / 2 : (q - qmin) / (qmax - qmin) * pw); };
    const auto sy = [&](double a) { return t + (1.0 - a) * ph; };
    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
        << "\" font-family=\"sans-serif\" font-size=\"10\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out << "<line x1=\"" << l << "\" y1=\"" << t + ph << "\" x2=\"" << l + pw << "\" y2=\"" << t + ph << "\" stroke=\"#000\"/>\n";
    out << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << t + ph << "\" stroke=\"#000\"/>\n";
    for (int q = qmin; q <= qmax; ++q)
        out << "<text x=\"" << fmt(sx(q)) << "\" y=\"" << t + ph + 14 << "\" text-anchor=\"middle\">" << q << "</text>\n";
    for (int k = 0; k <= 4; ++k)
        out << "<text x=\"" << l - 4 << "\" y=\"" << fmt(sy(k / 4.0) + 3) << "\" text-anchor=\"end\">" << fmt(k / 4.0) << "</text>\n";
    out << "<text x=\"" << l + pw / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\">qubits</text>\n";
    out << "<text x=\"14\" y=\"" << t + ph / 2 << "\" transform=\"rotate(-90 14 " << t + ph / 2
        << ")\" text-anchor=\"middle\">accuracy</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto &s = series[k];
        const char *color = colors[k % 6];
        std::vector<CurvePoint> pts = s.points;
        std::sort(pts.begin(), pts.end(), [](const auto &a, const auto &b) { return a.n_qubits < b.n_qubits; });
        std::string mean_line, upper, lower;
        for (const auto &p : pts) {
            if (p.values.empty()) continue;
            double sum = 0.0;
            for (double v : p.values) sum += v;
            const double mean = sum / static_cast<double>(p.values.size());
            const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
            mean_line += fmt(sx(p.n_qubits)) + "," + fmt(sy(mean)) + " ";
            upper += fmt(sx(p.n_qubits)) + "," + fmt(sy(*hi)) + " ";
            lower = fmt(sx(p.n_qubits)) + "," + fmt(sy(*lo)) + " " + lower;
            out << "<circle cx=\"" << fmt(sx(p.n_qubits)) << "\" cy=\"" << fmt(sy(mean)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        out << "<polygon points=\"" << upper << lower << "\" fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
        if (pts.size() > 1) {
            out << "<polyline points=\"" << mean_line << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
                << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
        }
        const int ly = t + 12 + static_cast<int>(k) * 16;
        out << "<line x1=\"" << w - r + 8 << "\" y1=\"" << ly << "\" x2=\"" << w - r + 28 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
        out << "<text x=\"" << w - r + 32 << "\" y=\"" << ly + 3 << "\">" << s.name << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline void render_accuracy_curve(std::span<const Series> series, const std::filesystem::path &path) {
    io::write_text(path, accuracy_curve_svg(series));
}

}  // namespace qerc::viz
