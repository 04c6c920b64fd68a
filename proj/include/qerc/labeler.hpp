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

// Ground-truth phase labels for AB diblock melts: mean-field spinodal from the
// random-phase structure factor, order-order boundaries from a tabulated set
// of (chiN, f) knots.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qerc/error.hpp"

namespace qerc {

enum class PhaseLabel : std::uint8_t { disordered = 0, hexagonal = 1, gyroid = 2, lamellar = 3 };

inline constexpr int kNumPhases = 4;

inline constexpr std::string_view phase_name(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::disordered:
            return "disordered";
        case PhaseLabel::hexagonal:
            return "hexagonal";
        case PhaseLabel::gyroid:
            return "gyroid";
        case PhaseLabel::lamellar:
            return "lamellar";
    }
    return "unknown";
}

inline PhaseLabel phase_from_code(int code) {
    if (code < 0 || code >= kNumPhases) throw DataError("invalid phase code " + std::to_string(code));
    return static_cast<PhaseLabel>(code);
}

inline int phase_code(PhaseLabel label) {
    return static_cast<int>(label);
}

}  // namespace qerc

namespace qerc::labeler {

/// Debye-type function g(f, x) = 2 (f x + e^{-f x} - 1) / x^2. Small f x uses
/// the series f^2 sum_n (-f x)^n 2 / (n + 2)!; g(f, 0) = f^2.
inline double debye_g(double f, double x) {
    const double y = f * x;
    if (std::abs(y) < 0.1) {
        double term = 1.0;  // (-y)^n / (n+2)! * 2, starting at n = 0
        double sum = 1.0;
        for (int n = 1; n <= 12; ++n) {
            term *= -y / (n + 2);
            sum += term;
        }
        return f * f * sum;
    }
    return 2.0 * (y + std::expm1(-y)) / (x * x);
}

/// F(x, f) = g(1,x) / (g(f,x) g(1-f,x) - [g(1,x) - g(f,x) - g(1-f,x)]^2 / 4).
inline double structure_factor_f(double x, double f) {
    const double g1 = debye_g(1.0, x);
    const double ga = debye_g(f, x);
    const double gb = debye_g(1.0 - f, x);
    const double cross = g1 - ga - gb;
    const double den = ga * gb - 0.25 * cross * cross;
    if (!(std::abs(den) > 1e-300) || !std::isfinite(den)) {
        throw NumericalError("structure factor denominator vanishes at x=" + std::to_string(x));
    }
    return g1 / den;
}

struct SpinodalQuery {
    double f = 0.5;
    double x_min = 1e-3;
    double x_max = 100.0;
    double scan_step = 0.05;
};

struct Spinodal {
    double chi_n;
    double x_star;
};

/// (chiN)_s = min_x F(x, f) / 2. Coarse scan, then golden-section refinement
/// in the bracketing cell pair.
inline Spinodal spinodal_chiN(const SpinodalQuery &query) {
    const double f = query.f;
    if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("spinodal requires 0 < f < 1");
    if (!(query.x_min > 0.0) || !(query.x_max > query.x_min) || !(query.scan_step > 0.0)) {
        throw InvalidArgument("invalid spinodal search window");
    }
    const auto objective = [f](double x) { return 0.5 * structure_factor_f(x, f); };

    const int n = static_cast<int>(std::floor((query.x_max - query.x_min) / query.scan_step));
    int best = 0;
    double best_value = objective(query.x_min);
    for (int i = 1; i <= n; ++i) {
        const double v = objective(query.x_min + i * query.scan_step);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    if (best == 0 || best == n) throw NumericalError("no interior spinodal minimum in search window");

    double lo = query.x_min + (best - 1) * query.scan_step;
    double hi = query.x_min + (best + 1) * query.scan_step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = objective(c);
    double fd = objective(d);
    while (hi - lo > 1e-10) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    const double x_star = 0.5 * (lo + hi);
    return {objective(x_star), x_star};
}

inline Spinodal spinodal_chiN(double f) {
    return spinodal_chiN(SpinodalQuery{.f = f});
}

struct Knot {
    double chi_n;
    double f;
};

/// Order-order boundary curves keyed by name. Loaded from CSV with header
/// `curve,chiN,f`; leading `#` lines are kept as provenance.
struct BoundaryTable {
    std::map<std::string, std::vector<Knot>> curves;
    std::string provenance;

    static constexpr std::string_view kHexGyroid = "hex_gyroid";
    static constexpr std::string_view kGyroidLamellar = "gyroid_lamellar";

    void validate() const {
        for (const auto &[name, knots] : curves) {
            if (knots.size() < 2) throw DataError("boundary curve '" + name + "' needs at least 2 knots");
            for (std::size_t i = 0; i < knots.size(); ++i) {
                if (!(knots[i].f > 0.0 && knots[i].f < 1.0)) {
                    throw DataError("boundary curve '" + name + "' has f outside (0, 1)");
                }
                if (i > 0 && !(knots[i].chi_n > knots[i - 1].chi_n)) {
                    throw DataError("boundary curve '" + name + "' chiN not strictly increasing");
                }
            }
        }
    }

    const std::vector<Knot> &curve(std::string_view name) const {
        auto it = curves.find(std::string(name));
        if (it == curves.end()) throw DataError("boundary table has no curve '" + std::string(name) + "'");
        return it->second;
    }

    static BoundaryTable parse_csv(std::istream &in) {
        BoundaryTable table;
        std::string line;
        bool header_seen = false;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line.front() == '#') {
                if (!header_seen) {
                    auto text = line.substr(1);
                    if (!text.empty() && text.front() == ' ') text.erase(0, 1);
                    if (!table.provenance.empty()) table.provenance += '\n';
                    table.provenance += text;
                }
                continue;
            }
            if (!header_seen) {
                if (line != "curve,chiN,f") throw DataError("boundary table header must be 'curve,chiN,f'");
                header_seen = true;
                continue;
            }
            std::stringstream row(line);
            std::string name, chi_n, f;
            if (!std::getline(row, name, ',') || !std::getline(row, chi_n, ',') || !std::getline(row, f)) {
                throw DataError("malformed boundary table row " + std::to_string(line_no));
            }
            try {
                table.curves[name].push_back({std::stod(chi_n), std::stod(f)});
            } catch (const std::exception &) {
                throw DataError("non-numeric boundary table row " + std::to_string(line_no));
            }
        }
        if (!header_seen) throw DataError("boundary table is empty");
        table.validate();
        return table;
    }

    static BoundaryTable load_csv(const std::string &path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open boundary table " + path);
        return parse_csv(in);
    }
};

/// Not-a-knot cubic spline through the knots (reproduces cubics exactly).
/// Three knots give the interpolating parabola, two the line.
class CubicSpline {
   public:
    explicit CubicSpline(const std::vector<Knot> &knots) : knots_(knots), second_(knots.size(), 0.0) {
        const auto n = static_cast<Eigen::Index>(knots.size());
        if (n < 3) return;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        const auto h = [&](Eigen::Index i) { return knots[i + 1].chi_n - knots[i].chi_n; };
        for (Eigen::Index i = 1; i + 1 < n; ++i) {
            a(i, i - 1) = h(i - 1);
            a(i, i) = 2.0 * (h(i - 1) + h(i));
            a(i, i + 1) = h(i);
            rhs(i) = 6.0 * ((knots[i + 1].f - knots[i].f) / h(i) - (knots[i].f - knots[i - 1].f) / h(i - 1));
        }
        if (n == 3) {
            a(0, 0) = 1.0;
            a(0, 1) = -1.0;
            a(2, 1) = -1.0;
            a(2, 2) = 1.0;
        } else {
            // Continuous third derivative across the second and penultimate knots.
            a(0, 0) = -1.0 / h(0);
            a(0, 1) = 1.0 / h(0) + 1.0 / h(1);
            a(0, 2) = -1.0 / h(1);
            a(n - 1, n - 3) = -1.0 / h(n - 3);
            a(n - 1, n - 2) = 1.0 / h(n - 3) + 1.0 / h(n - 2);
            a(n - 1, n - 1) = -1.0 / h(n - 2);
        }
        const Eigen::VectorXd m = a.partialPivLu().solve(rhs);
        for (Eigen::Index i = 0; i < n; ++i) second_[static_cast<std::size_t>(i)] = m(i);
    }

    double operator()(double x) const {
        const std::size_t i = segment(x);
        const double x0 = knots_[i].chi_n, x1 = knots_[i + 1].chi_n;
        const double h = x1 - x0;
        const double t0 = x1 - x, t1 = x - x0;
        return second_[i] * t0 * t0 * t0 / (6.0 * h) + second_[i + 1] * t1 * t1 * t1 / (6.0 * h) +
               (knots_[i].f / h - second_[i] * h / 6.0) * t0 + (knots_[i + 1].f / h - second_[i + 1] * h / 6.0) * t1;
    }

   private:
    std::size_t segment(double x) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                   [](double v, const Knot &k) { return v < k.chi_n; });
        const auto idx = static_cast<std::size_t>(std::distance(knots_.begin(), it));
        return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, knots_.size() - 2);
    }

    std::vector<Knot> knots_;
    std::vector<double> second_;
};

struct BoundaryValue {
    double linear;
    double spline;

    double disagreement() const {
        return std::abs(linear - spline);
    }
};

inline bool covers(const std::vector<Knot> &knots, double chi_n) {
    return chi_n >= knots.front().chi_n && chi_n <= knots.back().chi_n;
}

/// Boundary f at chiN by linear interpolation, with the cubic-spline value
/// alongside for comparison.
inline BoundaryValue interpolate_boundary(const BoundaryTable &table, std::string_view curve, double chi_n) {
    const auto &knots = table.curve(curve);
    if (!covers(knots, chi_n)) {
        throw DataError("chiN=" + std::to_string(chi_n) + " outside the knot range of curve '" + std::string(curve) +
                        "'");
    }
    auto hi = std::lower_bound(knots.begin(), knots.end(), chi_n,
                               [](const Knot &k, double v) { return k.chi_n < v; });
    double linear;
    if (hi->chi_n == chi_n) {
        linear = hi->f;
    } else {
        auto lo = std::prev(hi);
        const double t = (chi_n - lo->chi_n) / (hi->chi_n - lo->chi_n);
        linear = lo->f + t * (hi->f - lo->f);
    }
    return {linear, CubicSpline(knots)(chi_n)};
}

/// Four-class label. f > 1/2 is folded onto 1 - f. Below the spinodal the
/// melt is disordered; above it, f at or below the hexagonal/gyroid curve is
/// hexagonal, at or below the gyroid/lamellar curve gyroid, else lamellar.
/// Points on a curve take the outer (smaller f) side.
inline PhaseLabel label_point(double f, double chi_n, const BoundaryTable &table) {
    if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("label_point requires 0 < f < 1");
    const double fa = f > 0.5 ? 1.0 - f : f;
    if (chi_n < spinodal_chiN(fa).chi_n) return PhaseLabel::disordered;
    const auto &hg = table.curve(BoundaryTable::kHexGyroid);
    const auto &gl = table.curve(BoundaryTable::kGyroidLamellar);
    if (!covers(hg, chi_n) || !covers(gl, chi_n)) {
        throw DataError("boundary table does not cover chiN=" + std::to_string(chi_n) + " above the spinodal");
    }
    if (fa <= interpolate_boundary(table, BoundaryTable::kHexGyroid, chi_n).linear) return PhaseLabel::hexagonal;
    if (fa <= interpolate_boundary(table, BoundaryTable::kGyroidLamellar, chi_n).linear) return PhaseLabel::gyroid;
    return PhaseLabel::lamellar;
}

}  // namespace qerc::labeler
