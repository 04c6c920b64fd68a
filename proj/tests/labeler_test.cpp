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

#include "qerc/labeler.hpp"

#include <gtest/gtest.h>

#include "spinodal_oracle.hpp"
#include <cmath>
#include <sstream>

using namespace qerc;
using namespace qerc::labeler;
using namespace qerc_test;

namespace {

BoundaryTable shipped() {
    return BoundaryTable::load_csv(std::string(QERC_DATA_DIR) + "/boundary_table.csv");
}

BoundaryTable from_string(const std::string &text) {
    std::istringstream in(text);
    return BoundaryTable::parse_csv(in);
}

}  // namespace

TEST(PhaseCodes, RoundTrip) {
    for (int c = 0; c < kNumPhases; ++c) EXPECT_EQ(phase_code(phase_from_code(c)), c);
    EXPECT_THROW(phase_from_code(4), DataError);
    EXPECT_THROW(phase_from_code(-1), DataError);
    EXPECT_EQ(phase_name(PhaseLabel::gyroid), "gyroid");
}

TEST(DebyeG, Limits) {
    EXPECT_NEAR(debye_g(1.0, 1e-12), 1.0, 1e-12);
    EXPECT_NEAR(debye_g(1.0, 1.0), 2.0 / std::exp(1.0), 1e-15);
    for (double f : {0.25, 0.5, 1.0}) {
        EXPECT_LE(std::abs(debye_g(f, 1e-8) - (f * f - f * f * f * 1e-8 / 3.0)), 1e-10);
        // Series and closed-form branches meet at f x = 0.1.
        const double x = 0.1 / f;
        EXPECT_LE(std::abs(debye_g(f, x * (1 - 1e-12)) - debye_g(f, x * (1 + 1e-12))), 1e-10);
    }
}

TEST(DebyeG, MatchesHighPrecision) {
    EXPECT_NEAR(debye_g(0.5, 2.0), static_cast<double>(big_g(big("0.5"), big(2))), 1e-15);
    for (double f : {0.1, 0.3, 0.5, 0.9, 1.0})
        for (double x : {1e-4, 0.05, 0.19, 0.21, 0.7, 3.0, 40.0}) {
            const double ref = static_cast<double>(big_g(big(f), big(x)));
            EXPECT_NEAR(debye_g(f, x), ref, 1e-13 * std::max(1.0, ref)) << f << " " << x;
        }
}

TEST(StructureFactor, MatchesHighPrecision) {
    const double ref = static_cast<double>(big_f(big(10), big("0.5")));
    EXPECT_NEAR(structure_factor_f(10.0, 0.5), ref, 1e-11 * ref);
}

TEST(StructureFactor, SymmetricInComposition) {
    for (double f : {0.1, 0.27, 0.4, 0.45})
        for (double x : {0.5, 2.0, 3.79, 12.0, 60.0}) {
            const double a = structure_factor_f(x, f), b = structure_factor_f(x, 1.0 - f);
            EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
        }
}

TEST(StructureFactor, PositiveOnPhysicalBranch) {
    for (double x = 1.0; x <= 50.0; x += 0.01) EXPECT_GT(structure_factor_f(x, 0.5), 0.0) << x;
}

TEST(Spinodal, SymmetricDiblock) {
    const Spinodal s = spinodal_chiN(0.5);
    EXPECT_NEAR(s.chi_n, oracle_spinodal(0.5), 1e-7);
    EXPECT_NEAR(s.chi_n, 10.495, 5e-4);
    EXPECT_NEAR(s.x_star, 3.785, 0.01);
}

TEST(Spinodal, AsymmetricMatchesOracleAndRises) {
    const double s3 = spinodal_chiN(0.3).chi_n;
    EXPECT_NEAR(s3, oracle_spinodal(0.3), 1e-7);
    EXPECT_GT(s3, spinodal_chiN(0.5).chi_n);
    EXPECT_NEAR(spinodal_chiN(0.3).chi_n, spinodal_chiN(0.7).chi_n, 1e-9);
}

TEST(Spinodal, WindowWithoutInteriorMinimum) {
    SpinodalQuery q;
    q.f = 0.5;
    q.x_min = 10.0;
    q.x_max = 20.0;
    EXPECT_THROW(spinodal_chiN(q), NumericalError);
}

TEST(BoundaryTable, ShippedTableParses) {
    const BoundaryTable t = shipped();
    EXPECT_FALSE(t.provenance.empty());
    EXPECT_GE(t.curve(BoundaryTable::kHexGyroid).size(), 2u);
    EXPECT_GE(t.curve(BoundaryTable::kGyroidLamellar).size(), 2u);
}

TEST(BoundaryTable, RejectsBadInput) {
    EXPECT_THROW(from_string("curve,f,chiN\nx,1,0.3\n"), DataError);
    EXPECT_THROW(from_string("curve,chiN,f\nx,1,abc\n"), DataError);
    EXPECT_THROW(from_string("curve,chiN,f\nx,2,0.3\nx,1,0.3\n"), DataError);
    EXPECT_THROW(from_string("curve,chiN,f\nx,1,0.3\n"), DataError);
    EXPECT_THROW(from_string(""), DataError);
    EXPECT_THROW(shipped().curve("nope"), DataError);
    EXPECT_THROW(BoundaryTable::load_csv("/nonexistent/table.csv"), DataError);
}

TEST(Interpolation, KnotsAndMidpoints) {
    const BoundaryTable t = from_string("curve,chiN,f\nc,10,0.30\nc,20,0.40\nc,30,0.36\nc,40,0.33\n");
    EXPECT_EQ(interpolate_boundary(t, "c", 20.0).linear, 0.40);
    EXPECT_NEAR(interpolate_boundary(t, "c", 20.0).spline, 0.40, 1e-14);
    EXPECT_NEAR(interpolate_boundary(t, "c", 25.0).linear, 0.38, 1e-15);
    EXPECT_THROW(interpolate_boundary(t, "c", 9.9), DataError);
    EXPECT_THROW(interpolate_boundary(t, "c", 40.1), DataError);
}

TEST(Interpolation, SplineRecoversCubic) {
    const auto poly = [](double x) { return 0.3 + 0.01 * x - 4e-4 * x * x + 3e-6 * x * x * x; };
    std::string csv = "curve,chiN,f\n";
    for (double x : {10.0, 12.0, 15.5, 17.0, 21.0, 26.0, 30.0}) csv += "c," + std::to_string(x) + "," + std::to_string(poly(x)) + "\n";
    // std::to_string keeps 6 decimals; rebuild knots at full precision.
    BoundaryTable t = from_string(csv);
    for (auto &k : t.curves["c"]) k.f = poly(k.chi_n);
    for (double x = 10.0; x <= 30.0; x += 0.37) EXPECT_NEAR(interpolate_boundary(t, "c", x).spline, poly(x), 1e-9) << x;
}

TEST(Interpolation, LinearAndSplineAgreeOnShippedTable) {
    const BoundaryTable t = shipped();
    for (int i = 1; i <= 10; ++i) {
        const double chi_n = i * 0.1 * 25.0;
        for (auto name : {BoundaryTable::kHexGyroid, BoundaryTable::kGyroidLamellar}) {
            if (!covers(t.curve(name), chi_n)) continue;
            EXPECT_LE(interpolate_boundary(t, name, chi_n).disagreement(), 0.005) << name << " " << chi_n;
        }
    }
}

TEST(Labeling, Examples) {
    const BoundaryTable t = shipped();
    EXPECT_EQ(label_point(0.5, 2.5, t), PhaseLabel::disordered);
    EXPECT_EQ(label_point(0.5, 25.0, t), PhaseLabel::lamellar);
    EXPECT_EQ(label_point(0.3, 25.0, t), PhaseLabel::hexagonal);
    EXPECT_EQ(label_point(0.7, 25.0, t), PhaseLabel::hexagonal);
    EXPECT_EQ(label_point(0.34, 25.0, t), PhaseLabel::gyroid);
    EXPECT_THROW(label_point(0.0, 25.0, t), InvalidArgument);
}

TEST(Labeling, TieGoesToOuterRegion) {
    const BoundaryTable t = from_string(
        "curve,chiN,f\ngyroid_lamellar,10,0.45\ngyroid_lamellar,30,0.40\nhex_gyroid,10,0.40\nhex_gyroid,30,0.35\n");
    EXPECT_EQ(label_point(0.40, 30.0, t), PhaseLabel::gyroid);
    EXPECT_EQ(label_point(0.35, 30.0, t), PhaseLabel::hexagonal);
}

TEST(Labeling, MissingCoverageAboveSpinodal) {
    const BoundaryTable t = from_string(
        "curve,chiN,f\ngyroid_lamellar,10,0.45\ngyroid_lamellar,20,0.40\nhex_gyroid,10,0.40\nhex_gyroid,20,0.35\n");
    EXPECT_THROW(label_point(0.45, 25.0, t), DataError);
    EXPECT_EQ(label_point(0.45, 5.0, t), PhaseLabel::disordered);
}

TEST(Labeling, NeverReturnsToDisordered) {
    const BoundaryTable t = shipped();
    for (double f = 0.3; f <= 0.5 + 1e-12; f += 0.0125) {
        bool ordered = false;
        for (double chi_n = 0.0; chi_n <= 30.0; chi_n += 0.25) {
            const bool dis = label_point(f, chi_n, t) == PhaseLabel::disordered;
            if (ordered) EXPECT_FALSE(dis) << f << " " << chi_n;
            ordered = ordered || !dis;
        }
    }
}
