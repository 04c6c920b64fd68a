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

#include "qerc/dataset.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

using namespace qerc;
using namespace qerc::dataset;

namespace {

labeler::BoundaryTable shipped() {
    return labeler::BoundaryTable::load_csv(std::string(QERC_DATA_DIR) + "/boundary_table.csv");
}

scft::SimConfig tiny_sim() {
    scft::SimConfig c;
    c.lattice = {16, 16, 8.0, 8.0};
    c.contour_steps = 20;
    c.max_iterations = 25;
    return c;
}

std::filesystem::path scratch(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("qerc_dataset_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

Sample fake(Split split, PhaseLabel label, int f_index = 0) {
    Sample s;
    s.split = split;
    s.label = label;
    s.f_index = f_index;
    return s;
}

}  // namespace

TEST(Grid, DefaultHas170Points) {
    const auto g = build_grid(GridSpec{});
    EXPECT_EQ(g.size(), 170u);
    EXPECT_DOUBLE_EQ(g.front().f, 0.3);
    EXPECT_DOUBLE_EQ(g.front().chi_n, 2.5);
    EXPECT_DOUBLE_EQ(g.back().f, 0.5);
    EXPECT_DOUBLE_EQ(g.back().chi_n, 25.0);
    // Row-major: chi varies fastest.
    EXPECT_EQ(g[1].f_index, 0);
    EXPECT_EQ(g[1].chi_index, 1);
}

TEST(Grid, CollapsedFAxis) {
    GridSpec s;
    s.f_start = s.f_stop = 0.4;
    EXPECT_EQ(build_grid(s).size(), 10u);
}

TEST(Grid, DeskPreset) {
    const auto g = build_grid(GridSpec::desk());
    EXPECT_EQ(g.size(), 20u);
    EXPECT_EQ(GridSpec::desk().chi_n_values(), (std::vector<double>{10, 15, 20, 25}));
}

TEST(Grid, MisalignedStepRejected) {
    GridSpec s;
    s.f_step = 0.03;
    EXPECT_THROW(build_grid(s), InvalidArgument);
    s = {};
    s.chi_step = -0.1;
    EXPECT_THROW(build_grid(s), InvalidArgument);
}

TEST(Plan, FullScaleCounts) {
    const Manifest m = plan_manifest(GridSpec{}, SeedCounts{}, scft::SimConfig{}, {}, shipped());
    EXPECT_EQ(m.count(Split::train), 4080u);
    EXPECT_EQ(m.count(Split::test), 1700u);
    EXPECT_EQ(training_points(m), 170u);
}

TEST(Plan, SplitsAreDisjointAndLabelsConsistent) {
    const auto table = shipped();
    const auto samples = plan_samples(GridSpec{}, SeedCounts{}, table);
    std::set<std::tuple<int, int, std::uint64_t>> train, test;
    for (const auto &s : samples) {
        (s.split == Split::train ? train : test).insert({s.f_index, s.chi_index, s.seed});
        EXPECT_EQ(s.label, labeler::label_point(s.f, s.chi_n, table));
    }
    EXPECT_EQ(train.size(), 4080u);
    EXPECT_EQ(test.size(), 1700u);
    for (const auto &k : train) EXPECT_EQ(test.count(k), 0u);
}

TEST(Plan, SeedsAreStable) {
    EXPECT_EQ(sample_seed(3, 4, Split::test, 2), sample_seed(3, 4, Split::test, 2));
    EXPECT_NE(sample_seed(3, 4, Split::test, 2), sample_seed(3, 4, Split::train, 2));
    EXPECT_NE(sample_seed(3, 4, Split::test, 2), sample_seed(4, 3, Split::test, 2));
}

TEST(Downsample, VariantAKeeps45Points) {
    const Manifest m = plan_manifest(GridSpec{}, SeedCounts{}, scft::SimConfig{}, {}, shipped());
    const Manifest a = downsample_training(m, DownsampleSpec::variant_a());
    // 17 f rows minus the 8 odd rows, 10 chi N columns minus 5.
    EXPECT_EQ(training_points(a), static_cast<std::size_t>((17 - 8) * (10 - 5)));
    EXPECT_EQ(a.count(Split::train), 45u * 24u);
    EXPECT_EQ(a.count(Split::test), 1700u);
    for (const auto &s : a.split(Split::train)) {
        const long k = std::lround((s->f - 0.3) / 0.0125);
        EXPECT_EQ(k % 2, 0) << s->f;
        EXPECT_EQ(std::lround(s->chi_n * 2) % 10, 0) << s->chi_n;
    }
    const Manifest b = downsample_training(m, DownsampleSpec::variant_b());
    EXPECT_EQ(training_points(b), 45u);
    for (const auto &s : b.split(Split::train)) EXPECT_EQ(std::lround(s->chi_n * 2) % 10, 5) << s->chi_n;
}

TEST(Downsample, IdentityAndErrors) {
    const Manifest m = plan_manifest(GridSpec{}, SeedCounts{2, 1}, scft::SimConfig{}, {}, shipped());
    EXPECT_EQ(downsample_training(m, DownsampleSpec{}).samples.size(), m.samples.size());
    DownsampleSpec all;
    all.omit_f = m.grid.f_values();
    EXPECT_THROW(downsample_training(m, all), DataError);
    DownsampleSpec off;
    off.omit_f = {0.31};
    EXPECT_THROW(downsample_training(m, off), InvalidArgument);
}

TEST(Balance, EqualizesToMinimum) {
    Manifest m;
    const std::array<int, 4> counts{8, 4, 6, 2};
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < counts[static_cast<std::size_t>(c)]; ++i) m.samples.push_back(fake(Split::train, phase_from_code(c), i));
    m.samples.push_back(fake(Split::test, PhaseLabel::gyroid));
    const Manifest b = balance_classes(m, 7);
    EXPECT_EQ(b.class_counts(Split::train), (std::array<std::size_t, 4>{2, 2, 2, 2}));
    EXPECT_EQ(b.count(Split::test), 1u);
    EXPECT_EQ(b.balance->per_class, 2);
    const Manifest again = balance_classes(m, 7);
    ASSERT_EQ(again.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < b.samples.size(); ++i) EXPECT_EQ(again.samples[i].f_index, b.samples[i].f_index);
    const Manifest twice = balance_classes(b, 99);
    EXPECT_EQ(twice.class_counts(Split::train), b.class_counts(Split::train));
}

TEST(Balance, EmptyClassRejected) {
    Manifest m;
    m.samples = {fake(Split::train, PhaseLabel::disordered), fake(Split::train, PhaseLabel::lamellar)};
    EXPECT_THROW(balance_classes(m, 1), DataError);
}

TEST(Balance, FullScaleVariantACountFollowsLabels) {
    const auto table = shipped();
    const Manifest m = downsample_training(plan_manifest(GridSpec{}, SeedCounts{}, scft::SimConfig{}, {}, table),
                                           DownsampleSpec::variant_a());
    std::array<int, 4> points{};
    for (int i = 0; i <= 16; i += 2)
        for (int j = 1; j <= 9; j += 2) ++points[static_cast<std::size_t>(phase_code(labeler::label_point(0.3 + 0.0125 * i, 2.5 * (j + 1), table)))];
    const int least = *std::min_element(points.begin(), points.end());
    const Manifest b = balance_classes(m, 0);
    EXPECT_EQ(b.count(Split::train), static_cast<std::size_t>(4 * least * 24));
}

TEST(Generate, ToyGridCountsAndDeterminism) {
    GridSpec g;
    g.f_start = 0.35;
    g.f_stop = 0.4;
    g.f_step = 0.05;
    g.chi_start = g.chi_stop = 0.8;
    const auto table = shipped();
    GenerateOptions opt;
    opt.threads = 2;
    std::size_t calls = 0;
    opt.progress = [&](std::size_t, std::size_t) { ++calls; };
    const Dataset a = generate_dataset(g, tiny_sim(), SeedCounts{1, 1}, table, {}, opt);
    EXPECT_EQ(a.manifest.count(Split::train), 2u);
    EXPECT_EQ(a.manifest.count(Split::test), 2u);
    EXPECT_EQ(calls, 4u);
    EXPECT_EQ(a.images.size(), 4u * 256u);
    const Dataset b = generate_dataset(g, tiny_sim(), SeedCounts{1, 1}, table);
    EXPECT_EQ(a.manifest.images_sha256, b.manifest.images_sha256);
    EXPECT_EQ(manifest_text(a.manifest), manifest_text(b.manifest));
    for (const auto &s : a.manifest.samples) EXPECT_EQ(io::sha256_of<float>(a.image(s)), s.sha256);
}

TEST(Generate, ResumeReusesSamples) {
    GridSpec g;
    g.f_start = g.f_stop = 0.4;
    g.chi_start = g.chi_stop = 0.6;
    const auto table = shipped();
    Dataset a = generate_dataset(g, tiny_sim(), SeedCounts{1, 1}, table);
    // Corrupt the stored image of the second sample: it must be regenerated.
    a.images[a.pixels() + 3] = 42.0f;
    GenerateOptions opt;
    opt.resume = &a;
    const Dataset b = generate_dataset(g, tiny_sim(), SeedCounts{2, 1}, table, {}, opt);
    const Dataset fresh = generate_dataset(g, tiny_sim(), SeedCounts{2, 1}, table);
    EXPECT_EQ(b.manifest.images_sha256, fresh.manifest.images_sha256);
}

TEST(Generate, DivergedRunsAreExcludedAndReported) {
    GridSpec g;
    g.f_start = g.f_stop = 0.5;
    g.chi_start = g.chi_stop = 1.0;
    scft::SimConfig sim = tiny_sim();
    sim.incompressibility_rate = 6.0;
    sim.max_iterations = 500;
    const Dataset d = generate_dataset(g, sim, SeedCounts{1, 1}, shipped());
    EXPECT_EQ(d.manifest.failures.size(), 2u);
    EXPECT_TRUE(d.manifest.samples.empty());
}

TEST(Container, RoundTripIsByteStable) {
    GridSpec g;
    g.f_start = g.f_stop = 0.45;
    g.chi_start = g.chi_stop = 0.4;
    Dataset d = generate_dataset(g, tiny_sim(), SeedCounts{1, 1}, shipped());
    d.manifest.balance = BalanceSpec{3, 1};
    d.manifest.downsample = DownsampleSpec::variant_b();
    const auto dir = scratch("roundtrip");
    save(d, dir);
    const std::string first = io::read_text(dir / "manifest.json");
    const Dataset back = load(dir);
    EXPECT_EQ(back.images, d.images);
    save(back, dir);
    EXPECT_EQ(io::read_text(dir / "manifest.json"), first);
    std::filesystem::remove_all(dir);
}

TEST(Container, DetectsCorruptionAndMissingData) {
    GridSpec g;
    g.f_start = g.f_stop = 0.45;
    g.chi_start = g.chi_stop = 0.4;
    Dataset d = generate_dataset(g, tiny_sim(), SeedCounts{1, 0}, shipped());
    const auto dir = scratch("corrupt");
    save(d, dir);
    d.images[0] += 1.0f;
    io::write_floats(dir / "images.f32", d.images);
    EXPECT_THROW(load(dir), DataError);
    EXPECT_THROW(load(scratch("missing")), DataError);
    io::write_text(dir / "manifest.json", "{ not json");
    EXPECT_THROW(load(dir), DataError);
    std::filesystem::remove_all(dir);
}

TEST(Container, PngExport) {
    const auto dir = scratch("png");
    std::vector<float> img(64 * 64);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(i % 64) / 63.0f;
    io::write_png_gray(dir / "a.png", 64, 64, img);
    const std::string bytes = io::read_text(dir / "a.png");
    ASSERT_GT(bytes.size(), 8u);
    EXPECT_EQ(bytes.substr(1, 3), "PNG");
    io::write_png_gray(dir / "b.png", 64, 64, img);
    EXPECT_EQ(io::read_text(dir / "b.png"), bytes);
    std::filesystem::remove_all(dir);
}
