#include "bgcam/aer.hpp"
#include "bgcam/analysis.hpp"
#include "bgcam/errors.hpp"
#include "bgcam/image_io.hpp"
#include "bgcam/manifest.hpp"
#include "bgcam/pipeline.hpp"
#include "bgcam/sensor.hpp"

#include "oracle.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

#include <fmt/format.h>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace bgcam;
using bgcam::testing::TempDir;
using bgcam::testing::write_bytes;
namespace fs = std::filesystem;

namespace {

void write_frame_pgm(const fs::path &path, const IntensityFrame &f) {
    std::vector<std::uint8_t> levels(f.pixels().size());
    for (std::size_t i = 0; i < levels.size(); ++i)
        levels[i] = static_cast<std::uint8_t>(std::lround(f.pixels()[i] * 255.0f));
    fs::create_directories(path.parent_path());
    write_pgm(path, f.width(), f.height(), levels);
}

void write_random_pgm(std::mt19937_64 &rng, const fs::path &path, int w, int h) {
    write_frame_pgm(path, bgcam::testing::random_frame(rng, w, h));
}

DatasetManifest sample_manifest() {
    DatasetManifest m;
    m.config_snapshot.threshold = 0.125f;
    m.config_snapshot.bits = 3;
    m.config_snapshot.width = 28;
    m.config_snapshot.height = 28;
    m.labels = {"cat", "dog"};
    m.entries = {{"cat/1.png", "frames/cat/1.pgm", "cat", 0},
                 {"dog/7.png", "frames/dog/7.pgm", "dog", 1},
                 {"loose.pgm", "frames/loose.pgm", "", 5}};
    return m;
}

RunConfig run_config(const fs::path &in, const fs::path &out) {
    RunConfig run;
    run.input_dir = in;
    run.output_dir = out;
    run.sensor.threshold = 0.1f;
    return run;
}

} // namespace

TEST(Manifest, RoundTripsThroughText) {
    const auto m = sample_manifest();
    std::stringstream ss;
    write_manifest(ss, m);
    EXPECT_EQ(read_manifest(ss), m);
}

TEST(Manifest, ValidationCatchesBrokenInvariants) {
    auto dup = sample_manifest();
    dup.entries[1].source_path = dup.entries[0].source_path;
    EXPECT_THROW(dup.validate(), ContractError);

    auto out = sample_manifest();
    out.entries[2].output_path = out.entries[0].output_path;
    EXPECT_THROW(out.validate(), ContractError);

    auto label = sample_manifest();
    label.entries[0].label = "bird";
    EXPECT_THROW(label.validate(), ContractError);

    auto order = sample_manifest();
    order.entries[2].timestamp_index = 1;
    EXPECT_THROW(order.validate(), ContractError);

    auto tab = sample_manifest();
    tab.entries[0].source_path = "a\tb.png";
    EXPECT_THROW(tab.validate(), ContractError);
}

TEST(Manifest, MalformedTextIsAParseError) {
    std::stringstream no_header("a\tb\t\t0\n");
    EXPECT_THROW(read_manifest(no_header), ParseError);

    std::stringstream ss;
    write_manifest(ss, sample_manifest());
    const std::string good = ss.str();
    std::stringstream short_row(good + "x.png\ty.pgm\n");
    EXPECT_THROW(read_manifest(short_row), ParseError);
    std::stringstream bad_index(good + "x.png\ty.pgm\t\tseven\n");
    EXPECT_THROW(read_manifest(bad_index), ParseError);
    std::stringstream stale(good + "x.png\ty.pgm\t\t2\n");
    EXPECT_THROW(read_manifest(stale), ParseError);
}

TEST(RunConfigFile, ReadsKeysOnTopOfABase) {
    RunConfig base;
    base.workers = 3;
    std::istringstream in("# defaults\n\nthreshold = 0.2\nbits=4\nmodality=spatial\n"
                          "target_fraction=0.1\ntolerance=0.005\nrecursive=false\n");
    const auto c = load_run_config(in, base);
    EXPECT_EQ(c.sensor.threshold, 0.2f);
    EXPECT_EQ(c.sensor.bits, 4);
    EXPECT_EQ(c.target_fraction, 0.1);
    EXPECT_EQ(c.tolerance, 0.005);
    EXPECT_FALSE(c.recursive);
    EXPECT_EQ(c.workers, 3u);
}

TEST(RunConfigFile, RejectsUnknownKeysAndBadValues) {
    std::istringstream unknown("thresh=0.1\n");
    EXPECT_THROW(load_run_config(unknown), ConfigError);
    std::istringstream bad("bits=four\n");
    EXPECT_THROW(load_run_config(bad), ConfigError);
    std::istringstream no_eq("threshold\n");
    EXPECT_THROW(load_run_config(no_eq), ConfigError);
    std::istringstream modality("modality=diagonal\n");
    EXPECT_THROW(load_run_config(modality), ConfigError);
    EXPECT_THROW(load_run_config(fs::path("/nonexistent/bgcam.conf")), ConfigError);
}

TEST(RunConfigFile, ValidationRejectsImpossibleRuns) {
    RunConfig c;
    c.sensor.threshold = 1.0f;
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.sensor.modality = Modality::Temporal;
    c.sensor.bits = 2;
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.target_fraction = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.workers = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Ingest, OrdersByRelativePathAndLabelsBySubdirectory) {
    TempDir dir;
    std::mt19937_64 rng(1);
    for (const char *name : {"c.pgm", "b/2.pgm", "a.pgm", "b/10.pgm", "b/deep/x.pgm"})
        write_random_pgm(rng, dir / name, 4, 4);
    write_bytes(dir / "notes.txt", "ignored");

    const auto r = ingest_images(dir.path(), true);
    ASSERT_EQ(r.frames.size(), 5u);
    std::vector<std::string> sources, labels;
    for (const auto &e : r.manifest.entries) {
        sources.push_back(e.source_path);
        labels.push_back(e.label);
    }
    EXPECT_EQ(sources, (std::vector<std::string>{"a.pgm", "b/10.pgm", "b/2.pgm", "b/deep/x.pgm", "c.pgm"}));
    EXPECT_EQ(labels, (std::vector<std::string>{"", "b", "b", "b", ""}));
    EXPECT_EQ(r.manifest.labels, (std::vector<std::string>{"b"}));
    for (std::uint32_t i = 0; i < 5; ++i) {
        EXPECT_EQ(r.frames[i].timestamp_index(), i);
        EXPECT_EQ(r.manifest.entries[i].timestamp_index, i);
    }

    EXPECT_EQ(ingest_images(dir.path(), false).frames.size(), 2u);
}

TEST(Ingest, SkipsUnreadableFilesWithoutGaps) {
    TempDir dir;
    std::mt19937_64 rng(2);
    write_random_pgm(rng, dir / "a.pgm", 4, 4);
    write_bytes(dir / "b.png", "not a png at all");
    write_random_pgm(rng, dir / "c.pgm", 4, 4);

    const auto r = ingest_images(dir.path(), true);
    ASSERT_EQ(r.frames.size(), 2u);
    ASSERT_EQ(r.skipped.size(), 1u);
    EXPECT_NE(r.skipped[0].find("b.png"), std::string::npos);
    EXPECT_EQ(r.manifest.entries[1].source_path, "c.pgm");
    EXPECT_EQ(r.manifest.entries[1].timestamp_index, 1u);
}

TEST(Ingest, EmptyOrMissingDirectoryIsAnError) {
    TempDir dir;
    EXPECT_THROW(ingest_images(dir.path(), true), ContractError);
    write_bytes(dir / "broken.pgm", "P5\n");
    EXPECT_THROW(ingest_images(dir.path(), true), ContractError);
    EXPECT_THROW(ingest_images(dir / "nope", true), ContractError);
}

TEST(Convert, SingleImageMatchesTheOracle) {
    TempDir in, out;
    std::mt19937_64 rng(3);
    write_random_pgm(rng, in / "one.pgm", 9, 7);
    const auto expected = bgcam::testing::naive_spatial_gradient(read_image(in / "one.pgm"), 0.1f);

    const auto r = convert_dataset(run_config(in.path(), out.path()));
    ASSERT_EQ(r.frames.size(), 1u);
    EXPECT_EQ(r.frames[0].values, expected);
    EXPECT_TRUE(r.skipped.empty());
    EXPECT_FALSE(r.calibration);
    EXPECT_FALSE(fs::exists(out / layout::kCalibration));
}

class ConvertRepresentations : public ::testing::TestWithParam<std::tuple<int, Modality>> {};

TEST_P(ConvertRepresentations, DenseFramesStreamAndMemoryAgree) {
    const auto [bits, modality] = GetParam();
    TempDir in, out;
    std::mt19937_64 rng(4 + bits);
    for (int i = 0; i < 6; ++i) write_random_pgm(rng, in / fmt::format("f{}.pgm", i), 12, 10);

    RunConfig run = run_config(in.path(), out.path());
    run.sensor.bits = bits;
    run.sensor.modality = modality;
    run.workers = 3;
    const auto r = convert_dataset(run);

    std::ifstream mf(out / layout::kManifest);
    const DatasetManifest manifest = read_manifest(mf);
    EXPECT_EQ(manifest, r.manifest);
    EXPECT_EQ(manifest.config_snapshot.width, 12);
    EXPECT_EQ(manifest.config_snapshot.bits, bits);

    const auto decoded = decode_stream(read_bgc(out / layout::kStream));
    ASSERT_EQ(decoded.size(), r.frames.size());
    for (std::size_t i = 0; i < decoded.size(); ++i) {
        EXPECT_EQ(decoded[i], r.frames[i]) << "frame " << i;
        const auto dense = from_dense_levels(read_pgm(out / manifest.entries[i].output_path), bits);
        EXPECT_EQ(dense, r.frames[i].values) << "frame " << i;
    }

    std::vector<std::uint8_t> previous(12 * 10, 0);
    for (std::size_t i = 0; i < r.frames.size(); ++i) {
        const auto src = read_image(in / manifest.entries[i].source_path);
        std::vector<std::uint8_t> expected;
        if (bits == 1) expected = bgcam::testing::naive_spatial_gradient(src, 0.1f);
        else expected = multibit_gradient(src, manifest.config_snapshot).values;
        if (modality == Modality::Temporal) {
            const auto current = expected;
            expected = bgcam::testing::naive_temporal(current, previous);
            previous = current;
        }
        EXPECT_EQ(r.frames[i].values, expected) << "frame " << i;
    }
}

INSTANTIATE_TEST_SUITE_P(Modes, ConvertRepresentations,
                         ::testing::Values(std::tuple{1, Modality::Spatial}, std::tuple{1, Modality::Temporal},
                                           std::tuple{3, Modality::Spatial}, std::tuple{8, Modality::Spatial}));

TEST(Convert, TemporalSingleFrameEqualsItsSpatialGradient) {
    TempDir in, out_s, out_t;
    std::mt19937_64 rng(5);
    write_random_pgm(rng, in / "x.pgm", 8, 8);
    const auto spatial = convert_dataset(run_config(in.path(), out_s.path()));
    RunConfig t = run_config(in.path(), out_t.path());
    t.sensor.modality = Modality::Temporal;
    const auto temporal = convert_dataset(t);
    EXPECT_EQ(temporal.frames[0].values, spatial.frames[0].values);
    EXPECT_EQ(temporal.frames[0].modality, Modality::Temporal);
}

TEST(Convert, PreservesClassLabels) {
    TempDir in, out;
    std::mt19937_64 rng(6);
    for (int digit = 0; digit < 10; ++digit)
        for (int k = 0; k < 3; ++k)
            write_random_pgm(rng, in / fmt::format("{}/{:03}.pgm", digit, k), 28, 28);

    RunConfig run = run_config(in.path(), out.path());
    run.target_fraction = 0.1;
    run.tolerance = 0.02;
    const auto r = convert_dataset(run);
    ASSERT_EQ(r.manifest.entries.size(), 30u);
    EXPECT_EQ(r.manifest.labels.size(), 10u);
    for (const auto &e : r.manifest.entries) {
        EXPECT_EQ(e.label, e.source_path.substr(0, 1));
        EXPECT_EQ(e.output_path, "frames/" + e.source_path);
        EXPECT_TRUE(fs::exists(out / e.output_path));
    }
    ASSERT_TRUE(r.calibration);
    EXPECT_TRUE(r.calibration->converged());
    EXPECT_EQ(r.manifest.config_snapshot.threshold, r.calibration->threshold);
    EXPECT_TRUE(fs::exists(out / layout::kCalibration));
}

TEST(Convert, MixedGeometryLeavesNoOutputBehind) {
    TempDir in, parent;
    std::mt19937_64 rng(7);
    write_random_pgm(rng, in / "a.pgm", 8, 8);
    write_random_pgm(rng, in / "b.pgm", 9, 8);
    const fs::path out = parent / "result";
    EXPECT_THROW(convert_dataset(run_config(in.path(), out)), ContractError);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Convert, CollidingOutputNamesAreRejected) {
    TempDir in, parent;
    std::mt19937_64 rng(8);
    write_random_pgm(rng, in / "a.pgm", 8, 8);
    write_frame_pgm(in / "a.ppm", read_image(in / "a.pgm"));
    fs::rename(in / "a.ppm", in / "a.pnm");
    const fs::path out = parent / "result";
    EXPECT_THROW(convert_dataset(run_config(in.path(), out)), ContractError);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Convert, RefusesANonEmptyOutputDirectory) {
    TempDir in, out;
    std::mt19937_64 rng(9);
    write_random_pgm(rng, in / "a.pgm", 8, 8);
    write_bytes(out / "keep.txt", "precious");
    EXPECT_THROW(convert_dataset(run_config(in.path(), out.path())), Error);
    EXPECT_EQ(bgcam::testing::read_bytes(out / "keep.txt"), "precious");
}

TEST(Convert, FrameStatsListEveryFrame) {
    TempDir in, out;
    std::mt19937_64 rng(10);
    for (int i = 0; i < 3; ++i) write_random_pgm(rng, in / fmt::format("{}.pgm", i), 6, 6);
    const auto r = convert_dataset(run_config(in.path(), out.path()));
    std::ifstream stats(out / layout::kFrameStats);
    std::string line;
    std::getline(stats, line);
    EXPECT_EQ(line, "frame_index,active_fraction");
    double sum = 0.0;
    int rows = 0;
    while (std::getline(stats, line)) {
        const auto comma = line.find(',');
        EXPECT_EQ(std::stoi(line.substr(0, comma)), rows);
        const double a = std::stod(line.substr(comma + 1));
        EXPECT_NEAR(a, active_fraction(r.frames[rows]), 1e-9);
        sum += a;
        ++rows;
    }
    EXPECT_EQ(rows, 3);
    EXPECT_NEAR(sum / 3, r.mean_active_fraction, 1e-9);
}
