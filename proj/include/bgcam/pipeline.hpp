#pragma once

#include "bgcam/analysis.hpp"
#include "bgcam/frame.hpp"
#include "bgcam/manifest.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bgcam {

/// Environment variable naming a default key=value config file.
inline constexpr const char *kConfigEnvVar = "BGCAM_CONFIG";

struct RunConfig {
    SensorConfig sensor;        // width/height are taken from the input
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    bool recursive = true;
    std::optional<double> target_fraction; // calibrate T when set
    double tolerance = 0.01;
    std::size_t calibration_sample = 64;   // frames, evenly spaced over the input
    unsigned workers = 1;

    void validate() const;
};

/// Applies one key=value setting. Unknown keys and bad values throw ConfigError.
void apply_config_entry(RunConfig &config, std::string_view key, std::string_view value);

/// Reads a flat key=value file ('#' comments, blank lines allowed) on top of `base`.
RunConfig load_run_config(std::istream &in, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path &path, RunConfig base = {});

struct IngestResult {
    std::vector<IntensityFrame> frames;
    DatasetManifest manifest; // provisional: output paths are empty
    std::vector<std::string> skipped; // "path: reason"
};

/// Loads every image under `directory` in lexicographic order of the relative
/// path, assigning timestamps 0, 1, 2, ... Images inside a subdirectory get the
/// name of their top-level subdirectory as label. Undecodable files are
/// reported in `skipped`; a directory yielding no frames throws ContractError.
IngestResult ingest_images(const std::filesystem::path &directory, bool recursive);

struct ConvertResult {
    DatasetManifest manifest;
    std::optional<CalibrationResult> calibration;
    std::vector<std::string> skipped;
    std::vector<GradientFrame> frames;
    double mean_active_fraction = 0.0;
};

/// Output directory layout produced by convert_dataset.
namespace layout {
inline constexpr const char *kFramesDir = "frames";
inline constexpr const char *kManifest = "manifest.tsv";
inline constexpr const char *kStream = "stream.bgc";
inline constexpr const char *kFrameStats = "frame_stats.csv";
inline constexpr const char *kCalibration = "calibration.csv";
} // namespace layout

/// Ingests run.input_dir, optionally calibrates T, runs the sensor and writes
/// dense PGM frames, a .bgc stream, per-frame statistics and the manifest into
/// run.output_dir (which must be absent or empty). On failure everything this
/// call created is removed again.
ConvertResult convert_dataset(const RunConfig &run);

} // namespace bgcam
