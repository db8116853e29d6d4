#include "bgcam/pipeline.hpp"

#include "bgcam/aer.hpp"
#include "bgcam/errors.hpp"
#include "bgcam/image_io.hpp"
#include "bgcam/sensor.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace fs = std::filesystem;

namespace bgcam {
namespace {

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
    T v{};
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw ConfigError(fmt::format("config key '{}': cannot parse '{}'", key, text));
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, text));
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Removes whatever convert_dataset created unless dismissed.
class OutputGuard {
public:
    explicit OutputGuard(fs::path dir) : dir_(std::move(dir)) {
        if (fs::exists(dir_)) {
            if (!fs::is_directory(dir_)) throw ConfigError(fmt::format("{} is not a directory", dir_.string()));
            if (!fs::is_empty(dir_)) throw ConfigError(fmt::format("output directory {} is not empty", dir_.string()));
        } else {
            fs::create_directories(dir_);
            created_ = true;
        }
    }
    OutputGuard(const OutputGuard &) = delete;
    OutputGuard &operator=(const OutputGuard &) = delete;

    ~OutputGuard() {
        if (dismissed_) return;
        std::error_code ec;
        if (created_) {
            fs::remove_all(dir_, ec);
        } else {
            for (const auto &entry : fs::directory_iterator(dir_, ec)) fs::remove_all(entry.path(), ec);
        }
    }

    void dismiss() noexcept { dismissed_ = true; }

private:
    fs::path dir_;
    bool created_ = false;
    bool dismissed_ = false;
};

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out << text;
    if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

template <typename Fn>
std::string to_text(Fn &&fn) {
    std::ostringstream ss;
    fn(ss);
    return ss.str();
}

} // namespace

void RunConfig::validate() const {
    SensorConfig probe = sensor;
    probe.width = std::max(probe.width, 2);
    probe.height = std::max(probe.height, 2);
    probe.validate();
    if (workers < 1) throw ConfigError("worker count must be at least 1");
    if (target_fraction && !(*target_fraction > 0.0 && *target_fraction < 1.0))
        throw ConfigError(fmt::format("target fraction {} is outside (0,1)", *target_fraction));
    if (!(tolerance >= 0.0)) throw ConfigError("calibration tolerance must be nonnegative");
    if (calibration_sample < 1) throw ConfigError("calibration sample must hold at least one frame");
}

void apply_config_entry(RunConfig &c, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "threshold") c.sensor.threshold = parse_value<float>(key, value);
    else if (key == "bits") c.sensor.bits = parse_value<int>(key, value);
    else if (key == "modality") c.sensor.modality = parse_modality(value);
    else if (key == "frame_rate") c.sensor.frame_rate = parse_value<float>(key, value);
    else if (key == "input") c.input_dir = fs::path(std::string(value));
    else if (key == "output") c.output_dir = fs::path(std::string(value));
    else if (key == "recursive") c.recursive = parse_bool(key, value);
    else if (key == "target_fraction") {
        if (value.empty() || value == "none") c.target_fraction.reset();
        else c.target_fraction = parse_value<double>(key, value);
    } else if (key == "tolerance") c.tolerance = parse_value<double>(key, value);
    else if (key == "calibration_sample") c.calibration_sample = parse_value<std::size_t>(key, value);
    else if (key == "workers") c.workers = parse_value<unsigned>(key, value);
    else throw ConfigError(fmt::format("unknown config key '{}'", key));
}

RunConfig load_run_config(std::istream &in, RunConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("config line {}: expected key=value", line_no));
        apply_config_entry(base, trim(body.substr(0, eq)), body.substr(eq + 1));
    }
    return base;
}

RunConfig load_run_config(const fs::path &path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    return load_run_config(in, std::move(base));
}

IngestResult ingest_images(const fs::path &directory, bool recursive) {
    if (!fs::is_directory(directory))
        throw ContractError(fmt::format("input directory {} does not exist", directory.string()));

    std::vector<fs::path> files;
    auto collect = [&](const fs::directory_entry &entry) {
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    };
    if (recursive) {
        for (const auto &entry : fs::recursive_directory_iterator(directory)) collect(entry);
    } else {
        for (const auto &entry : fs::directory_iterator(directory)) collect(entry);
    }

    std::vector<std::pair<std::string, fs::path>> ordered;
    for (const auto &f : files) ordered.emplace_back(fs::relative(f, directory).generic_string(), f);
    std::sort(ordered.begin(), ordered.end());

    IngestResult result;
    std::set<std::string> labels;
    for (const auto &[rel, path] : ordered) {
        const auto index = static_cast<std::uint32_t>(result.frames.size());
        try {
            result.frames.push_back(read_image(path, index));
        } catch (const Error &e) {
            result.skipped.push_back(e.what());
            continue;
        }
        const fs::path rel_path(rel);
        std::string label;
        if (std::distance(rel_path.begin(), rel_path.end()) > 1) label = rel_path.begin()->string();
        if (!label.empty()) labels.insert(label);
        result.manifest.entries.push_back(ManifestEntry{rel, {}, label, index});
    }
    if (result.frames.empty())
        throw ContractError(fmt::format("no decodable images under {}", directory.string()));
    result.manifest.labels.assign(labels.begin(), labels.end());
    return result;
}

ConvertResult convert_dataset(const RunConfig &run) {
    run.validate();
    if (run.input_dir.empty() || run.output_dir.empty()) throw ConfigError("convert needs input and output paths");

    OutputGuard guard(run.output_dir);
    IngestResult ingested = ingest_images(run.input_dir, run.recursive);
    auto &frames = ingested.frames;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].width() != frames[0].width() || frames[i].height() != frames[0].height())
            throw ContractError(fmt::format("{} is {}x{}, but {} is {}x{}; a dataset must share one geometry",
                                            ingested.manifest.entries[i].source_path, frames[i].width(),
                                            frames[i].height(), ingested.manifest.entries[0].source_path,
                                            frames[0].width(), frames[0].height()));
    }

    ConvertResult result;
    result.skipped = std::move(ingested.skipped);
    SensorConfig sensor = run.sensor;
    sensor.width = frames[0].width();
    sensor.height = frames[0].height();

    if (run.target_fraction) {
        const std::size_t n = frames.size();
        const std::size_t k = std::min(run.calibration_sample, n);
        std::vector<IntensityFrame> sample;
        sample.reserve(k);
        for (std::size_t i = 0; i < k; ++i) sample.push_back(frames[i * n / k]);
        auto cal = calibrate_threshold(sample, *run.target_fraction, run.tolerance, 64, run.workers);
        if (cal.status == CalibrationStatus::Unreachable)
            throw Error(fmt::format("threshold calibration failed: {}", cal.diagnostics));
        sensor.threshold = cal.threshold;
        result.calibration = std::move(cal);
    }
    sensor.validate();

    result.frames = convert_stream(frames, sensor, run.workers);
    result.mean_active_fraction = mean_active_fraction(result.frames);

    DatasetManifest manifest = std::move(ingested.manifest);
    manifest.config_snapshot = sensor;
    for (auto &e : manifest.entries) {
        fs::path out = fs::path(layout::kFramesDir) / fs::path(e.source_path);
        out.replace_extension(".pgm");
        e.output_path = out.generic_string();
    }
    manifest.validate();
    const EventStream stream = encode_stream(result.frames, sensor.frame_rate);

    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const fs::path out = run.output_dir / manifest.entries[i].output_path;
        fs::create_directories(out.parent_path());
        const auto &g = result.frames[i];
        write_pgm(out, g.width, g.height, to_dense_levels(g));
    }
    write_bgc(run.output_dir / layout::kStream, stream);
    write_text(run.output_dir / layout::kFrameStats,
               to_text([&](std::ostream &os) { write_frame_stats_csv(os, result.frames); }));
    if (result.calibration) {
        write_text(run.output_dir / layout::kCalibration, to_text([&](std::ostream &os) {
                       write_calibration_csv(os, *result.calibration, *run.target_fraction, run.tolerance);
                   }));
    }
    write_text(run.output_dir / layout::kManifest, to_text([&](std::ostream &os) { write_manifest(os, manifest); }));
    guard.dismiss();

    result.manifest = std::move(manifest);
    return result;
}

} // namespace bgcam
