#include "bgcam/cli.hpp"

#include "bgcam/aer.hpp"
#include "bgcam/analysis.hpp"
#include "bgcam/errors.hpp"
#include "bgcam/image_io.hpp"
#include "bgcam/pipeline.hpp"
#include "bgcam/power.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace fs = std::filesystem;

namespace bgcam::cli {
namespace {

// Flags that map one-to-one onto RunConfig keys; applied after any config
// file so that flags win.
struct RunFlags {
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option *>> options;
    bool no_recursive = false;
    std::string config_path;

    void add(CLI::App &app, const std::string &flag, const std::string &key, const std::string &help) {
        options.emplace_back(key, app.add_option(flag, values[key], help));
    }

    RunConfig resolve(RunConfig base = {}) const {
        if (!config_path.empty()) {
            base = load_run_config(fs::path(config_path), std::move(base));
        } else if (const char *env = std::getenv(kConfigEnvVar); env && *env) {
            base = load_run_config(fs::path(env), std::move(base));
        }
        for (const auto &[key, opt] : options)
            if (opt->count() > 0) apply_config_entry(base, key, values.at(key));
        if (no_recursive) base.recursive = false;
        return base;
    }
};

void write_file(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out << text;
}

std::string_view category(const std::exception &e) {
    if (dynamic_cast<const ConfigError *>(&e)) return "config error";
    if (dynamic_cast<const ContractError *>(&e)) return "contract error";
    if (dynamic_cast<const CorruptStream *>(&e)) return "corrupt stream";
    if (dynamic_cast<const ParseError *>(&e)) return "parse error";
    if (dynamic_cast<const ImageError *>(&e)) return "image error";
    if (dynamic_cast<const UndefinedRatio *>(&e)) return "undefined ratio";
    return "error";
}

const char *kAlphaNote =
    "note: deliver power scales linearly with the active fraction; alpha = 0.1 is the measured "
    "activity of a real binary gradient sensor and is the default operating point";

int do_convert(const RunFlags &flags, std::ostream &out, std::ostream &err) {
    const RunConfig run = flags.resolve();
    const ConvertResult r = convert_dataset(run);
    for (const auto &s : r.skipped) fmt::print(err, "warning: skipped {}\n", s);
    fmt::print(out, "converted {} frames ({}x{}, {} bits, {}) into {}\n", r.frames.size(),
               r.manifest.config_snapshot.width, r.manifest.config_snapshot.height, r.manifest.config_snapshot.bits,
               to_string(r.manifest.config_snapshot.modality), run.output_dir.string());
    if (r.calibration)
        fmt::print(out, "calibrated threshold {} ({}, {} probes, fraction {:.4f})\n", r.calibration->threshold,
                   to_string(r.calibration->status), r.calibration->iterations, r.calibration->achieved_fraction);
    else
        fmt::print(out, "threshold {}\n", r.manifest.config_snapshot.threshold);
    fmt::print(out, "mean active fraction {:.4f}\n", r.mean_active_fraction);
    if (!r.skipped.empty()) {
        fmt::print(out, "{} input file(s) skipped\n", r.skipped.size());
        return kExitSkippedInputs;
    }
    return kExitOk;
}

int do_calibrate(const RunFlags &flags, double target, double tolerance, const std::string &output,
                 std::ostream &out, std::ostream &err) {
    const RunConfig run = flags.resolve();
    if (run.input_dir.empty()) throw ConfigError("calibrate needs --input");
    IngestResult ingested = ingest_images(run.input_dir, run.recursive);
    for (const auto &s : ingested.skipped) fmt::print(err, "warning: skipped {}\n", s);
    const auto &frames = ingested.frames;
    const std::size_t k = std::min(run.calibration_sample, frames.size());
    std::vector<IntensityFrame> sample;
    for (std::size_t i = 0; i < k; ++i) sample.push_back(frames[i * frames.size() / k]);
    const auto result = calibrate_threshold(sample, target, tolerance, 64, run.workers);

    const std::string csv = [&] {
        std::ostringstream ss;
        write_calibration_csv(ss, result, target, tolerance);
        return ss.str();
    }();
    if (output.empty()) out << csv;
    else write_file(output, csv);
    fmt::print(output.empty() ? err : out, "threshold {} -> active fraction {:.4f} ({}, {} probes over {} frames)\n",
               result.threshold, result.achieved_fraction, to_string(result.status), result.iterations, k);
    if (!result.converged()) {
        fmt::print(err, "calibration failed: {}\n", result.diagnostics);
        return kExitDataError;
    }
    return kExitOk;
}

int do_encode(const std::string &input, const std::string &output, int bits, const std::string &modality,
              float threshold, float frame_rate, std::ostream &out) {
    const fs::path dir(input);
    if (!fs::is_directory(dir)) throw ContractError(fmt::format("input directory {} does not exist", input));
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ContractError(fmt::format("no .pgm files in {}", input));

    const Modality m = parse_modality(modality);
    std::vector<GradientFrame> frames;
    for (const auto &f : files) {
        const GrayImage img = read_pgm(f);
        GradientFrame g;
        g.width = img.width;
        g.height = img.height;
        g.values = from_dense_levels(img, bits);
        g.bits = bits;
        g.modality = m;
        g.threshold = threshold;
        g.timestamp_index = static_cast<std::uint32_t>(frames.size());
        frames.push_back(std::move(g));
    }
    const EventStream stream = encode_stream(frames, frame_rate);
    write_bgc(output, stream);
    const auto stats = bandwidth_stats(stream);
    fmt::print(out, "encoded {} frames into {} ({} bytes, compression {:.2f}x)\n", frames.size(), output,
               stats.wire_bytes, stats.compression_ratio);
    return kExitOk;
}

int do_decode(const std::string &input, const std::string &output, std::ostream &out) {
    const EventStream stream = read_bgc(input);
    fs::create_directories(output);
    for (const auto &g : decode_stream(stream))
        write_pgm(fs::path(output) / fmt::format("frame_{:06}.pgm", g.timestamp_index), g.width, g.height,
                  to_dense_levels(g));
    fmt::print(out, "decoded {} frames ({}x{}, {} bits, {}) into {}\n", stream.frames.size(), stream.header.width,
               stream.header.height, stream.header.bits, to_string(stream.header.modality), output);
    return kExitOk;
}

int do_stats(const std::string &input, const std::string &output, std::ostream &out) {
    const EventStream stream = read_bgc(input);
    const auto st = bandwidth_stats(stream);
    if (!output.empty()) {
        std::ostringstream ss;
        ss << "frame_index,event_count,active_fraction\n";
        const double pixels = static_cast<double>(stream.header.pixel_count());
        for (std::size_t i = 0; i < stream.frames.size(); ++i)
            fmt::print(ss, "{},{},{:.9g}\n", stream.frames[i].timestamp_index, st.events_per_frame[i],
                       static_cast<double>(st.events_per_frame[i]) / pixels);
        write_file(output, ss.str());
    }
    std::size_t total = 0;
    for (auto n : st.events_per_frame) total += n;
    fmt::print(out,
               "frames: {}\nevents: {}\nmean active fraction: {:.6f}\nwire bytes: {}\ndense bytes: {}\n"
               "compression ratio: {:.3f}\n",
               stream.frames.size(), total, st.mean_active_fraction, st.wire_bytes, st.dense_bytes,
               st.compression_ratio);
    return kExitOk;
}

SensorConfig power_config(float frame_rate, int width, int height) {
    SensorConfig c;
    c.frame_rate = frame_rate;
    c.width = width;
    c.height = height;
    return c;
}

int do_power(int bits, double alpha, float frame_rate, int width, int height, const std::string &output,
             std::ostream &out, std::ostream &err) {
    const PowerReport r = estimate_power(PowerConstants{}, bits, alpha, power_config(frame_rate, width, height));
    std::ostringstream csv;
    write_power_csv(csv, std::span(&r, 1));
    if (output.empty()) {
        out << csv.str();
        err << kAlphaNote << '\n';
    } else {
        write_file(output, csv.str());
        fmt::print(out, "N = {}, alpha = {}: {:.6g} uW/pixel ({:.6g} uW for {}x{}), {:.6g} pJ/pixel/frame at {} fps\n",
                   bits, alpha, r.total_power, r.total_power_sensor, width, height, r.energy_per_pixel_per_frame,
                   frame_rate);
        out << kAlphaNote << '\n';
    }
    return kExitOk;
}

int do_sweep(double alpha, const std::string &accuracy_csv, const std::string &task, float frame_rate, int width,
             int height, const std::string &output, std::ostream &out, std::ostream &err) {
    const auto reports = power_sweep(PowerConstants{}, alpha, power_config(frame_rate, width, height));
    std::optional<AccuracyTable> accuracy;
    if (!accuracy_csv.empty()) {
        std::ifstream in(accuracy_csv);
        if (!in) throw ParseError(fmt::format("cannot open accuracy table {}", accuracy_csv));
        accuracy = parse_accuracy_csv(in, task);
    }
    const auto rows = build_sweep(reports, accuracy);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    if (output.empty()) {
        out << csv.str();
        err << kAlphaNote << '\n';
    } else {
        write_file(output, csv.str());
        for (const auto &r : rows)
            fmt::print(out, "N = {}: {:8.3f}x power{}\n", r.bits, r.relative_power,
                       r.accuracy ? fmt::format(", accuracy {:.4f}", *r.accuracy) : std::string{});
        out << kAlphaNote << '\n';
    }
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Binary gradient camera simulator", "bgcam"};
    app.require_subcommand(1);

    auto *convert = app.add_subcommand("convert", "Simulate the sensor over an image directory");
    RunFlags convert_flags;
    convert->add_option("--config", convert_flags.config_path, "key=value config file");
    convert_flags.add(*convert, "-i,--input", "input", "Input image directory");
    convert_flags.add(*convert, "-o,--output", "output", "Output directory (absent or empty)");
    convert_flags.add(*convert, "-t,--threshold", "threshold", "Contrast threshold T in [0,1)");
    convert_flags.add(*convert, "-b,--bits", "bits", "Gradient bits N in [1,8]");
    convert_flags.add(*convert, "-m,--modality", "modality", "spatial or temporal");
    convert_flags.add(*convert, "--frame-rate", "frame_rate", "Frames per second");
    convert_flags.add(*convert, "--target-fraction", "target_fraction", "Calibrate T to this active fraction");
    convert_flags.add(*convert, "--tolerance", "tolerance", "Calibration tolerance");
    convert_flags.add(*convert, "--calibration-sample", "calibration_sample", "Frames used for calibration");
    convert_flags.add(*convert, "-j,--workers", "workers", "Worker threads");
    convert->add_flag("--no-recursive", convert_flags.no_recursive, "Do not descend into subdirectories");

    auto *calibrate = app.add_subcommand("calibrate", "Find T for a target active fraction");
    RunFlags calibrate_flags;
    double cal_target = 0.1, cal_tolerance = 0.01;
    std::string cal_output;
    calibrate->add_option("--config", calibrate_flags.config_path, "key=value config file");
    calibrate_flags.add(*calibrate, "-i,--input", "input", "Input image directory");
    calibrate_flags.add(*calibrate, "--calibration-sample", "calibration_sample", "Frames used for calibration");
    calibrate_flags.add(*calibrate, "-j,--workers", "workers", "Worker threads");
    calibrate->add_flag("--no-recursive", calibrate_flags.no_recursive, "Do not descend into subdirectories");
    calibrate->add_option("--target-fraction", cal_target, "Target active fraction")->capture_default_str();
    calibrate->add_option("--tolerance", cal_tolerance, "Allowed deviation from the target")->capture_default_str();
    calibrate->add_option("-o,--output", cal_output, "Calibration report CSV");

    auto *encode = app.add_subcommand("encode", "Pack dense gradient PGMs into a .bgc stream");
    std::string enc_input, enc_output, enc_modality = "spatial";
    int enc_bits = 1;
    float enc_threshold = 0.05f, enc_rate = 30.0f;
    encode->add_option("-i,--input", enc_input, "Directory of dense gradient .pgm files")->required();
    encode->add_option("-o,--output", enc_output, ".bgc file to write")->required();
    encode->add_option("-b,--bits", enc_bits, "Gradient bits N")->capture_default_str();
    encode->add_option("-m,--modality", enc_modality, "spatial or temporal")->capture_default_str();
    encode->add_option("-t,--threshold", enc_threshold, "Threshold recorded in the header")->capture_default_str();
    encode->add_option("--frame-rate", enc_rate, "Frame rate recorded in the header")->capture_default_str();

    auto *decode = app.add_subcommand("decode", "Expand a .bgc stream into dense PGMs");
    std::string dec_input, dec_output;
    decode->add_option("-i,--input", dec_input, ".bgc file")->required();
    decode->add_option("-o,--output", dec_output, "Output directory")->required();

    auto *stats = app.add_subcommand("stats", "Bandwidth statistics of a .bgc stream");
    std::string stats_input, stats_output;
    stats->add_option("-i,--input", stats_input, ".bgc file")->required();
    stats->add_option("-o,--output", stats_output, "Per-frame statistics CSV");

    auto *power = app.add_subcommand("power", "Sensor power estimate");
    int pw_bits = 1, pw_width = 128, pw_height = 128;
    double pw_alpha = 0.1;
    float pw_rate = 30.0f;
    std::string pw_output;
    power->add_option("-b,--bits", pw_bits, "Gradient bits N")->capture_default_str();
    power->add_option("-a,--active-fraction", pw_alpha, "Active pixel fraction")->capture_default_str();
    power->add_option("--frame-rate", pw_rate, "Frames per second")->capture_default_str();
    power->add_option("--width", pw_width, "Sensor width")->capture_default_str();
    power->add_option("--height", pw_height, "Sensor height")->capture_default_str();
    power->add_option("-o,--output", pw_output, "CSV file (default: standard output)");

    auto *sweep = app.add_subcommand("sweep", "Power (and accuracy) for N = 1..8");
    double sw_alpha = 0.1;
    std::string sw_accuracy, sw_task, sw_output;
    int sw_width = 128, sw_height = 128;
    float sw_rate = 30.0f;
    sweep->add_option("-a,--alpha", sw_alpha, "Active pixel fraction")->capture_default_str();
    sweep->add_option("--accuracy-csv", sw_accuracy, "Accuracy table (task,modality,bits,test_accuracy)");
    sweep->add_option("--task", sw_task, "Only use accuracy rows of this task");
    sweep->add_option("--frame-rate", sw_rate, "Frames per second")->capture_default_str();
    sweep->add_option("--width", sw_width, "Sensor width")->capture_default_str();
    sweep->add_option("--height", sw_height, "Sensor height")->capture_default_str();
    sweep->add_option("-o,--output", sw_output, "CSV file (default: standard output)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (convert->parsed()) return do_convert(convert_flags, out, err);
        if (calibrate->parsed()) return do_calibrate(calibrate_flags, cal_target, cal_tolerance, cal_output, out, err);
        if (encode->parsed())
            return do_encode(enc_input, enc_output, enc_bits, enc_modality, enc_threshold, enc_rate, out);
        if (decode->parsed()) return do_decode(dec_input, dec_output, out);
        if (stats->parsed()) return do_stats(stats_input, stats_output, out);
        if (power->parsed()) return do_power(pw_bits, pw_alpha, pw_rate, pw_width, pw_height, pw_output, out, err);
        if (sweep->parsed())
            return do_sweep(sw_alpha, sw_accuracy, sw_task, sw_rate, sw_width, sw_height, sw_output, out, err);
    } catch (const std::exception &e) {
        fmt::print(err, "{}: {}\n", category(e), e.what());
        return kExitDataError;
    }
    err << app.help();
    return kExitUsage;
}

} // namespace bgcam::cli
