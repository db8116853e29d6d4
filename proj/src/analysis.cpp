#include "bgcam/analysis.hpp"

#include "bgcam/errors.hpp"
#include "bgcam/sensor.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace bgcam {

double active_fraction(const GradientFrame &frame) {
    if (frame.values.empty()) return 0.0;
    const auto active = std::count_if(frame.values.begin(), frame.values.end(), [](std::uint8_t v) { return v > 0; });
    return static_cast<double>(active) / static_cast<double>(frame.values.size());
}

double mean_active_fraction(std::span<const GradientFrame> frames) {
    if (frames.empty()) throw ContractError("mean active fraction of an empty sequence");
    double sum = 0.0;
    for (const auto &f : frames) sum += active_fraction(f);
    return sum / static_cast<double>(frames.size());
}

// ---------------------------------------------------------------------------
// Threshold calibration

namespace {

class ContrastSample {
public:
    ContrastSample(std::span<const IntensityFrame> frames, unsigned workers) : maps_(frames.size()) {
        detail::parallel_for(frames.size(), workers, [&](std::size_t i) {
            maps_[i] = contrast_map(frames[i]);
            // Sorted contrasts turn "count above T" into a binary search.
            std::sort(maps_[i].begin(), maps_[i].end());
        });
    }

    double fraction_above(float t) const {
        double sum = 0.0;
        for (const auto &m : maps_) {
            const auto above = m.end() - std::upper_bound(m.begin(), m.end(), t);
            sum += static_cast<double>(above) / static_cast<double>(m.size());
        }
        return sum / static_cast<double>(maps_.size());
    }

private:
    std::vector<std::vector<float>> maps_;
};

} // namespace

CalibrationResult calibrate_threshold(std::span<const IntensityFrame> frames, double target_fraction,
                                      double tolerance, int max_iterations, unsigned workers) {
    if (frames.empty()) throw ContractError("calibration sample is empty");
    if (!(target_fraction > 0.0 && target_fraction < 1.0))
        throw ContractError(fmt::format("target fraction {} is outside (0,1)", target_fraction));
    if (!(tolerance >= 0.0)) throw ContractError("calibration tolerance must be nonnegative");
    if (max_iterations < 1) throw ContractError("calibration needs at least one iteration");

    const ContrastSample sample(frames, workers);
    CalibrationResult result;

    auto probe = [&](float t) {
        ++result.iterations;
        const double f = sample.fraction_above(t);
        if (result.iterations == 1 || std::fabs(f - target_fraction) < std::fabs(result.achieved_fraction - target_fraction)) {
            result.threshold = t;
            result.achieved_fraction = f;
        }
        return f;
    };

    const double at_zero = probe(0.0f);
    if (std::fabs(at_zero - target_fraction) <= tolerance) return result;
    if (at_zero < target_fraction) {
        result.status = CalibrationStatus::Unreachable;
        result.diagnostics = fmt::format("at most {:.6f} of the pixels can be active (T = 0), target {:.6f}",
                                         at_zero, target_fraction);
        return result;
    }

    float lo = 0.0f; // fraction(lo) > target
    float hi = 1.0f; // fraction(hi) < target; T = 1 itself is never probed
    while (result.iterations < max_iterations) {
        const float mid = lo + (hi - lo) / 2.0f;
        if (mid <= lo || mid >= hi) break;
        const double f = probe(mid);
        if (std::fabs(f - target_fraction) <= tolerance) {
            result.threshold = mid;
            result.achieved_fraction = f;
            result.status = CalibrationStatus::Converged;
            return result;
        }
        (f > target_fraction ? lo : hi) = mid;
    }
    result.status = CalibrationStatus::MaxIterations;
    result.diagnostics = fmt::format(
        "no threshold within {:.6f} of target {:.6f} after {} probes; bracket [{}, {}], best fraction {:.6f}",
        tolerance, target_fraction, result.iterations, lo, hi, result.achieved_fraction);
    return result;
}

std::string_view to_string(CalibrationStatus status) {
    switch (status) {
    case CalibrationStatus::Converged: return "converged";
    case CalibrationStatus::Unreachable: return "unreachable";
    case CalibrationStatus::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Edge fattening

double edge_fattening_ratio(const IntensityFrame &frame, float threshold) {
    std::size_t max_pair = 0;
    std::size_t finite_difference = 0;
    const double t = threshold;
    for (int r = 1; r < frame.height(); ++r) {
        for (int c = 1; c < frame.width(); ++c) {
            if (local_contrast(frame, r, c) > threshold) ++max_pair;
            const double dx = static_cast<double>(frame(r, c)) - frame(r, c - 1);
            const double dy = static_cast<double>(frame(r, c)) - frame(r - 1, c);
            if (std::sqrt(dx * dx + dy * dy) > t) ++finite_difference;
        }
    }
    if (finite_difference == 0)
        throw UndefinedRatio(fmt::format("no finite-difference edges above T = {}", threshold));
    return static_cast<double>(max_pair) / static_cast<double>(finite_difference);
}

// ---------------------------------------------------------------------------
// Power / accuracy sweep

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool is_gradient_modality(const std::string &m) {
    return m.starts_with("binary_gradient") || m.starts_with("multibit_gradient");
}

} // namespace

AccuracyTable parse_accuracy_csv(std::istream &in, const std::string &task_filter) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string &why) { return ParseError(fmt::format("accuracy CSV line {}: {}", line_no, why)); };

    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        header = split_csv_line(line);
    }
    if (header.empty()) throw ParseError("accuracy CSV is empty");
    auto column = [&](const char *name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw fail(fmt::format("missing column '{}'", name));
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto task_col = column("task");
    const auto modality_col = column("modality");
    const auto bits_col = column("bits");
    const auto acc_col = column("test_accuracy");

    AccuracyTable table;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw fail(fmt::format("expected {} fields, found {}", header.size(), cells.size()));

        int bits = 0;
        const auto &b = cells[bits_col];
        if (auto [p, ec] = std::from_chars(b.data(), b.data() + b.size(), bits);
            ec != std::errc{} || p != b.data() + b.size() || bits < 1 || bits > 8)
            throw fail(fmt::format("bits '{}' is not an integer in [1,8]", b));

        if (!task_filter.empty() && cells[task_col] != task_filter) continue;
        if (!is_gradient_modality(cells[modality_col])) continue;
        const auto &a = cells[acc_col];
        if (a.empty()) continue; // gap left by the harness for a missing dataset

        double acc = 0.0;
        if (auto [p, ec] = std::from_chars(a.data(), a.data() + a.size(), acc);
            ec != std::errc{} || p != a.data() + a.size())
            throw fail(fmt::format("test_accuracy '{}' is not a number", a));
        if (!(acc >= 0.0 && acc <= 1.0)) throw fail(fmt::format("test_accuracy {} is outside [0,1]", acc));
        if (!table.emplace(bits, acc).second) throw fail(fmt::format("duplicate accuracy for bits = {}", bits));
    }
    return table;
}

std::vector<PowerReport> power_sweep(const PowerConstants &constants, double active_fraction,
                                     const SensorConfig &config) {
    std::vector<PowerReport> out;
    for (int bits = 1; bits <= 8; ++bits) out.push_back(estimate_power(constants, bits, active_fraction, config));
    return out;
}

std::vector<SweepRow> build_sweep(std::span<const PowerReport> power_reports,
                                  const std::optional<AccuracyTable> &accuracy) {
    if (power_reports.empty()) throw ContractError("sweep needs at least one power report");
    std::vector<PowerReport> sorted(power_reports.begin(), power_reports.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.bits < b.bits; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].bits == sorted[i - 1].bits)
            throw ContractError(fmt::format("duplicate power report for bits = {}", sorted[i].bits));
        if (sorted[i].active_fraction != sorted[0].active_fraction)
            throw ContractError("power reports in a sweep must share the active fraction");
    }
    if (sorted.front().bits != 1) throw ContractError("sweep needs the N = 1 report for normalization");

    std::vector<SweepRow> rows;
    for (const auto &r : sorted) {
        SweepRow row;
        row.bits = r.bits;
        row.total_power = r.total_power;
        row.relative_power = power_ratio(r, sorted.front());
        if (accuracy) {
            if (auto it = accuracy->find(r.bits); it != accuracy->end()) row.accuracy = it->second;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(std::ostream &out, std::span<const SweepRow> rows) {
    out << "bits,total_uW,relative_power,accuracy\n";
    for (const auto &r : rows) {
        fmt::print(out, "{},{:.9g},{:.9g},", r.bits, r.total_power, r.relative_power);
        if (r.accuracy) fmt::print(out, "{:.9g}", *r.accuracy);
        out << '\n';
    }
}

void write_frame_stats_csv(std::ostream &out, std::span<const GradientFrame> frames) {
    out << "frame_index,active_fraction\n";
    for (const auto &f : frames) fmt::print(out, "{},{:.9g}\n", f.timestamp_index, active_fraction(f));
}

void write_calibration_csv(std::ostream &out, const CalibrationResult &result, double target_fraction,
                           double tolerance) {
    out << "threshold,achieved_fraction,iterations,status,target_fraction,tolerance\n";
    fmt::print(out, "{:.9g},{:.9g},{},{},{:.9g},{:.9g}\n", result.threshold, result.achieved_fraction,
               result.iterations, to_string(result.status), target_fraction, tolerance);
}

} // namespace bgcam
