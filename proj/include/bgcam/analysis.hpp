#pragma once

#include "bgcam/frame.hpp"
#include "bgcam/power.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bgcam {

/// Fraction of pixels with a nonzero code.
double active_fraction(const GradientFrame &frame);

/// Mean of the per-frame active fractions. Throws ContractError when empty.
double mean_active_fraction(std::span<const GradientFrame> frames);

enum class CalibrationStatus {
    Converged,
    Unreachable,   // the target lies outside the fraction range attainable for T in [0,1)
    MaxIterations, // bisection exhausted its budget; threshold is the closest seen
};

struct CalibrationResult {
    float threshold = 0.0f;
    double achieved_fraction = 0.0;
    int iterations = 0;
    CalibrationStatus status = CalibrationStatus::Converged;
    std::string diagnostics;

    bool converged() const noexcept { return status == CalibrationStatus::Converged; }
};

/// Bisection on T so that the mean spatial active fraction of `frames` lands
/// within `tolerance` of `target_fraction`. Relies on the active set shrinking
/// monotonically as T grows. Deterministic for a given input.
///
/// T = 0 is probed first; if it already meets the target it is returned.
/// Unreachable targets produce a result with status Unreachable rather than an
/// exception.
CalibrationResult calibrate_threshold(std::span<const IntensityFrame> frames, double target_fraction,
                                      double tolerance, int max_iterations = 64,
                                      unsigned workers = 1);

/// Active count of the max-pair rule over the active count of the backward
/// finite-difference magnitude sqrt((P-L)^2 + (P-T)^2), both thresholded with
/// strict > at `threshold` over interior pixels. Throws UndefinedRatio when the
/// finite-difference count is zero.
double edge_fattening_ratio(const IntensityFrame &frame, float threshold);

struct SweepRow {
    int bits = 1;
    double total_power = 0.0;    // µW/pixel
    double relative_power = 1.0; // total_power / total_power at N = 1
    std::optional<double> accuracy;
};

/// bits -> accuracy in [0,1]
using AccuracyTable = std::map<int, double>;

/// Parses the accuracy CSV written by the benchmark harness
/// (task,modality,bits,test_accuracy). Only gradient modalities
/// (binary_gradient, multibit_gradient...) are kept, optionally filtered by
/// task; rows with an empty accuracy are gaps and are skipped. Throws
/// ParseError naming the offending line for anything malformed.
AccuracyTable parse_accuracy_csv(std::istream &in, const std::string &task_filter = {});

/// Joins power reports (one per bit depth, must include N = 1) with optional
/// accuracies. Rows come back ordered by bits.
std::vector<SweepRow> build_sweep(std::span<const PowerReport> power_reports,
                                  const std::optional<AccuracyTable> &accuracy = std::nullopt);

/// Convenience: estimate_power for N = 1..8 at a single activity level.
std::vector<PowerReport> power_sweep(const PowerConstants &constants, double active_fraction,
                                     const SensorConfig &config);

void write_sweep_csv(std::ostream &out, std::span<const SweepRow> rows);
void write_frame_stats_csv(std::ostream &out, std::span<const GradientFrame> frames);
void write_calibration_csv(std::ostream &out, const CalibrationResult &result, double target_fraction,
                           double tolerance);

std::string_view to_string(CalibrationStatus status);

} // namespace bgcam
