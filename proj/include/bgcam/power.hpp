#pragma once

#include "bgcam/frame.hpp"

#include <iosfwd>
#include <span>

namespace bgcam {

/// Per-pixel power figures of the binary gradient sensor (µW/pixel) and the
/// per-pixel frame energy of a conventional image sensor (pJ/pixel).
struct PowerConstants {
    double scan_power_per_pixel = 0.0024;
    double deliver_power_per_pixel = 0.0195;
    double reference_comparison_energy = 300.0;

    void validate() const;

    bool operator==(const PowerConstants &) const = default;
};

struct PowerReport {
    int bits = 1;
    double active_fraction = 0.0;
    double scan_power = 0.0;    // µW/pixel
    double deliver_power = 0.0; // µW/pixel
    double total_power = 0.0;   // µW/pixel
    double total_power_sensor = 0.0;         // µW for the whole array
    double energy_per_pixel_per_frame = 0.0; // pJ
    double frame_rate = 0.0;
    long long pixel_count = 0;
    PowerConstants constants{};
};

/// Converts a per-pixel power in µW at a given frame rate into pJ per pixel
/// per frame. All µW/pJ conversions in the project go through here.
double microwatts_to_picojoules_per_frame(double microwatts, double frame_rate);

/// P = 2^N * P_scan + alpha * P_deliver, per pixel.
/// Throws ContractError for bits outside [1,8] or alpha outside [0,1].
PowerReport estimate_power(const PowerConstants &constants, int bits, double active_fraction,
                           const SensorConfig &config);

/// report_a.total_power / report_b.total_power. Both reports must come from the
/// same constants and geometry.
double power_ratio(const PowerReport &report_a, const PowerReport &report_b);

/// CSV columns: bits,active_fraction,scan_uW,deliver_uW,total_uW,energy_pJ
void write_power_csv(std::ostream &out, std::span<const PowerReport> reports);

} // namespace bgcam
