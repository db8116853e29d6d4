#include "bgcam/power.hpp"

#include "bgcam/errors.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace bgcam {

void PowerConstants::validate() const {
    if (!(scan_power_per_pixel > 0.0) || !(deliver_power_per_pixel > 0.0) ||
        !(reference_comparison_energy > 0.0))
        throw ContractError("power constants must be strictly positive");
}

double microwatts_to_picojoules_per_frame(double microwatts, double frame_rate) {
    if (!(frame_rate > 0.0)) throw ContractError(fmt::format("frame rate {} must be positive", frame_rate));
    // µW / (frames/s) = µJ per frame; 1 µJ = 1e6 pJ.
    return microwatts / frame_rate * 1e6;
}

PowerReport estimate_power(const PowerConstants &constants, int bits, double active_fraction,
                           const SensorConfig &config) {
    constants.validate();
    config.validate();
    if (bits < 1 || bits > 8) throw ContractError(fmt::format("bits {} is outside [1,8]", bits));
    if (!(active_fraction >= 0.0 && active_fraction <= 1.0))
        throw ContractError(fmt::format("active fraction {} is outside [0,1]", active_fraction));

    PowerReport r;
    r.bits = bits;
    r.active_fraction = active_fraction;
    r.scan_power = std::ldexp(constants.scan_power_per_pixel, bits);
    r.deliver_power = active_fraction * constants.deliver_power_per_pixel;
    r.total_power = r.scan_power + r.deliver_power;
    r.pixel_count = static_cast<long long>(config.width) * config.height;
    r.total_power_sensor = r.total_power * static_cast<double>(r.pixel_count);
    r.frame_rate = config.frame_rate;
    r.energy_per_pixel_per_frame = microwatts_to_picojoules_per_frame(r.total_power, r.frame_rate);
    r.constants = constants;
    return r;
}

double power_ratio(const PowerReport &report_a, const PowerReport &report_b) {
    if (report_a.constants != report_b.constants)
        throw ContractError("power reports were computed with different constants");
    if (report_a.pixel_count != report_b.pixel_count)
        throw ContractError("power reports describe different sensor geometries");
    if (report_b.total_power == 0.0) throw ContractError("power ratio with zero denominator");
    return report_a.total_power / report_b.total_power;
}

void write_power_csv(std::ostream &out, std::span<const PowerReport> reports) {
    out << "bits,active_fraction,scan_uW,deliver_uW,total_uW,energy_pJ\n";
    for (const auto &r : reports) {
        fmt::print(out, "{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", r.bits, r.active_fraction, r.scan_power,
                   r.deliver_power, r.total_power, r.energy_per_pixel_per_frame);
    }
}

} // namespace bgcam
