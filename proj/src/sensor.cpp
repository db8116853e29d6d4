#include "bgcam/sensor.hpp"

#include "bgcam/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace bgcam {
namespace {

inline float contrast_at(const IntensityFrame &f, int row, int col) noexcept {
    const float p = f(row, col);
    const float left = f(row, col - 1);
    const float top = f(row - 1, col);
    return std::max({std::fabs(p - left), std::fabs(p - top), std::fabs(left - top)});
}

void check_geometry(const IntensityFrame &frame, const SensorConfig &config) {
    config.validate();
    if (frame.width() != config.width || frame.height() != config.height)
        throw ConfigError(fmt::format("frame is {}x{} but the sensor is configured for {}x{}",
                                      frame.width(), frame.height(), config.width, config.height));
}

void check_binary_spatial(const GradientFrame &f, const char *which) {
    f.validate();
    if (f.modality != Modality::Spatial)
        throw ContractError(fmt::format("{} frame is not a spatial gradient", which));
    if (f.bits != 1) throw ContractError(fmt::format("{} frame is not binary", which));
}

GradientFrame xor_frames(const GradientFrame &current, const GradientFrame &previous) {
    GradientFrame out = GradientFrame::zeros(current.width, current.height, 1, Modality::Temporal,
                                             current.threshold, current.timestamp_index);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = static_cast<std::uint8_t>(current.values[i] ^ previous.values[i]);
    return out;
}

} // namespace

float local_contrast(const IntensityFrame &frame, int row, int col) {
    if (row < 1 || row >= frame.height() || col < 1 || col >= frame.width())
        throw std::out_of_range(fmt::format("({}, {}) has no complete neighbourhood in a {}x{} frame", row,
                                            col, frame.width(), frame.height()));
    return contrast_at(frame, row, col);
}

std::vector<float> contrast_map(const IntensityFrame &frame) {
    std::vector<float> out(frame.pixels().size(), 0.0f);
    const int w = frame.width();
    for (int r = 1; r < frame.height(); ++r)
        for (int c = 1; c < w; ++c) out[static_cast<std::size_t>(r) * w + c] = contrast_at(frame, r, c);
    return out;
}

GradientFrame spatial_gradient(const IntensityFrame &frame, const SensorConfig &config) {
    check_geometry(frame, config);
    if (config.bits != 1)
        throw ConfigError(fmt::format("spatial_gradient is binary; config has {} bits", config.bits));
    GradientFrame out = GradientFrame::zeros(frame.width(), frame.height(), 1, Modality::Spatial,
                                             config.threshold, frame.timestamp_index());
    const float t = config.threshold;
    for (int r = 1; r < frame.height(); ++r)
        for (int c = 1; c < frame.width(); ++c) out(r, c) = contrast_at(frame, r, c) > t ? 1 : 0;
    return out;
}

GradientFrame temporal_gradient(const GradientFrame &current, const GradientFrame &previous) {
    check_binary_spatial(current, "current");
    check_binary_spatial(previous, "previous");
    if (current.width != previous.width || current.height != previous.height)
        throw ContractError(fmt::format("frame geometry differs: {}x{} vs {}x{}", current.width,
                                        current.height, previous.width, previous.height));
    if (previous.timestamp_index + 1 != current.timestamp_index)
        throw ContractError(fmt::format("frames {} and {} are not consecutive", previous.timestamp_index,
                                        current.timestamp_index));
    return xor_frames(current, previous);
}

GradientFrame multibit_gradient(const IntensityFrame &frame, const SensorConfig &config) {
    check_geometry(frame, config);
    if (config.modality != Modality::Spatial)
        throw ConfigError("multibit gradients are spatial only");
    GradientFrame out = GradientFrame::zeros(frame.width(), frame.height(), config.bits, Modality::Spatial,
                                             config.threshold, frame.timestamp_index());
    const float t = config.threshold;
    const double levels = static_cast<double>(out.max_code());
    const double span = 1.0 - static_cast<double>(t);
    for (int r = 1; r < frame.height(); ++r) {
        for (int c = 1; c < frame.width(); ++c) {
            const float contrast = contrast_at(frame, r, c);
            if (!(contrast > t)) continue;
            const double scaled = std::ceil((static_cast<double>(contrast) - t) / span * levels);
            out(r, c) = static_cast<std::uint8_t>(std::clamp(scaled, 1.0, levels));
        }
    }
    return out;
}

std::vector<GradientFrame> convert_stream(std::span<const IntensityFrame> frames,
                                          const SensorConfig &config, unsigned workers) {
    if (frames.empty()) throw ContractError("convert_stream needs at least one frame");
    config.validate();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].width() != frames[0].width() || frames[i].height() != frames[0].height())
            throw ContractError(fmt::format("frame {} is {}x{}, expected {}x{}", i, frames[i].width(),
                                            frames[i].height(), frames[0].width(), frames[0].height()));
        if (i > 0 && frames[i].timestamp_index() <= frames[i - 1].timestamp_index())
            throw ContractError(fmt::format("timestamps must increase strictly (frame {} has {} after {})", i,
                                            frames[i].timestamp_index(), frames[i - 1].timestamp_index()));
    }

    SensorConfig spatial = config;
    spatial.modality = Modality::Spatial;
    std::vector<GradientFrame> out(frames.size());
    detail::parallel_for(frames.size(), workers, [&](std::size_t i) {
        out[i] = spatial.bits == 1 ? spatial_gradient(frames[i], spatial) : multibit_gradient(frames[i], spatial);
    });
    if (config.modality == Modality::Spatial) return out;

    // In place, right to left, so each step still sees the spatial predecessor.
    for (std::size_t i = out.size(); i-- > 1;) out[i] = xor_frames(out[i], out[i - 1]);
    out[0].modality = Modality::Temporal;
    return out;
}

} // namespace bgcam
