#include "bgcam/frame.hpp"

#include "bgcam/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <fmt/format.h>

namespace bgcam {

std::string_view to_string(Modality m) {
    return m == Modality::Temporal ? "temporal" : "spatial";
}

Modality parse_modality(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "spatial") return Modality::Spatial;
    if (lower == "temporal") return Modality::Temporal;
    throw ConfigError(fmt::format("unknown modality '{}' (expected spatial or temporal)", text));
}

IntensityFrame::IntensityFrame(int width, int height, std::vector<float> pixels,
                               std::uint32_t timestamp_index)
    : width_(width), height_(height), pixels_(std::move(pixels)), timestamp_index_(timestamp_index) {
    if (width < 2 || height < 2)
        throw ContractError(fmt::format("frame must be at least 2x2, got {}x{}", width, height));
    if (pixels_.size() != static_cast<std::size_t>(width) * height)
        throw ContractError(fmt::format("frame {}x{} needs {} pixels, got {}", width, height,
                                        static_cast<std::size_t>(width) * height, pixels_.size()));
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
        const float v = pixels_[i];
        if (!(v >= 0.0f && v <= 1.0f))
            throw ContractError(fmt::format("pixel {} = {} is outside [0,1]", i, v));
    }
}

IntensityFrame IntensityFrame::filled(int width, int height, float value, std::uint32_t timestamp_index) {
    const auto n = width > 0 && height > 0 ? static_cast<std::size_t>(width) * height : 0;
    return IntensityFrame(width, height, std::vector<float>(n, value), timestamp_index);
}

IntensityFrame IntensityFrame::with_timestamp(std::uint32_t timestamp_index) const {
    IntensityFrame copy = *this;
    copy.timestamp_index_ = timestamp_index;
    return copy;
}

void SensorConfig::validate() const {
    if (!(threshold >= 0.0f && threshold < 1.0f))
        throw ConfigError(fmt::format("threshold {} is outside [0,1)", threshold));
    if (bits < 1 || bits > 8) throw ConfigError(fmt::format("bits {} is outside [1,8]", bits));
    if (modality == Modality::Temporal && bits != 1)
        throw ConfigError("temporal modality is binary; bits must be 1");
    if (width < 2 || height < 2 || width > 65535 || height > 65535)
        throw ConfigError(fmt::format("sensor geometry {}x{} is outside [2,65535]", width, height));
    if (!(frame_rate > 0.0f) || !std::isfinite(frame_rate))
        throw ConfigError(fmt::format("frame rate {} must be positive", frame_rate));
}

GradientFrame GradientFrame::zeros(int width, int height, int bits, Modality modality, float threshold,
                                   std::uint32_t timestamp_index) {
    GradientFrame f;
    f.width = width;
    f.height = height;
    f.values.assign(static_cast<std::size_t>(width) * height, 0);
    f.bits = bits;
    f.modality = modality;
    f.threshold = threshold;
    f.timestamp_index = timestamp_index;
    return f;
}

void GradientFrame::validate() const {
    if (width < 2 || height < 2)
        throw ContractError(fmt::format("gradient frame must be at least 2x2, got {}x{}", width, height));
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw ContractError("gradient frame value count does not match its geometry");
    if (bits < 1 || bits > 8) throw ContractError(fmt::format("bits {} is outside [1,8]", bits));
    if (modality == Modality::Temporal && bits != 1)
        throw ContractError("temporal gradient frames must be binary");
    const int top = max_code();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > top)
            throw ContractError(fmt::format("code {} at {} exceeds {} for {} bits", values[i], i, top, bits));
    }
    for (int c = 0; c < width; ++c)
        if ((*this)(0, c) != 0) throw ContractError("first row of a gradient frame must be zero");
    for (int r = 0; r < height; ++r)
        if ((*this)(r, 0) != 0) throw ContractError("first column of a gradient frame must be zero");
}

} // namespace bgcam
