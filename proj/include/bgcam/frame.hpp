#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bgcam {

enum class Modality : std::uint8_t { Spatial = 0, Temporal = 1 };

std::string_view to_string(Modality m);
/// Accepts "spatial" / "temporal" (case-insensitive); throws ConfigError otherwise.
Modality parse_modality(std::string_view text);

/// Grayscale image with luminance normalized to [0,1], row-major.
/// Construction validates shape and range, so a live object is always valid.
class IntensityFrame {
public:
    IntensityFrame(int width, int height, std::vector<float> pixels, std::uint32_t timestamp_index = 0);

    /// Frame filled with a single value.
    static IntensityFrame filled(int width, int height, float value, std::uint32_t timestamp_index = 0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::uint32_t timestamp_index() const noexcept { return timestamp_index_; }
    std::span<const float> pixels() const noexcept { return pixels_; }

    float operator()(int row, int col) const noexcept {
        return pixels_[static_cast<std::size_t>(row) * width_ + col];
    }

    IntensityFrame with_timestamp(std::uint32_t timestamp_index) const;

    bool operator==(const IntensityFrame &) const = default;

private:
    int width_;
    int height_;
    std::vector<float> pixels_;
    std::uint32_t timestamp_index_;
};

struct SensorConfig {
    float threshold = 0.05f; // T, in [0,1)
    int bits = 1;            // N, in [1,8]
    Modality modality = Modality::Spatial;
    int width = 128;
    int height = 128;
    float frame_rate = 30.0f; // frames per second

    /// Throws ConfigError on any invariant violation.
    void validate() const;

    bool operator==(const SensorConfig &) const = default;
};

/// Simulated sensor output: one integer code per pixel, 0 = inactive.
struct GradientFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;
    int bits = 1;
    Modality modality = Modality::Spatial;
    float threshold = 0.0f;
    std::uint32_t timestamp_index = 0;

    static GradientFrame zeros(int width, int height, int bits, Modality modality, float threshold,
                               std::uint32_t timestamp_index);

    std::uint8_t operator()(int row, int col) const noexcept {
        return values[static_cast<std::size_t>(row) * width + col];
    }
    std::uint8_t &operator()(int row, int col) noexcept {
        return values[static_cast<std::size_t>(row) * width + col];
    }

    std::size_t pixel_count() const noexcept { return values.size(); }
    int max_code() const noexcept { return (1 << bits) - 1; }

    /// Throws ContractError if the frame breaks a GradientFrame invariant.
    void validate() const;

    bool operator==(const GradientFrame &) const = default;
};

} // namespace bgcam
