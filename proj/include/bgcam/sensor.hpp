#pragma once

#include "bgcam/frame.hpp"

#include <span>
#include <vector>

namespace bgcam {

/// Largest absolute luminance difference among the pixel at (row, col), its
/// left neighbour and its top neighbour. Requires 1 <= row < height and
/// 1 <= col < width; throws std::out_of_range otherwise.
float local_contrast(const IntensityFrame &frame, int row, int col);

/// local_contrast for every pixel; row 0 and column 0 hold 0.
std::vector<float> contrast_map(const IntensityFrame &frame);

/// Binary spatial gradient: a pixel fires when its local contrast strictly
/// exceeds config.threshold. Border pixels (row 0 / column 0) never fire.
/// Requires config.bits == 1 and matching geometry (ConfigError).
GradientFrame spatial_gradient(const IntensityFrame &frame, const SensorConfig &config);

/// Temporal gradient of two consecutive binary spatial frames: the pixels
/// whose spatial bit changed. Inputs must be binary Spatial frames with equal
/// geometry and previous.timestamp_index + 1 == current.timestamp_index.
GradientFrame temporal_gradient(const GradientFrame &current, const GradientFrame &previous);

/// N-bit spatial gradient. Contrast above T is quantized uniformly onto the
/// codes 1 .. 2^N - 1:
///
///     code = clamp(ceil((c - T) / (1 - T) * (2^N - 1)), 1, 2^N - 1)   if c > T
///     code = 0                                                         otherwise
///
/// With N == 1 this is exactly spatial_gradient.
GradientFrame multibit_gradient(const IntensityFrame &frame, const SensorConfig &config);

/// Runs the sensor over a video. Spatial mode yields one frame per input
/// (multibit when config.bits > 1). Temporal mode XORs each spatial frame with
/// its predecessor; the first frame's predecessor is all zeros.
///
/// Frames must be non-empty, share the geometry and have strictly increasing
/// timestamps. Spatial frames are computed on up to `workers` threads; the
/// result is identical to a sequential left-to-right evaluation.
std::vector<GradientFrame> convert_stream(std::span<const IntensityFrame> frames,
                                          const SensorConfig &config, unsigned workers = 1);

} // namespace bgcam
