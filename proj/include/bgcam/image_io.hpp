#pragma once

#include "bgcam/frame.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bgcam {

/// True for the extensions read_image understands (.pgm .ppm .pnm .pbm .png).
bool is_image_file(const std::filesystem::path &path);

/// Decodes an 8- or 16-bit gray or color image (PNM or PNG) into a normalized
/// luminance frame. Samples are divided by the format's maximum code; color
/// is reduced with Y = 0.299 R + 0.587 G + 0.114 B. Alpha is ignored.
IntensityFrame read_image(const std::filesystem::path &path, std::uint32_t timestamp_index = 0);

/// Binary-format 8-bit PGM (P5).
void write_pgm(const std::filesystem::path &path, int width, int height,
               std::span<const std::uint8_t> levels);

struct GrayImage {
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<std::uint16_t> samples;
};

/// Raw single-channel samples of a PGM (P2 or P5). Throws ImageError for
/// anything else.
GrayImage read_pgm(const std::filesystem::path &path);

/// Maps gradient codes onto 0..255 so every bit depth spans the full gray
/// range: level = round(code * 255 / (2^N - 1)). Binary frames become 0/255.
std::vector<std::uint8_t> to_dense_levels(const GradientFrame &frame);

/// Inverse of to_dense_levels for a GrayImage with maxval 255. Throws
/// ImageError when a level is not the image of any code.
std::vector<std::uint8_t> from_dense_levels(const GrayImage &image, int bits);

} // namespace bgcam
