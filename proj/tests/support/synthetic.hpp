#pragma once

#include "bgcam/frame.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bgcam::testing {

inline IntensityFrame random_frame(std::mt19937_64 &rng, int width, int height, std::uint32_t ts = 0) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<float> px(static_cast<std::size_t>(width) * height);
    for (auto &v : px) v = u(rng);
    return IntensityFrame(width, height, std::move(px), ts);
}

/// Pixels on the grid k / 2^levels_log2. Dyadic values make 1 - v and v + c
/// exact in float, so symmetry properties can be checked bit for bit.
inline IntensityFrame random_dyadic_frame(std::mt19937_64 &rng, int width, int height, int levels_log2 = 8,
                                          int max_level = -1) {
    const int top = max_level < 0 ? (1 << levels_log2) : max_level;
    std::uniform_int_distribution<int> u(0, top);
    std::vector<float> px(static_cast<std::size_t>(width) * height);
    for (auto &v : px) v = std::ldexp(static_cast<float>(u(rng)), -levels_log2);
    return IntensityFrame(width, height, std::move(px));
}

inline IntensityFrame map_pixels(const IntensityFrame &f, float (*fn)(float, float), float arg) {
    std::vector<float> px(f.pixels().begin(), f.pixels().end());
    for (auto &v : px) v = fn(v, arg);
    return IntensityFrame(f.width(), f.height(), std::move(px), f.timestamp_index());
}

/// Binary GradientFrame with zero border and random interior.
inline GradientFrame random_binary_frame(std::mt19937_64 &rng, int width, int height, double density,
                                         std::uint32_t ts = 0) {
    std::bernoulli_distribution b(density);
    GradientFrame g = GradientFrame::zeros(width, height, 1, Modality::Spatial, 0.1f, ts);
    for (int r = 1; r < height; ++r)
        for (int c = 1; c < width; ++c) g(r, c) = b(rng) ? 1 : 0;
    return g;
}

/// N-bit GradientFrame with zero border; a fraction `density` of interior
/// pixels carries a uniformly drawn nonzero code.
inline GradientFrame random_code_frame(std::mt19937_64 &rng, int width, int height, int bits, double density,
                                       std::uint32_t ts = 0) {
    std::bernoulli_distribution b(density);
    std::uniform_int_distribution<int> code(1, (1 << bits) - 1);
    GradientFrame g = GradientFrame::zeros(width, height, bits, Modality::Spatial, 0.2f, ts);
    for (int r = 1; r < height; ++r)
        for (int c = 1; c < width; ++c) g(r, c) = b(rng) ? static_cast<std::uint8_t>(code(rng)) : 0;
    return g;
}

/// White Gaussian noise, blurred with a separable Gaussian of the given sigma
/// (reflecting boundary, radius 4 sigma), then min-max normalized to [0,1].
inline IntensityFrame blurred_noise_frame(std::mt19937_64 &rng, int width, int height, double sigma,
                                          std::uint32_t ts = 0) {
    std::normal_distribution<double> n(0.0, 1.0);
    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<double> a(count), b(count);
    for (auto &v : a) v = n(rng);

    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) sum += kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    for (auto &k : kernel) k /= sum;
    auto reflect = [](int i, int n) {
        while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
        return i;
    };
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * a[r * width + reflect(c + k, width)];
            b[r * width + c] = acc;
        }
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * b[reflect(r + k, height) * width + c];
            a[r * width + c] = acc;
        }
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    const double l = *lo, span = *hi - *lo;
    std::vector<float> px(count);
    for (std::size_t i = 0; i < count; ++i) px[i] = std::clamp(static_cast<float>((a[i] - l) / span), 0.0f, 1.0f);
    return IntensityFrame(width, height, std::move(px), ts);
}

/// 0/1 checkerboard.
inline IntensityFrame checkerboard(int width, int height) {
    std::vector<float> px(static_cast<std::size_t>(width) * height);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) px[r * width + c] = static_cast<float>((r + c) % 2);
    return IntensityFrame(width, height, std::move(px));
}

} // namespace bgcam::testing
