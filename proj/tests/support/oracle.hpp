#pragma once

// Reference implementations used only by the tests. They follow the
// definitions literally and share no code with the library.

#include "bgcam/frame.hpp"

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace bgcam::testing {

/// Binary spatial gradient by explicit enumeration of every ordered pair of
/// distinct pixels in the neighbourhood {P, left, top}.
inline std::vector<std::uint8_t> naive_spatial_gradient(const IntensityFrame &f, float threshold) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(f.width()) * f.height(), 0);
    for (int r = 1; r < f.height(); ++r) {
        for (int c = 1; c < f.width(); ++c) {
            const std::pair<int, int> nu[3] = {{r, c}, {r, c - 1}, {r - 1, c}};
            bool active = false;
            for (const auto &i : nu)
                for (const auto &j : nu)
                    if (i != j && std::fabs(f(i.first, i.second) - f(j.first, j.second)) > threshold) active = true;
            out[static_cast<std::size_t>(r) * f.width() + c] = active ? 1 : 0;
        }
    }
    return out;
}

/// |a - b| pixel by pixel, then max(0, .), as written for two binary maps.
inline std::vector<std::uint8_t> naive_temporal(const std::vector<std::uint8_t> &current,
                                                const std::vector<std::uint8_t> &previous) {
    std::vector<std::uint8_t> out(current.size());
    for (std::size_t i = 0; i < current.size(); ++i) {
        const int d = std::abs(static_cast<int>(current[i]) - static_cast<int>(previous[i]));
        out[i] = static_cast<std::uint8_t>(std::max(0, d));
    }
    return out;
}

/// Power by direct arithmetic: 2^N * scan + alpha * deliver, µW/pixel.
inline double naive_total_power(int bits, double alpha, double scan = 0.0024, double deliver = 0.0195) {
    double levels = 1.0;
    for (int i = 0; i < bits; ++i) levels *= 2.0;
    return levels * scan + alpha * deliver;
}

} // namespace bgcam::testing
