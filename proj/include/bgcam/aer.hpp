#pragma once

#include "bgcam/frame.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bgcam {

// .bgc layout, all integers little-endian:
//
//   "BGC1" | version u8 = 1 | modality u8 | bits u8 | reserved u8 = 0
//   width u16 | height u16 | frame_rate f32 | threshold f32 | frame_count u32
//   per frame: timestamp_index u32 | event_count u32
//              event_count x (address u32 [value u8 when bits > 1])
//
// address = row * width + col. Binary streams carry no value bytes.

inline constexpr std::uint8_t kBgcVersion = 1;
inline constexpr std::size_t kBgcHeaderBytes = 24;
inline constexpr std::size_t kBgcFrameHeaderBytes = 8;

struct Event {
    std::uint32_t address = 0;
    std::uint8_t value = 1;

    bool operator==(const Event &) const = default;
};

struct EventFrame {
    std::uint32_t timestamp_index = 0;
    std::vector<Event> events; // ascending by address

    bool operator==(const EventFrame &) const = default;
};

struct StreamHeader {
    int width = 0;
    int height = 0;
    float frame_rate = 30.0f;
    float threshold = 0.0f;
    int bits = 1;
    Modality modality = Modality::Spatial;

    static StreamHeader from(const GradientFrame &frame, float frame_rate);

    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width) * height; }
    std::size_t event_bytes() const noexcept { return bits > 1 ? 5 : 4; }

    bool operator==(const StreamHeader &) const = default;
};

struct EventStream {
    StreamHeader header;
    std::vector<EventFrame> frames;

    /// Throws CorruptStream if any stream invariant is broken.
    void validate() const;

    bool operator==(const EventStream &) const = default;
};

/// Sparse readout of the active pixels, ascending by address.
EventFrame encode_frame(const GradientFrame &frame);

/// Dense frame from a sparse one. Throws CorruptStream for out-of-bounds or
/// non-ascending addresses, or for codes the header's bit depth cannot hold.
GradientFrame decode_frame(const EventFrame &event_frame, const StreamHeader &header);

/// Encodes a whole sequence. Every frame must share geometry, bits, modality
/// and threshold with the first one.
EventStream encode_stream(std::span<const GradientFrame> frames, float frame_rate);
std::vector<GradientFrame> decode_stream(const EventStream &stream);

std::vector<std::byte> serialize(const EventStream &stream);
EventStream deserialize(std::span<const std::byte> bytes);

void write_bgc(const std::filesystem::path &path, const EventStream &stream);
EventStream read_bgc(const std::filesystem::path &path);

/// Number of bytes serialize() produces for the given header and event totals.
std::size_t wire_size(const StreamHeader &header, std::size_t frame_count, std::size_t event_count);

struct BandwidthStats {
    std::vector<std::size_t> events_per_frame;
    double mean_active_fraction = 0.0;
    std::size_t wire_bytes = 0;
    std::size_t dense_bytes = 0;    // bit-packed raster, frames * ceil(W*H*bits / 8)
    double compression_ratio = 0.0; // dense_bytes / wire_bytes
};

/// Throws ContractError on a stream without frames.
BandwidthStats bandwidth_stats(const EventStream &stream);

} // namespace bgcam
