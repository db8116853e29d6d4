#include "bgcam/aer.hpp"

#include "bgcam/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

namespace bgcam {
namespace {

constexpr std::array<char, 4> kMagic{'B', 'G', 'C', '1'};

class WireWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(static_cast<std::byte>(v)); }
    void u16(std::uint16_t v) {
        u8(static_cast<std::uint8_t>(v));
        u8(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int shift = 0; shift < 32; shift += 8) u8(static_cast<std::uint8_t>(v >> shift));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void reserve(std::size_t n) { bytes_.reserve(n); }
    std::vector<std::byte> take() { return std::move(bytes_); }

private:
    std::vector<std::byte> bytes_;
};

class WireReader {
public:
    explicit WireReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1, "u8");
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }
    std::uint16_t u16() {
        need(2, "u16");
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes_[pos_++]) << (8 * i));
        return v;
    }
    std::uint32_t u32() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }

private:
    void need(std::size_t n, const char *what) const {
        if (remaining() < n)
            throw CorruptStream(fmt::format("truncated stream: {} at offset {} needs {} bytes, {} left", what, pos_,
                                            n, remaining()));
    }

    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
};

void check_header(const StreamHeader &h) {
    if (h.width < 2 || h.height < 2 || h.width > 65535 || h.height > 65535)
        throw CorruptStream(fmt::format("invalid stream geometry {}x{}", h.width, h.height));
    if (h.bits < 1 || h.bits > 8) throw CorruptStream(fmt::format("invalid bit depth {}", h.bits));
    if (h.modality == Modality::Temporal && h.bits != 1)
        throw CorruptStream("temporal streams must be binary");
    if (!(h.frame_rate > 0.0f) || !std::isfinite(h.frame_rate))
        throw CorruptStream(fmt::format("invalid frame rate {}", h.frame_rate));
    if (!(h.threshold >= 0.0f && h.threshold < 1.0f))
        throw CorruptStream(fmt::format("invalid threshold {}", h.threshold));
}

void check_events(const EventFrame &ef, const StreamHeader &h) {
    const std::size_t n = h.pixel_count();
    const int top = (1 << h.bits) - 1;
    for (std::size_t i = 0; i < ef.events.size(); ++i) {
        const Event &e = ef.events[i];
        if (e.address >= n)
            throw CorruptStream(fmt::format("frame {}: address {} out of bounds for {}x{}", ef.timestamp_index,
                                            e.address, h.width, h.height));
        if (i > 0 && e.address <= ef.events[i - 1].address)
            throw CorruptStream(fmt::format("frame {}: addresses not strictly ascending at event {}",
                                            ef.timestamp_index, i));
        if (e.value == 0 || e.value > top)
            throw CorruptStream(fmt::format("frame {}: code {} invalid for {} bits", ef.timestamp_index, e.value,
                                            h.bits));
    }
}

} // namespace

StreamHeader StreamHeader::from(const GradientFrame &frame, float frame_rate) {
    return StreamHeader{frame.width, frame.height, frame_rate, frame.threshold, frame.bits, frame.modality};
}

void EventStream::validate() const {
    check_header(header);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (i > 0 && frames[i].timestamp_index <= frames[i - 1].timestamp_index)
            throw CorruptStream(fmt::format("frame timestamps not strictly increasing at frame {}", i));
        check_events(frames[i], header);
    }
}

EventFrame encode_frame(const GradientFrame &frame) {
    EventFrame ef;
    ef.timestamp_index = frame.timestamp_index;
    for (std::size_t i = 0; i < frame.values.size(); ++i) {
        if (frame.values[i] != 0) ef.events.push_back(Event{static_cast<std::uint32_t>(i), frame.values[i]});
    }
    return ef;
}

GradientFrame decode_frame(const EventFrame &event_frame, const StreamHeader &header) {
    check_header(header);
    check_events(event_frame, header);
    GradientFrame f = GradientFrame::zeros(header.width, header.height, header.bits, header.modality,
                                           header.threshold, event_frame.timestamp_index);
    for (const Event &e : event_frame.events) f.values[e.address] = e.value;
    return f;
}

EventStream encode_stream(std::span<const GradientFrame> frames, float frame_rate) {
    if (frames.empty()) throw ContractError("cannot encode an empty frame sequence");
    EventStream s;
    s.header = StreamHeader::from(frames.front(), frame_rate);
    s.frames.reserve(frames.size());
    for (const auto &f : frames) {
        if (f.values.size() != f.pixel_count() || f.values.size() != s.header.pixel_count())
            throw ContractError(fmt::format("frame {} has {} values for a {}x{} stream", f.timestamp_index,
                                            f.values.size(), s.header.width, s.header.height));
        if (StreamHeader::from(f, frame_rate) != s.header)
            throw ContractError(fmt::format("frame {} does not match the stream header", f.timestamp_index));
        s.frames.push_back(encode_frame(f));
    }
    try {
        s.validate();
    } catch (const CorruptStream &e) {
        throw ContractError(e.what());
    }
    return s;
}

std::vector<GradientFrame> decode_stream(const EventStream &stream) {
    std::vector<GradientFrame> out;
    out.reserve(stream.frames.size());
    for (const auto &ef : stream.frames) out.push_back(decode_frame(ef, stream.header));
    return out;
}

std::size_t wire_size(const StreamHeader &header, std::size_t frame_count, std::size_t event_count) {
    return kBgcHeaderBytes + frame_count * kBgcFrameHeaderBytes + event_count * header.event_bytes();
}

std::vector<std::byte> serialize(const EventStream &stream) {
    stream.validate();
    const auto &h = stream.header;
    std::size_t events = 0;
    for (const auto &f : stream.frames) events += f.events.size();

    WireWriter w;
    w.reserve(wire_size(h, stream.frames.size(), events));
    for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u8(kBgcVersion);
    w.u8(static_cast<std::uint8_t>(h.modality));
    w.u8(static_cast<std::uint8_t>(h.bits));
    w.u8(0);
    w.u16(static_cast<std::uint16_t>(h.width));
    w.u16(static_cast<std::uint16_t>(h.height));
    w.f32(h.frame_rate);
    w.f32(h.threshold);
    w.u32(static_cast<std::uint32_t>(stream.frames.size()));
    for (const auto &f : stream.frames) {
        w.u32(f.timestamp_index);
        w.u32(static_cast<std::uint32_t>(f.events.size()));
        for (const auto &e : f.events) {
            w.u32(e.address);
            if (h.bits > 1) w.u8(e.value);
        }
    }
    return w.take();
}

EventStream deserialize(std::span<const std::byte> bytes) {
    WireReader r(bytes);
    for (char c : kMagic) {
        if (r.u8() != static_cast<std::uint8_t>(c)) throw CorruptStream("bad magic, not a .bgc stream");
    }
    if (const auto version = r.u8(); version != kBgcVersion)
        throw CorruptStream(fmt::format("unsupported .bgc version {}", version));
    const auto modality = r.u8();
    if (modality > 1) throw CorruptStream(fmt::format("unknown modality code {}", modality));
    EventStream s;
    s.header.modality = static_cast<Modality>(modality);
    s.header.bits = r.u8();
    if (const auto reserved = r.u8(); reserved != 0)
        throw CorruptStream(fmt::format("reserved header byte is {}, expected 0", reserved));
    s.header.width = r.u16();
    s.header.height = r.u16();
    s.header.frame_rate = r.f32();
    s.header.threshold = r.f32();
    check_header(s.header);

    const std::uint32_t frame_count = r.u32();
    if (frame_count > r.remaining() / kBgcFrameHeaderBytes)
        throw CorruptStream(fmt::format("frame count {} exceeds the remaining {} bytes", frame_count, r.remaining()));
    const std::size_t event_bytes = s.header.event_bytes();
    s.frames.resize(frame_count);
    for (auto &f : s.frames) {
        f.timestamp_index = r.u32();
        const std::uint32_t count = r.u32();
        if (count > r.remaining() / event_bytes)
            throw CorruptStream(fmt::format("frame {}: event count {} exceeds the remaining {} bytes",
                                            f.timestamp_index, count, r.remaining()));
        f.events.resize(count);
        for (auto &e : f.events) {
            e.address = r.u32();
            e.value = s.header.bits > 1 ? r.u8() : 1;
        }
    }
    if (r.remaining() != 0)
        throw CorruptStream(fmt::format("{} trailing bytes after the last frame", r.remaining()));
    s.validate();
    return s;
}

void write_bgc(const std::filesystem::path &path, const EventStream &stream) {
    const auto bytes = serialize(stream);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

EventStream read_bgc(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open {}", path.string()));
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> bytes(raw.size());
    std::memcpy(bytes.data(), raw.data(), raw.size());
    return deserialize(bytes);
}

BandwidthStats bandwidth_stats(const EventStream &stream) {
    if (stream.frames.empty()) throw ContractError("bandwidth statistics need at least one frame");
    const auto &h = stream.header;
    BandwidthStats st;
    std::size_t total = 0;
    for (const auto &f : stream.frames) {
        st.events_per_frame.push_back(f.events.size());
        total += f.events.size();
    }
    const double pixels = static_cast<double>(h.pixel_count()) * static_cast<double>(stream.frames.size());
    st.mean_active_fraction = static_cast<double>(total) / pixels;
    st.wire_bytes = wire_size(h, stream.frames.size(), total);
    st.dense_bytes = stream.frames.size() * ((h.pixel_count() * static_cast<std::size_t>(h.bits) + 7) / 8);
    st.compression_ratio = static_cast<double>(st.dense_bytes) / static_cast<double>(st.wire_bytes);
    return st;
}

} // namespace bgcam
