#include "bgcam/image_io.hpp"

#include "bgcam/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include <fmt/format.h>
#include <png.h>

namespace bgcam {
namespace {

// Decoded samples before luminance conversion; channels is 1 (gray) or 3 (RGB).
struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    int maxval = 255;
    std::vector<std::uint16_t> samples;
};

std::string lower_extension(const std::filesystem::path &path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// ---------------------------------------------------------------------------
// PNM (P1-P6)

class PnmParser {
public:
    PnmParser(std::vector<unsigned char> bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

    RawImage parse() {
        if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] < '1' || bytes_[1] > '6')
            fail("not a PNM file");
        const int kind = bytes_[1] - '0';
        pos_ = 2;
        RawImage img;
        img.width = header_int("width");
        img.height = header_int("height");
        const bool bilevel = kind == 1 || kind == 4;
        img.maxval = bilevel ? 1 : header_int("maxval");
        img.channels = (kind == 3 || kind == 6) ? 3 : 1;
        if (img.width < 1 || img.height < 1) fail("empty image");
        if (img.maxval < 1 || img.maxval > 65535) fail("maxval outside [1,65535]");
        const std::size_t count = static_cast<std::size_t>(img.width) * img.height * img.channels;
        img.samples.resize(count);

        if (kind <= 3) {
            for (auto &s : img.samples) s = static_cast<std::uint16_t>(kind == 1 ? bit_token() : ascii_sample(img.maxval));
        } else if (kind == 4) {
            ++pos_; // single whitespace after the header
            const std::size_t row_bytes = (static_cast<std::size_t>(img.width) + 7) / 8;
            if (bytes_.size() < pos_ + row_bytes * img.height) fail("truncated pixel data");
            for (int r = 0; r < img.height; ++r)
                for (int c = 0; c < img.width; ++c)
                    img.samples[static_cast<std::size_t>(r) * img.width + c] =
                        (bytes_[pos_ + r * row_bytes + c / 8] >> (7 - c % 8)) & 1;
        } else {
            ++pos_;
            const std::size_t sample_bytes = img.maxval > 255 ? 2 : 1;
            if (bytes_.size() < pos_ + count * sample_bytes) fail("truncated pixel data");
            for (std::size_t i = 0; i < count; ++i) {
                std::uint16_t v = bytes_[pos_ + i * sample_bytes];
                if (sample_bytes == 2) v = static_cast<std::uint16_t>((v << 8) | bytes_[pos_ + i * 2 + 1]);
                if (v > img.maxval) fail("sample exceeds maxval");
                img.samples[i] = v;
            }
        }
        if (bilevel) {
            // PBM stores 1 for black.
            for (auto &s : img.samples) s = static_cast<std::uint16_t>(1 - s);
        }
        return img;
    }

private:
    [[noreturn]] void fail(const char *why) const { throw ImageError(fmt::format("{}: {}", name_, why)); }

    void skip_space() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    int header_int(const char *what) {
        skip_space();
        long v = 0;
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]) && v <= 1'000'000) v = v * 10 + (bytes_[pos_++] - '0');
        if (pos_ == start) fail(what);
        if (v > 1'000'000) fail("header value too large");
        return static_cast<int>(v);
    }

    int ascii_sample(int maxval) {
        const int v = header_int("sample");
        if (v > maxval) fail("sample exceeds maxval");
        return v;
    }

    int bit_token() {
        skip_space();
        if (pos_ >= bytes_.size() || (bytes_[pos_] != '0' && bytes_[pos_] != '1')) fail("bad PBM sample");
        return bytes_[pos_++] - '0';
    }

    std::vector<unsigned char> bytes_;
    std::string name_;
    std::size_t pos_ = 0;
};

std::vector<unsigned char> slurp(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError(fmt::format("{}: cannot open", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RawImage read_pnm(const std::filesystem::path &path) { return PnmParser(slurp(path), path.string()).parse(); }

// ---------------------------------------------------------------------------
// PNG via libpng. Only trivially destructible locals live between setjmp and
// a possible longjmp; buffers are owned by the caller's state object.

struct PngState {
    std::string error;
    std::vector<png_byte> data;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int channels = 0;
    int depth = 0;
};

void png_error_handler(png_structp png, png_const_charp message) {
    static_cast<PngState *>(png_get_error_ptr(png))->error = message;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

bool decode_png(std::FILE *fp, PngState &st) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, png_error_handler, png_warning_handler);
    if (!png) {
        st.error = "out of memory";
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        st.error = "out of memory";
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    st.width = png_get_image_width(png, info);
    st.height = png_get_image_height(png, info);
    st.channels = png_get_channels(png, info);
    st.depth = png_get_bit_depth(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    st.data.resize(row_bytes * st.height);
    st.rows.resize(st.height);
    for (png_uint_32 r = 0; r < st.height; ++r) st.rows[r] = st.data.data() + r * row_bytes;
    png_read_image(png, st.rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

RawImage read_png(const std::filesystem::path &path) {
    const std::unique_ptr<std::FILE, int (*)(std::FILE *)> fp(std::fopen(path.string().c_str(), "rb"), &std::fclose);
    if (!fp) throw ImageError(fmt::format("{}: cannot open", path.string()));
    png_byte signature[8] = {};
    if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
        throw ImageError(fmt::format("{}: not a PNG file", path.string()));
    std::rewind(fp.get());

    PngState st;
    if (!decode_png(fp.get(), st)) throw ImageError(fmt::format("{}: {}", path.string(), st.error));
    if ((st.channels != 1 && st.channels != 3) || (st.depth != 8 && st.depth != 16))
        throw ImageError(fmt::format("{}: unsupported PNG layout ({} channels, {} bits)", path.string(), st.channels,
                                     st.depth));

    RawImage img;
    img.width = static_cast<int>(st.width);
    img.height = static_cast<int>(st.height);
    img.channels = st.channels;
    img.maxval = st.depth == 16 ? 65535 : 255;
    const std::size_t count = static_cast<std::size_t>(img.width) * img.height * img.channels;
    img.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        img.samples[i] = st.depth == 16 ? static_cast<std::uint16_t>((st.data[2 * i] << 8) | st.data[2 * i + 1])
                                        : st.data[i];
    }
    return img;
}

RawImage read_raw(const std::filesystem::path &path) {
    const auto ext = lower_extension(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm" || ext == ".pbm") return read_pnm(path);
    throw ImageError(fmt::format("{}: unsupported image extension", path.string()));
}

} // namespace

bool is_image_file(const std::filesystem::path &path) {
    const auto ext = lower_extension(path);
    return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm" || ext == ".pbm";
}

IntensityFrame read_image(const std::filesystem::path &path, std::uint32_t timestamp_index) {
    const RawImage img = read_raw(path);
    if (img.width < 2 || img.height < 2)
        throw ImageError(fmt::format("{}: image is {}x{}, need at least 2x2", path.string(), img.width, img.height));
    const double scale = 1.0 / img.maxval;
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    std::vector<float> pixels(n);
    for (std::size_t i = 0; i < n; ++i) {
        double y;
        if (img.channels == 1) {
            y = img.samples[i] * scale;
        } else {
            const auto *px = &img.samples[3 * i];
            y = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) * scale;
        }
        pixels[i] = static_cast<float>(std::clamp(y, 0.0, 1.0));
    }
    return IntensityFrame(img.width, img.height, std::move(pixels), timestamp_index);
}

GrayImage read_pgm(const std::filesystem::path &path) {
    RawImage raw = read_pnm(path);
    if (raw.channels != 1) throw ImageError(fmt::format("{}: expected a single-channel graymap", path.string()));
    return GrayImage{raw.width, raw.height, raw.maxval, std::move(raw.samples)};
}

void write_pgm(const std::filesystem::path &path, int width, int height, std::span<const std::uint8_t> levels) {
    if (levels.size() != static_cast<std::size_t>(width) * height)
        throw ContractError("write_pgm: level count does not match geometry");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageError(fmt::format("{}: cannot open for writing", path.string()));
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char *>(levels.data()), static_cast<std::streamsize>(levels.size()));
    if (!out) throw ImageError(fmt::format("{}: write failed", path.string()));
}

std::vector<std::uint8_t> to_dense_levels(const GradientFrame &frame) {
    const int top = frame.max_code();
    std::vector<std::uint8_t> out(frame.values.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>((frame.values[i] * 255 + top / 2) / top);
    return out;
}

std::vector<std::uint8_t> from_dense_levels(const GrayImage &image, int bits) {
    if (bits < 1 || bits > 8) throw ContractError(fmt::format("bits {} is outside [1,8]", bits));
    if (image.maxval != 255) throw ImageError("dense gradient images must have maxval 255");
    const int top = (1 << bits) - 1;
    std::vector<std::uint8_t> out(image.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int level = image.samples[i];
        const int code = (level * top + 127) / 255;
        if ((code * 255 + top / 2) / top != level)
            throw ImageError(fmt::format("level {} at pixel {} is not a {}-bit gradient code", level, i, bits));
        out[i] = static_cast<std::uint8_t>(code);
    }
    return out;
}

} // namespace bgcam
