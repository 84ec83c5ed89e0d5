#include "wildsieve/grid_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace wildsieve::io {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

class ByteWriter {
public:
    void magic(const char (&tag)[5]) { bytes_.insert(bytes_.end(), tag, tag + 4); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

    void expect_magic(const char (&tag)[5]) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, tag, 4) != 0) {
            throw IoError(std::string(what_) + ": bad magic, expected " + tag);
        }
        pos_ += 4;
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw IoError(std::string(what_) + ": truncated");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    const char* what_;
};

void check_version(std::uint32_t version, const char* what) {
    if (version != kFormatVersion) {
        throw IoError(std::string(what) + ": unsupported version " + std::to_string(version));
    }
}

// Guards against absurd headers before allocating.
void check_payload(std::uint64_t floats, const ByteReader& reader, const char* what) {
    if (floats * 4 > reader.remaining()) throw IoError(std::string(what) + ": truncated payload");
}

struct PngRaster {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;
};

PngRaster read_png(const std::filesystem::path& path, png_uint_32 format) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw IoError("cannot read PNG " + path.string() + ": " + image.message);
    }
    image.format = format;
    PngRaster out;
    out.height = static_cast<int>(image.height);
    out.width = static_cast<int>(image.width);
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return out;
}

void write_png(const std::filesystem::path& path, int height, int width, png_uint_32 format,
               const std::vector<std::uint8_t>& pixels) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels.data(), 0, nullptr)) {
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::vector<std::uint8_t> encode_features(const PatchFeatureMap& map) {
    ByteWriter out;
    out.magic("WRZF");
    out.u32(kFormatVersion);
    out.u32(static_cast<std::uint32_t>(map.grid_height()));
    out.u32(static_cast<std::uint32_t>(map.grid_width()));
    out.u32(static_cast<std::uint32_t>(map.dim()));
    for (float v : map.data()) out.f32(v);
    return out.take();
}

PatchFeatureMap decode_features(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes, "WRZF");
    in.expect_magic("WRZF");
    check_version(in.u32(), "WRZF");
    const std::uint32_t h = in.u32();
    const std::uint32_t w = in.u32();
    const std::uint32_t d = in.u32();
    const std::uint64_t n = std::uint64_t{h} * w * d;
    check_payload(n, in, "WRZF");
    std::vector<float> data(static_cast<std::size_t>(n));
    for (auto& v : data) v = in.f32();
    if (in.remaining() != 0) throw IoError("WRZF: trailing bytes");
    return PatchFeatureMap(static_cast<int>(h), static_cast<int>(w), static_cast<int>(d),
                           std::move(data));
}

void write_features(const std::filesystem::path& path, const PatchFeatureMap& map) {
    write_bytes(path, encode_features(map));
}

PatchFeatureMap read_features(const std::filesystem::path& path) {
    return decode_features(read_bytes(path));
}

std::vector<std::uint8_t> encode_layer_diffs(const LayerDiffStack& stack) {
    ByteWriter out;
    out.magic("WRZL");
    out.u32(kFormatVersion);
    out.u32(static_cast<std::uint32_t>(stack.layers.size()));
    for (const auto& layer : stack.layers) {
        out.u32(static_cast<std::uint32_t>(layer.height()));
        out.u32(static_cast<std::uint32_t>(layer.width()));
        for (float v : layer.data()) out.f32(v);
    }
    return out.take();
}

LayerDiffStack decode_layer_diffs(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes, "WRZL");
    in.expect_magic("WRZL");
    check_version(in.u32(), "WRZL");
    const std::uint32_t n_layers = in.u32();
    LayerDiffStack stack;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const std::uint32_t h = in.u32();
        const std::uint32_t w = in.u32();
        const std::uint64_t n = std::uint64_t{h} * w;
        check_payload(n, in, "WRZL");
        std::vector<float> data(static_cast<std::size_t>(n));
        for (auto& v : data) v = in.f32();
        stack.layers.emplace_back(static_cast<int>(h), static_cast<int>(w), std::move(data));
    }
    if (in.remaining() != 0) throw IoError("WRZL: trailing bytes");
    return stack;
}

void write_layer_diffs(const std::filesystem::path& path, const LayerDiffStack& stack) {
    write_bytes(path, encode_layer_diffs(stack));
}

LayerDiffStack read_layer_diffs(const std::filesystem::path& path) {
    return decode_layer_diffs(read_bytes(path));
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> px(mask.grid().size());
    auto src = mask.grid().data();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = src[i] ? 255 : 0;
    write_png(path, mask.height(), mask.width(), PNG_FORMAT_GRAY, px);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
    const auto raster = read_png(path, PNG_FORMAT_GRAY);
    Grid2D<std::uint8_t> grid(raster.height, raster.width);
    auto dst = grid.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = raster.pixels[i] >= 128 ? 1 : 0;
    return BinaryMask(std::move(grid));
}

void write_gray8_png(const std::filesystem::path& path, const Grid2D<std::uint8_t>& gray) {
    write_png(path, gray.height(), gray.width(), PNG_FORMAT_GRAY, gray.values());
}

Grid2D<std::uint8_t> read_gray8_png(const std::filesystem::path& path) {
    auto raster = read_png(path, PNG_FORMAT_GRAY);
    return Grid2D<std::uint8_t>(raster.height, raster.width, std::move(raster.pixels));
}

void write_image_png(const std::filesystem::path& path, const ImageGrid& image) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(image.height()) * image.width() * 3);
    std::size_t i = 0;
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                px[i++] = to_byte(image.at(y, x, image.channels() == 3 ? c : 0));
            }
        }
    }
    write_png(path, image.height(), image.width(), PNG_FORMAT_RGB, px);
}

ImageGrid read_image_png(const std::filesystem::path& path) {
    const auto raster = read_png(path, PNG_FORMAT_RGB);
    std::vector<double> data(raster.pixels.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = raster.pixels[i] / 255.0;
    return ImageGrid(raster.height, raster.width, 3, std::move(data));
}

RgbaImage read_rgba_png(const std::filesystem::path& path) {
    const auto raster = read_png(path, PNG_FORMAT_RGBA);
    RgbaImage out{ImageGrid(raster.height, raster.width, 3), RealGrid(raster.height, raster.width)};
    std::size_t i = 0;
    for (int y = 0; y < raster.height; ++y) {
        for (int x = 0; x < raster.width; ++x) {
            for (int c = 0; c < 3; ++c) out.rgb.at(y, x, c) = raster.pixels[i++] / 255.0;
            out.alpha(y, x) = raster.pixels[i++] / 255.0;
        }
    }
    return out;
}

void write_rgba_png(const std::filesystem::path& path, const RgbaImage& image) {
    const int h = image.rgb.height();
    const int w = image.rgb.width();
    if (!image.alpha.same_shape(RealGrid(h, w))) {
        throw InvalidDimension("RGBA alpha does not match the color plane");
    }
    std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w * 4);
    std::size_t i = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                px[i++] = to_byte(image.rgb.at(y, x, image.rgb.channels() == 3 ? c : 0));
            }
            px[i++] = to_byte(image.alpha(y, x));
        }
    }
    write_png(path, h, w, PNG_FORMAT_RGBA, px);
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace wildsieve::io
