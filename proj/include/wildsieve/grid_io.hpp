#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wildsieve/grid.hpp"

namespace wildsieve::io {

// WRZF: "WRZF", u32 version=1, u32 h, u32 w, u32 d, h*w*d f32. All LE.
std::vector<std::uint8_t> encode_features(const PatchFeatureMap& map);
PatchFeatureMap decode_features(std::span<const std::uint8_t> bytes);
void write_features(const std::filesystem::path& path, const PatchFeatureMap& map);
PatchFeatureMap read_features(const std::filesystem::path& path);

// WRZL: "WRZL", u32 version=1, u32 n, then per layer u32 H, u32 W, H*W f32.
std::vector<std::uint8_t> encode_layer_diffs(const LayerDiffStack& stack);
LayerDiffStack decode_layer_diffs(std::span<const std::uint8_t> bytes);
void write_layer_diffs(const std::filesystem::path& path, const LayerDiffStack& stack);
LayerDiffStack read_layer_diffs(const std::filesystem::path& path);

/// 8-bit grayscale PNG, 255 = foreground. Any value >= 128 reads as 1.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask_png(const std::filesystem::path& path);

/// Raw 8-bit grayscale PNG, for trimaps and other label rasters.
void write_gray8_png(const std::filesystem::path& path, const Grid2D<std::uint8_t>& gray);
Grid2D<std::uint8_t> read_gray8_png(const std::filesystem::path& path);

/// 8-bit RGB PNG; intensities are value / 255. Writes round(v * 255).
void write_image_png(const std::filesystem::path& path, const ImageGrid& image);
ImageGrid read_image_png(const std::filesystem::path& path);

struct RgbaImage {
    ImageGrid rgb;
    RealGrid alpha;
};
RgbaImage read_rgba_png(const std::filesystem::path& path);
void write_rgba_png(const std::filesystem::path& path, const RgbaImage& image);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace wildsieve::io
