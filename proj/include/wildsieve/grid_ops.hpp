#pragma once

#include <vector>

#include "wildsieve/grid.hpp"

namespace wildsieve {

/// Area-weighted downsampling. Each output cell averages the source pixels
/// under its back-projected rectangle, with partially covered pixels
/// weighted by their exact covered fraction.
RealGrid area_pool(const RealGrid& src, int target_height, int target_width);

/// (x - mean) / population stddev over the whole grid. Near-constant grids
/// (stddev < kZscoreMinSigma) map to all zeros.
inline constexpr double kZscoreMinSigma = 1e-8;
RealGrid zscore(const RealGrid& src);

/// out = 1 where src > tau (strict).
BinaryMask threshold_mask(const SoftMask& src, double tau);
BinaryMask threshold_mask(const RealGrid& src, double tau);

enum class MorphMode { Dilate, Erode };

/// Square structuring element of side `kernel` (odd), applied `iterations`
/// times. Pixels outside the image count as background.
BinaryMask morph(const BinaryMask& src, MorphMode mode, int kernel, int iterations);

/// 8-connected labeling. Background is -1, components are numbered 0.. in
/// raster order of their first pixel.
struct ComponentLabels {
    Grid2D<int> labels;
    std::vector<int> areas;
};
ComponentLabels label_components(const BinaryMask& src);

/// Removes 8-connected components whose pixel count is below
/// min_area_fraction * H * W.
BinaryMask filter_small_components(const BinaryMask& src, double min_area_fraction);

/// Each source cell is replicated into a block; output pixel (y, x) takes
/// source cell (y * h / H, x * w / W).
BinaryMask upsample_nearest(const BinaryMask& src, int height, int width);

}  // namespace wildsieve
