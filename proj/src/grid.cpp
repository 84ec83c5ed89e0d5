#include "wildsieve/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wildsieve {

SoftMask::SoftMask(RealGrid grid) : grid_(std::move(grid)) {
    for (double v : grid_.data()) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw InvalidArgument("soft mask values must be finite and in [0, 1]");
        }
    }
}

SoftMask SoftMask::ones(int height, int width) { return SoftMask(RealGrid(height, width, 1.0)); }

double SoftMask::sum() const {
    return std::accumulate(grid_.data().begin(), grid_.data().end(), 0.0);
}

SoftMask SoftMask::complement() const {
    RealGrid out(height(), width());
    auto src = grid_.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = 1.0 - src[i];
    return SoftMask(std::move(out));
}

BinaryMask::BinaryMask(Grid2D<std::uint8_t> grid) : grid_(std::move(grid)) {
    for (auto v : grid_.data()) {
        if (v > 1) throw InvalidArgument("binary mask values must be 0 or 1");
    }
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (auto v : grid_.data()) n += v;
    return n;
}

SoftMask BinaryMask::to_soft() const {
    RealGrid out(height(), width());
    auto src = grid_.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    return SoftMask(std::move(out));
}

ImageGrid::ImageGrid(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0 || (channels != 1 && channels != 3)) {
        throw InvalidDimension("image must have non-negative size and 1 or 3 channels");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

ImageGrid::ImageGrid(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (height < 0 || width < 0 || (channels != 1 && channels != 3)) {
        throw InvalidDimension("image must have non-negative size and 1 or 3 channels");
    }
    if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
        throw InvalidDimension("image data length does not match H*W*C");
    }
}

RealGrid ImageGrid::grayscale() const {
    RealGrid out(height_, width_);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            out(y, x) = channels_ == 1 ? at(y, x, 0)
                                       : 0.299 * at(y, x, 0) + 0.587 * at(y, x, 1) +
                                             0.114 * at(y, x, 2);
        }
    }
    return out;
}

void ImageGrid::validate() const {
    for (double v : data_) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw InvalidArgument("image values must be finite and in [0, 1]");
        }
    }
}

PatchFeatureMap::PatchFeatureMap(int grid_height, int grid_width, int dim, std::vector<float> data)
    : grid_height_(grid_height), grid_width_(grid_width), dim_(dim), data_(std::move(data)) {
    if (grid_height < 0 || grid_width < 0 || dim < 0) {
        throw InvalidDimension("feature map dimensions must be non-negative");
    }
    if (data_.size() != static_cast<std::size_t>(grid_height) * grid_width * dim) {
        throw InvalidDimension("feature data length does not match h*w*d");
    }
    if (!std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); })) {
        throw InvalidArgument("feature values must be finite");
    }
}

std::span<const float> PatchFeatureMap::feature(int y, int x) const {
    const std::size_t offset =
        (static_cast<std::size_t>(y) * grid_width_ + static_cast<std::size_t>(x)) * dim_;
    return std::span<const float>(data_).subspan(offset, static_cast<std::size_t>(dim_));
}

}  // namespace wildsieve
