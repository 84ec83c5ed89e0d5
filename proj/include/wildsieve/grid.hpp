#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wildsieve/error.hpp"

namespace wildsieve {

/// Dense row-major 2-D array. Dimensions are fixed at construction.
template <typename T>
class Grid2D {
public:
    Grid2D() = default;

    Grid2D(int height, int width, T fill = T{}) : height_(height), width_(width) {
        if (height < 0 || width < 0) {
            throw InvalidDimension("grid dimensions must be non-negative");
        }
        data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
    }

    Grid2D(int height, int width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (height < 0 || width < 0 ||
            data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
            throw InvalidDimension("grid data length does not match " + std::to_string(height) +
                                   "x" + std::to_string(width));
        }
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int y, int x) { return data_[index(y, x)]; }
    const T& operator()(int y, int x) const { return data_[index(y, x)]; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }
    const std::vector<T>& values() const { return data_; }

    bool same_shape(const Grid2D& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    bool operator==(const Grid2D&) const = default;

private:
    std::size_t index(int y, int x) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

using RealGrid = Grid2D<double>;

/// Unbounded per-patch scores (dissimilarities, z-scored and fused saliency).
using SaliencyGrid = RealGrid;

/// Real-valued mask with every value in [0, 1].
class SoftMask {
public:
    SoftMask() = default;
    explicit SoftMask(RealGrid grid);

    static SoftMask ones(int height, int width);

    int height() const { return grid_.height(); }
    int width() const { return grid_.width(); }
    double operator()(int y, int x) const { return grid_(y, x); }
    const RealGrid& grid() const { return grid_; }
    double sum() const;

    /// 1 - M, used for static-region evaluation.
    SoftMask complement() const;

private:
    RealGrid grid_;
};

/// Mask whose values are exactly 0 or 1.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int height, int width) : grid_(height, width, 0) {}
    explicit BinaryMask(Grid2D<std::uint8_t> grid);

    int height() const { return grid_.height(); }
    int width() const { return grid_.width(); }
    std::uint8_t operator()(int y, int x) const { return grid_(y, x); }
    void set(int y, int x, bool on) { grid_(y, x) = on ? 1 : 0; }
    const Grid2D<std::uint8_t>& grid() const { return grid_; }

    std::size_t count() const;
    bool any() const { return count() > 0; }
    SoftMask to_soft() const;

    bool operator==(const BinaryMask&) const = default;

private:
    Grid2D<std::uint8_t> grid_;
};

/// H x W x C image, row-major, channel-last, intensities in [0, 1].
class ImageGrid {
public:
    ImageGrid() = default;
    ImageGrid(int height, int width, int channels, double fill = 0.0);
    ImageGrid(int height, int width, int channels, std::vector<double> data);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }

    double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
    double at(int y, int x, int c) const { return data_[index(y, x, c)]; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const ImageGrid& other) const {
        return height_ == other.height_ && width_ == other.width_ &&
               channels_ == other.channels_;
    }

    /// Luma 0.299 R + 0.587 G + 0.114 B; single-channel images are copied.
    RealGrid grayscale() const;

    /// Throws InvalidArgument if any value is non-finite or outside [0, 1].
    void validate() const;

    bool operator==(const ImageGrid&) const = default;

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// h x w x d patch embeddings, row-major, channel-last, stored as f32.
class PatchFeatureMap {
public:
    PatchFeatureMap() = default;
    PatchFeatureMap(int grid_height, int grid_width, int dim, std::vector<float> data);

    int grid_height() const { return grid_height_; }
    int grid_width() const { return grid_width_; }
    int dim() const { return dim_; }

    std::span<const float> feature(int y, int x) const;
    std::span<const float> data() const { return data_; }

    bool operator==(const PatchFeatureMap&) const = default;

private:
    int grid_height_ = 0;
    int grid_width_ = 0;
    int dim_ = 0;
    std::vector<float> data_;
};

/// Per-layer perceptual difference maps D^(l), stored as f32 like the file
/// format that carries them.
struct LayerDiffStack {
    std::vector<Grid2D<float>> layers;

    bool operator==(const LayerDiffStack&) const = default;
};

}  // namespace wildsieve
