#pragma once

#include <cstdint>
#include <vector>

#include "wildsieve/gmm.hpp"
#include "wildsieve/grid.hpp"

namespace wildsieve::grabcut {

enum class TrimapLabel : std::uint8_t {
    Background = 0,
    ProbableBackground = 1,
    ProbableForeground = 2,
    Foreground = 3,
};

using Trimap = Grid2D<TrimapLabel>;

inline bool is_definite(TrimapLabel l) {
    return l == TrimapLabel::Background || l == TrimapLabel::Foreground;
}

inline bool is_foreground(TrimapLabel l) {
    return l == TrimapLabel::ProbableForeground || l == TrimapLabel::Foreground;
}

/// Gray8 raster encoding used by the CLI: < 32 background, < 96 probable
/// background, < 192 probable foreground, otherwise foreground.
TrimapLabel trimap_label_from_gray(std::uint8_t v);
std::uint8_t trimap_label_to_gray(TrimapLabel l);

struct GrabcutParams {
    double gamma = 50.0;
    int components = 5;
    int iterations = 5;
    int connectivity = 8;  // 4 or 8

    void validate() const;
};

struct GrabcutResult {
    BinaryMask mask;
    /// Data + smoothness energy after each outer iteration's cut.
    std::vector<double> energy;
};

/// Iterated GMM color modeling and graph-cut segmentation. Definite trimap
/// labels are hard constraints; probable labels only initialize the models.
GrabcutResult grabcut(const ImageGrid& image, const Trimap& trimap, const GrabcutParams& params,
                      std::uint64_t seed);

BinaryMask grabcut_refine(const ImageGrid& image, const Trimap& trimap, const GrabcutParams& params,
                          std::uint64_t seed);

}  // namespace wildsieve::grabcut
