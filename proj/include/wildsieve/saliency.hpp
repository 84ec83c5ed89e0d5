#pragma once

#include <cstddef>

#include "wildsieve/grid.hpp"

namespace wildsieve::saliency {

struct SsimParams {
    int window_size = 11;
    double sigma = 1.5;
    double c1 = 0.01 * 0.01;
    double c2 = 0.03 * 0.03;

    void validate() const;
    int radius() const { return window_size / 2; }
};

/// 1-D Gaussian taps of length window_size, renormalized to sum 1.
std::vector<double> gaussian_taps(int window_size, double sigma);

/// Per-pixel SSIM over valid-mode Gaussian windows. Output is
/// (H - window + 1) x (W - window + 1). RGB inputs are converted to luma.
RealGrid ssim_map(const ImageGrid& observed, const ImageGrid& rendered,
                  const SsimParams& params = {});

struct DinoDissimilarity {
    SaliencyGrid map;
    /// Patches where either feature had zero norm; their value is set to 1.
    std::size_t degenerate_patches = 0;
};

/// 1 - cosine similarity per patch, in [0, 2].
DinoDissimilarity dino_dissimilarity(const PatchFeatureMap& observed,
                                     const PatchFeatureMap& rendered);

/// 1 - SSIM, edge-replicated back to H x W, then area-pooled to the patch
/// grid.
SaliencyGrid ssim_dissimilarity(const ImageGrid& observed, const ImageGrid& rendered,
                                int grid_height, int grid_width, const SsimParams& params = {});

struct FusionWeights {
    double dino = 0.5;
    double ssim = 0.5;

    void validate() const;
};

/// Linear ramp from the semantic cue to the photometric cue as rendering
/// fidelity improves: w_ssim = clamp((psnr - pivot) * slope, min, max).
struct WeightSchedule {
    double pivot_db = 15.0;
    double slope_per_db = 0.1;
    double min_ssim_weight = 0.2;
    double max_ssim_weight = 0.8;
};

FusionWeights adaptive_weights(double batch_mean_psnr, const WeightSchedule& schedule = {});

/// w_dino * Z(d_dino) + w_ssim * Z(d_ssim).
SaliencyGrid fuse_saliency(const SaliencyGrid& d_dino, const SaliencyGrid& d_ssim,
                           const FusionWeights& weights);

}  // namespace wildsieve::saliency
