#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wildsieve/grid.hpp"
#include "wildsieve/saliency.hpp"

namespace wildsieve::metrics {

/// MSE below this floor reports kSaturatedPsnr with the saturated flag.
inline constexpr double kMseFloor = 1e-10;
inline constexpr double kSaturatedPsnr = 100.0;

struct PsnrResult {
    double db = 0.0;
    bool saturated = false;
};

/// -10 log10( sum (I - I')^2 M / (C sum M) ), channels averaged.
PsnrResult masked_psnr(const ImageGrid& observed, const ImageGrid& rendered, const SoftMask& mask);

/// Full-frame PSNR with the same saturation rule.
PsnrResult psnr(const ImageGrid& observed, const ImageGrid& rendered);

/// SSIM map weighted by the mask aligned to the valid-mode SSIM grid: the
/// mask is center-cropped by the window radius, then area-pooled.
double masked_ssim(const ImageGrid& observed, const ImageGrid& rendered, const SoftMask& mask,
                   const saliency::SsimParams& params = {});

/// Mean of the unmasked SSIM map.
double mean_ssim(const ImageGrid& observed, const ImageGrid& rendered,
                 const saliency::SsimParams& params = {});

/// Sum over layers of the masked mean of D^(l), with the mask area-pooled to
/// each layer's resolution.
double masked_lpips(const LayerDiffStack& diffs, const SoftMask& mask);

struct IouRecall {
    double iou = 0.0;
    double recall = 0.0;
};

/// IoU is 1 when both masks are empty; recall is 1 when gt is empty.
IouRecall mask_iou_recall(const BinaryMask& pred, const BinaryMask& gt);

struct FrameMetrics {
    std::string frame;
    double psnr_masked = 0.0;
    double ssim_masked = 0.0;
    std::optional<double> lpips_masked;
    bool saturated = false;
};

struct MaskQuality {
    double miou = 0.0;
    double recall = 0.0;
};

struct MetricsReport {
    std::vector<FrameMetrics> per_frame;
    std::optional<MaskQuality> mask_quality;

    /// Arithmetic means over frames; lpips only when every frame has it.
    nlohmann::json to_json() const;
};

}  // namespace wildsieve::metrics
