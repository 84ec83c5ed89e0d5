#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wildsieve/grid.hpp"

namespace wildsieve::augment {

/// RGBA sprite cropped to the tight bounding box of its alpha > 0.5 footprint.
class PasteObject {
public:
    /// Crops rgb/alpha to the footprint bbox. Throws InvalidArgument when no
    /// alpha value exceeds 0.5.
    PasteObject(const ImageGrid& rgb, const RealGrid& alpha, std::string category);

    const ImageGrid& rgb() const { return rgb_; }
    const RealGrid& alpha() const { return alpha_; }
    const std::string& category() const { return category_; }
    int height() const { return alpha_.height(); }
    int width() const { return alpha_.width(); }

private:
    ImageGrid rgb_;
    RealGrid alpha_;
    std::string category_;
};

struct PasteConfig {
    int min_objects = 1;
    int max_objects = 2;
    /// Sprite longer side as a fraction of min(H, W).
    double min_scale = 0.25;
    double max_scale = 0.35;
    double margin_fraction = 0.15;
    double blur_sigma = 3.0;
    double scene_probability = 0.5;
    double per_view_probability = 0.8;
    int max_attempts = 100;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
};

struct PastePlacement {
    int view = 0;
    int object = 0;  // index into the bank
    // Sprite box in image coordinates.
    int top = 0, left = 0, height = 0, width = 0;
    // Tight box of the pasted alpha > 0.5 footprint.
    int footprint_top = 0, footprint_left = 0, footprint_height = 0, footprint_width = 0;
    std::size_t footprint_pixels = 0;
};

struct PasteResult {
    std::vector<ImageGrid> views;
    std::vector<BinaryMask> masks;  // per view, un-feathered footprint
    bool augmented = false;
    bool per_view = false;
    std::vector<PastePlacement> placements;
    std::vector<std::string> diagnostics;
};

/// Pastes 1-2 sprites into a scene. Randomness comes from streams keyed by
/// (seed, scene_id) and (seed, scene_id, view), so results do not depend on
/// the order scenes are processed in.
PasteResult copy_paste(const std::vector<ImageGrid>& views, const std::vector<PasteObject>& bank,
                       const PasteConfig& config, std::uint64_t scene_id);

/// 1 = masked token.
using TokenMask = BinaryMask;

/// round(ratio * h * w) tokens grown from a random seed token by picking a
/// random frontier cell each step, so the masked set is 4-connected.
TokenMask clustered_token_mask(int h, int w, double ratio, std::uint64_t seed);

/// Patch-level motion score by area pooling, then strict threshold.
TokenMask dynamic_token_mask(const SoftMask& motion_prob, int patch_size, double tau = 0.5);

}  // namespace wildsieve::augment
