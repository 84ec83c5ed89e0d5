#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "wildsieve/grabcut.hpp"
#include "wildsieve/grid.hpp"
#include "wildsieve/saliency.hpp"

namespace wildsieve::pseudomask {

struct KMeansOptions {
    int max_iterations = 100;
    double relative_tolerance = 1e-4;
};

/// K-means over L2-normalized patch features pooled across a batch.
struct ClusterModel {
    int k = 0;
    int requested_k = 0;  // differs from k when there were too few distinct points
    int dim = 0;
    std::vector<double> centroids;           // k x dim, row-major
    std::vector<Grid2D<int>> assignments;    // one h x w grid per frame
    double inertia = 0.0;
    int iterations = 0;

    std::span<const double> centroid(int c) const {
        return std::span<const double>(centroids).subspan(static_cast<std::size_t>(c) * dim,
                                                          static_cast<std::size_t>(dim));
    }
};

/// Seeded k-means++ initialization followed by Lloyd iterations. Zero
/// feature vectors stay zero after normalization.
ClusterModel cluster_patches(const std::vector<PatchFeatureMap>& features, int k, std::uint64_t seed,
                             const KMeansOptions& options = {});

struct ClusterSelectionParams {
    double top_fraction = 0.05;
    double saliency_percentile = 75.0;
    int min_frames = 4;

    void validate() const;
};

struct ClusterSelection {
    std::vector<int> selected;            // ascending cluster ids
    std::vector<double> mean_saliency;    // per cluster; NaN for empty clusters
    std::vector<int> consistent_frames;   // per cluster
    std::vector<double> frame_thresholds; // per frame percentile of the fused map
    int candidate_count = 0;
    int required_frames = 0;
};

/// Linear-interpolation percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

/// A cluster is motion iff its mean fused saliency ranks within the top
/// max(1, ceil(top_fraction * K)) clusters (ties by lower id) and its
/// per-frame mean exceeds that frame's percentile threshold in at least
/// min(min_frames, B) frames.
ClusterSelection select_motion_clusters(const ClusterModel& model,
                                        const std::vector<SaliencyGrid>& saliency,
                                        const ClusterSelectionParams& params);

struct PseudoMaskConfig {
    int k_clusters = 24;
    double psnr_gate = 17.0;
    int dilate_kernel = 3;
    int dilate_iterations = 1;
    double min_component_fraction = 0.0025;
    int seed_erode_kernel = 3;
    int seed_erode_iterations = 2;
    /// Pixels farther than this from the coarse mask are fixed background
    /// during refinement.
    int refine_band = 24;
    bool refine = true;
    grabcut::GrabcutParams grabcut;
    ClusterSelectionParams selection;
    saliency::SsimParams ssim;
    saliency::WeightSchedule weights;
    KMeansOptions kmeans;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
    nlohmann::json to_json() const;
};

struct FrameDiagnostics {
    double psnr = 0.0;
    bool psnr_saturated = false;
    bool gated = false;
    std::size_t degenerate_feature_patches = 0;
    std::size_t coarse_pixels = 0;
    std::size_t mask_pixels = 0;
};

struct PseudoMaskResult {
    /// Empty optional for gated frames.
    std::vector<std::optional<BinaryMask>> masks;
    /// Selected clusters rasterized to pixels, before any morphology.
    std::vector<std::optional<BinaryMask>> rasterized;
    std::vector<FrameDiagnostics> frames;
    std::vector<int> selected_clusters;
    std::vector<double> cluster_mean_saliency;
    saliency::FusionWeights weights;
    double batch_mean_psnr = 0.0;
    int effective_k = 0;
    bool all_gated = false;
    /// Number of grid cells visited by fusion, clustering and selection.
    std::size_t patch_cells_visited = 0;

    nlohmann::json diagnostics_json() const;
};

/// Fuses semantic and appearance residuals at patch resolution, clusters
/// and selects motion regions, then rasterizes, cleans and refines them.
/// Frames whose full-frame PSNR does not exceed the gate are skipped.
PseudoMaskResult build_pseudo_masks(const std::vector<ImageGrid>& observed,
                                    const std::vector<ImageGrid>& rendered,
                                    const std::vector<PatchFeatureMap>& observed_features,
                                    const std::vector<PatchFeatureMap>& rendered_features,
                                    const PseudoMaskConfig& config);

/// Trimap used for refinement: the eroded coarse mask (or the coarse mask
/// when erosion empties it) seeds probable foreground, the band around the
/// coarse mask is probable background, everything else is background.
grabcut::Trimap refinement_trimap(const BinaryMask& coarse, const PseudoMaskConfig& config);

}  // namespace wildsieve::pseudomask
