#include "wildsieve/pseudomask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wildsieve/grid_ops.hpp"
#include "wildsieve/metrics.hpp"
#include "wildsieve/parallel.hpp"
#include "wildsieve/rng.hpp"

namespace wildsieve::pseudomask {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

struct PointSet {
    int dim = 0;
    std::vector<double> values;

    std::size_t size() const { return dim == 0 ? 0 : values.size() / static_cast<std::size_t>(dim); }
    std::span<const double> point(std::size_t i) const {
        return std::span<const double>(values).subspan(i * static_cast<std::size_t>(dim),
                                                       static_cast<std::size_t>(dim));
    }
};

PointSet normalized_points(const std::vector<PatchFeatureMap>& features) {
    PointSet pts;
    pts.dim = features.front().dim();
    for (const auto& f : features) {
        for (int y = 0; y < f.grid_height(); ++y) {
            for (int x = 0; x < f.grid_width(); ++x) {
                const auto v = f.feature(y, x);
                double n2 = 0.0;
                for (float a : v) n2 += static_cast<double>(a) * a;
                const double inv = n2 > 0.0 ? 1.0 / std::sqrt(n2) : 0.0;
                for (float a : v) pts.values.push_back(static_cast<double>(a) * inv);
            }
        }
    }
    return pts;
}

std::size_t count_distinct(const PointSet& pts) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
        const auto pa = pts.point(a);
        const auto pb = pts.point(b);
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = order.empty() ? 0 : 1;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

}  // namespace

ClusterModel cluster_patches(const std::vector<PatchFeatureMap>& features, int k, std::uint64_t seed,
                             const KMeansOptions& options) {
    if (features.empty()) throw InvalidArgument("cluster_patches needs at least one frame");
    if (k < 1) throw InvalidArgument("cluster_patches needs k >= 1");
    const auto& first = features.front();
    for (const auto& f : features) {
        if (f.grid_height() != first.grid_height() || f.grid_width() != first.grid_width() ||
            f.dim() != first.dim()) {
            throw InvalidDimension("all feature maps in a batch must share shape");
        }
    }
    const PointSet pts = normalized_points(features);
    const std::size_t n = pts.size();
    if (n == 0 || pts.dim == 0) throw InvalidDimension("feature maps are empty");
    if (static_cast<std::size_t>(k) > n) {
        throw InvalidArgument("k exceeds the number of patches in the batch");
    }

    ClusterModel model;
    model.requested_k = k;
    model.k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), count_distinct(pts)));
    model.dim = pts.dim;
    const auto dim = static_cast<std::size_t>(pts.dim);
    const auto kk = static_cast<std::size_t>(model.k);

    // k-means++ seeding.
    Rng rng(seed);
    std::vector<double>& c = model.centroids;
    c.reserve(kk * dim);
    auto push_center = [&](std::size_t i) {
        const auto p = pts.point(i);
        c.insert(c.end(), p.begin(), p.end());
    };
    push_center(rng.below(n));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(pts.point(i), model.centroid(0));
    while (c.size() < kk * dim) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        const double target = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc > target && d2[i] > 0.0) {
                pick = i;
                break;
            }
        }
        if (pick == n) {
            pick = n - 1;
            while (d2[pick] == 0.0) --pick;
        }
        push_center(pick);
        const int last = static_cast<int>(c.size() / dim) - 1;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(pts.point(i), model.centroid(last)));
        }
    }

    // Lloyd iterations.
    std::vector<int> assign(n, 0);
    std::vector<double> dist(n, 0.0);
    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int j = 0; j < model.k; ++j) {
                const double d = squared_distance(pts.point(i), model.centroid(j));
                if (d < best) {
                    best = d;
                    best_c = j;
                }
            }
            assign[i] = best_c;
            dist[i] = best;
            inertia += best;
        }
        model.inertia = inertia;
        model.iterations = iter + 1;

        std::vector<double> sums(kk * dim, 0.0);
        std::vector<std::size_t> counts(kk, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = pts.point(i);
            const auto a = static_cast<std::size_t>(assign[i]);
            ++counts[a];
            for (std::size_t d = 0; d < dim; ++d) sums[a * dim + d] += p[d];
        }
        for (std::size_t j = 0; j < kk; ++j) {
            if (counts[j] == 0) {
                // Re-seed an empty cluster at the worst-fit point.
                const auto worst = static_cast<std::size_t>(
                    std::max_element(dist.begin(), dist.end()) - dist.begin());
                const auto p = pts.point(worst);
                std::copy(p.begin(), p.end(), c.begin() + static_cast<std::ptrdiff_t>(j * dim));
                dist[worst] = 0.0;
                continue;
            }
            for (std::size_t d = 0; d < dim; ++d) {
                c[j * dim + d] = sums[j * dim + d] / static_cast<double>(counts[j]);
            }
        }
        const bool converged = inertia == 0.0 ||
                               (prev_inertia - inertia) <= options.relative_tolerance * prev_inertia;
        prev_inertia = inertia;
        if (converged) break;
    }

    // Final assignment against the final centroids.
    std::size_t offset = 0;
    for (const auto& f : features) {
        Grid2D<int> grid(f.grid_height(), f.grid_width());
        for (int y = 0; y < f.grid_height(); ++y) {
            for (int x = 0; x < f.grid_width(); ++x, ++offset) {
                double best = std::numeric_limits<double>::infinity();
                int best_c = 0;
                for (int j = 0; j < model.k; ++j) {
                    const double d = squared_distance(pts.point(offset), model.centroid(j));
                    if (d < best) {
                        best = d;
                        best_c = j;
                    }
                }
                grid(y, x) = best_c;
            }
        }
        model.assignments.push_back(std::move(grid));
    }
    return model;
}

void ClusterSelectionParams::validate() const {
    if (!(top_fraction > 0.0 && top_fraction <= 1.0) ||
        !(saliency_percentile >= 0.0 && saliency_percentile <= 100.0) || min_frames < 1) {
        throw InvalidArgument("cluster selection needs 0 < top_fraction <= 1, "
                              "0 <= percentile <= 100, min_frames >= 1");
    }
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidArgument("percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

ClusterSelection select_motion_clusters(const ClusterModel& model,
                                        const std::vector<SaliencyGrid>& saliency,
                                        const ClusterSelectionParams& params) {
    params.validate();
    if (saliency.size() != model.assignments.size()) {
        throw InvalidDimension("one saliency grid per clustered frame is required");
    }
    const auto kk = static_cast<std::size_t>(model.k);
    const int frames = static_cast<int>(saliency.size());
    ClusterSelection out;
    out.mean_saliency.assign(kk, std::numeric_limits<double>::quiet_NaN());
    out.consistent_frames.assign(kk, 0);

    std::vector<double> total(kk, 0.0);
    std::vector<std::size_t> count(kk, 0);
    for (int f = 0; f < frames; ++f) {
        const auto& s = saliency[static_cast<std::size_t>(f)];
        const auto& a = model.assignments[static_cast<std::size_t>(f)];
        if (!s.same_shape(Grid2D<double>(a.height(), a.width()))) {
            throw InvalidDimension("saliency grid does not align with cluster assignments");
        }
        const double threshold = percentile(s.values(), params.saliency_percentile);
        out.frame_thresholds.push_back(threshold);

        std::vector<double> frame_sum(kk, 0.0);
        std::vector<std::size_t> frame_count(kk, 0);
        auto sv = s.data();
        auto av = a.data();
        for (std::size_t i = 0; i < sv.size(); ++i) {
            const auto c = static_cast<std::size_t>(av[i]);
            frame_sum[c] += sv[i];
            ++frame_count[c];
        }
        for (std::size_t c = 0; c < kk; ++c) {
            total[c] += frame_sum[c];
            count[c] += frame_count[c];
            if (frame_count[c] > 0 &&
                frame_sum[c] / static_cast<double>(frame_count[c]) > threshold) {
                ++out.consistent_frames[c];
            }
        }
    }

    std::vector<int> ranked;
    for (std::size_t c = 0; c < kk; ++c) {
        if (count[c] == 0) continue;
        out.mean_saliency[c] = total[c] / static_cast<double>(count[c]);
        ranked.push_back(static_cast<int>(c));
    }
    std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        const double sa = out.mean_saliency[static_cast<std::size_t>(a)];
        const double sb = out.mean_saliency[static_cast<std::size_t>(b)];
        return sa != sb ? sa > sb : a < b;
    });

    // The small epsilon keeps exact products such as 0.05 * 20 from rounding up.
    out.candidate_count = std::max(1, static_cast<int>(std::ceil(params.top_fraction * model.k - 1e-9)));
    out.required_frames = std::min(params.min_frames, frames);
    for (int r = 0; r < std::min<int>(out.candidate_count, static_cast<int>(ranked.size())); ++r) {
        const int c = ranked[static_cast<std::size_t>(r)];
        if (out.consistent_frames[static_cast<std::size_t>(c)] >= out.required_frames) {
            out.selected.push_back(c);
        }
    }
    std::sort(out.selected.begin(), out.selected.end());
    return out;
}

void PseudoMaskConfig::validate() const {
    if (k_clusters < 1 || !std::isfinite(psnr_gate) || dilate_kernel < 1 || dilate_iterations < 0 ||
        !(min_component_fraction >= 0.0 && min_component_fraction <= 1.0) || seed_erode_kernel < 1 ||
        seed_erode_iterations < 0 || refine_band < 0 || threads < 1) {
        throw InvalidArgument("invalid pseudo-mask configuration");
    }
    grabcut.validate();
    selection.validate();
    ssim.validate();
}

nlohmann::json PseudoMaskConfig::to_json() const {
    return {
        {"k_clusters", k_clusters},
        {"psnr_gate", psnr_gate},
        {"dilate_kernel", dilate_kernel},
        {"dilate_iterations", dilate_iterations},
        {"min_component_fraction", min_component_fraction},
        {"seed_erode_kernel", seed_erode_kernel},
        {"seed_erode_iterations", seed_erode_iterations},
        {"refine_band", refine_band},
        {"refine", refine},
        {"grabcut", {{"gamma", grabcut.gamma}, {"components", grabcut.components},
                     {"iterations", grabcut.iterations}, {"connectivity", grabcut.connectivity}}},
        {"selection", {{"top_fraction", selection.top_fraction},
                       {"saliency_percentile", selection.saliency_percentile},
                       {"min_frames", selection.min_frames}}},
        {"ssim", {{"window_size", ssim.window_size}, {"sigma", ssim.sigma}, {"c1", ssim.c1},
                  {"c2", ssim.c2}}},
        {"weights", {{"pivot_db", weights.pivot_db}, {"slope_per_db", weights.slope_per_db},
                     {"min_ssim_weight", weights.min_ssim_weight},
                     {"max_ssim_weight", weights.max_ssim_weight}}},
        {"kmeans", {{"max_iterations", kmeans.max_iterations},
                    {"relative_tolerance", kmeans.relative_tolerance}}},
        {"seed", seed},
        {"threads", threads},
    };
}

grabcut::Trimap refinement_trimap(const BinaryMask& coarse, const PseudoMaskConfig& config) {
    BinaryMask seed = morph(coarse, MorphMode::Erode, config.seed_erode_kernel, config.seed_erode_iterations);
    if (!seed.any()) seed = coarse;
    const BinaryMask band = morph(coarse, MorphMode::Dilate, 2 * config.refine_band + 1, 1);
    grabcut::Trimap trimap(coarse.height(), coarse.width(), grabcut::TrimapLabel::Background);
    for (int y = 0; y < coarse.height(); ++y) {
        for (int x = 0; x < coarse.width(); ++x) {
            if (seed(y, x)) {
                trimap(y, x) = grabcut::TrimapLabel::ProbableForeground;
            } else if (band(y, x)) {
                trimap(y, x) = grabcut::TrimapLabel::ProbableBackground;
            }
        }
    }
    return trimap;
}

PseudoMaskResult build_pseudo_masks(const std::vector<ImageGrid>& observed,
                                    const std::vector<ImageGrid>& rendered,
                                    const std::vector<PatchFeatureMap>& observed_features,
                                    const std::vector<PatchFeatureMap>& rendered_features,
                                    const PseudoMaskConfig& config) {
    config.validate();
    const int batch = static_cast<int>(observed.size());
    if (batch == 0) throw InvalidArgument("pseudo-mask construction needs a non-empty batch");
    if (rendered.size() != observed.size() || observed_features.size() != observed.size() ||
        rendered_features.size() != observed.size()) {
        throw InvalidArgument("observed, rendered and feature lists must have equal lengths");
    }
    const int gh = observed_features.front().grid_height();
    const int gw = observed_features.front().grid_width();
    for (int f = 0; f < batch; ++f) {
        const auto i = static_cast<std::size_t>(f);
        if (!observed[i].same_shape(observed.front()) || !rendered[i].same_shape(observed.front())) {
            throw InvalidDimension("all frames must share one image shape");
        }
        for (const auto* fm : {&observed_features[i], &rendered_features[i]}) {
            if (fm->grid_height() != gh || fm->grid_width() != gw ||
                fm->dim() != observed_features.front().dim()) {
                throw InvalidDimension("all feature maps must share one patch grid");
            }
        }
    }
    const int height = observed.front().height();
    const int width = observed.front().width();

    PseudoMaskResult result;
    result.masks.resize(static_cast<std::size_t>(batch));
    result.rasterized.resize(static_cast<std::size_t>(batch));
    result.frames.resize(static_cast<std::size_t>(batch));

    parallel_for(batch, config.threads, [&](int f) {
        const auto i = static_cast<std::size_t>(f);
        const auto p = metrics::psnr(observed[i], rendered[i]);
        result.frames[i].psnr = p.db;
        result.frames[i].psnr_saturated = p.saturated;
        result.frames[i].gated = !(p.db > config.psnr_gate);
    });

    std::vector<int> active;
    double psnr_sum = 0.0;
    for (int f = 0; f < batch; ++f) {
        if (result.frames[static_cast<std::size_t>(f)].gated) continue;
        active.push_back(f);
        psnr_sum += result.frames[static_cast<std::size_t>(f)].psnr;
    }
    if (active.empty()) {
        result.all_gated = true;
        return result;
    }
    const int n_active = static_cast<int>(active.size());
    result.batch_mean_psnr = psnr_sum / n_active;
    result.weights = saliency::adaptive_weights(result.batch_mean_psnr, config.weights);

    std::vector<SaliencyGrid> fused(active.size());
    parallel_for(n_active, config.threads, [&](int a) {
        const auto i = static_cast<std::size_t>(active[static_cast<std::size_t>(a)]);
        auto dino = saliency::dino_dissimilarity(observed_features[i], rendered_features[i]);
        result.frames[i].degenerate_feature_patches = dino.degenerate_patches;
        const auto d_ssim = saliency::ssim_dissimilarity(observed[i], rendered[i], gh, gw, config.ssim);
        fused[static_cast<std::size_t>(a)] = saliency::fuse_saliency(dino.map, d_ssim, result.weights);
    });

    std::vector<PatchFeatureMap> active_features;
    for (int f : active) active_features.push_back(observed_features[static_cast<std::size_t>(f)]);
    const int k = std::min(config.k_clusters, n_active * gh * gw);
    const ClusterModel model = cluster_patches(active_features, k, config.seed, config.kmeans);
    const ClusterSelection selection = select_motion_clusters(model, fused, config.selection);
    result.effective_k = model.k;
    result.selected_clusters = selection.selected;
    result.cluster_mean_saliency = selection.mean_saliency;
    // fusion + clustering input + selection each visit every patch once.
    result.patch_cells_visited = 3 * static_cast<std::size_t>(n_active) * gh * gw;

    std::vector<std::uint8_t> is_selected(static_cast<std::size_t>(model.k), 0);
    for (int c : selection.selected) is_selected[static_cast<std::size_t>(c)] = 1;

    parallel_for(n_active, config.threads, [&](int a) {
        const auto i = static_cast<std::size_t>(active[static_cast<std::size_t>(a)]);
        const auto& assign = model.assignments[static_cast<std::size_t>(a)];
        BinaryMask patches(gh, gw);
        for (int y = 0; y < gh; ++y) {
            for (int x = 0; x < gw; ++x) patches.set(y, x, is_selected[static_cast<std::size_t>(assign(y, x))] != 0);
        }
        BinaryMask raster = upsample_nearest(patches, height, width);
        BinaryMask coarse = morph(raster, MorphMode::Dilate, config.dilate_kernel, config.dilate_iterations);
        coarse = filter_small_components(coarse, config.min_component_fraction);
        result.frames[i].coarse_pixels = coarse.count();
        BinaryMask mask = coarse;
        if (config.refine && coarse.any()) {
            const auto trimap = refinement_trimap(coarse, config);
            mask = grabcut::grabcut_refine(observed[i], trimap, config.grabcut,
                                           mix_seed({config.seed, static_cast<std::uint64_t>(i)}));
        }
        result.frames[i].mask_pixels = mask.count();
        result.rasterized[i] = std::move(raster);
        result.masks[i] = std::move(mask);
    });
    return result;
}

nlohmann::json PseudoMaskResult::diagnostics_json() const {
    nlohmann::json frames_json = nlohmann::json::array();
    for (const auto& f : frames) {
        frames_json.push_back({{"psnr", f.psnr},
                               {"psnr_saturated", f.psnr_saturated},
                               {"gated", f.gated},
                               {"degenerate_feature_patches", f.degenerate_feature_patches},
                               {"coarse_pixels", f.coarse_pixels},
                               {"mask_pixels", f.mask_pixels}});
    }
    nlohmann::json saliency_json = nlohmann::json::array();
    for (double s : cluster_mean_saliency) {
        saliency_json.push_back(std::isfinite(s) ? nlohmann::json(s) : nlohmann::json(nullptr));
    }
    return {{"frames", frames_json},
            {"selected_clusters", selected_clusters},
            {"cluster_mean_saliency", saliency_json},
            {"weights", {{"dino", weights.dino}, {"ssim", weights.ssim}}},
            {"batch_mean_psnr", batch_mean_psnr},
            {"effective_k", effective_k},
            {"all_gated", all_gated},
            {"patch_cells_visited", patch_cells_visited}};
}

}  // namespace wildsieve::pseudomask
