#include "wildsieve/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wildsieve/grid_ops.hpp"

namespace wildsieve::saliency {

namespace {

// Separable valid-mode correlation with a symmetric kernel.
RealGrid filter_valid(const RealGrid& src, const std::vector<double>& taps) {
    const int k = static_cast<int>(taps.size());
    const int h = src.height();
    const int w = src.width();
    const int oh = h - k + 1;
    const int ow = w - k + 1;
    RealGrid rows(h, ow);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t) acc += taps[static_cast<std::size_t>(t)] * src(y, x + t);
            rows(y, x) = acc;
        }
    }
    RealGrid out(oh, ow);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t) acc += taps[static_cast<std::size_t>(t)] * rows(y + t, x);
            out(y, x) = acc;
        }
    }
    return out;
}

RealGrid product(const RealGrid& a, const RealGrid& b) {
    RealGrid out(a.height(), a.width());
    auto pa = a.data();
    auto pb = b.data();
    auto po = out.data();
    for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] * pb[i];
    return out;
}

}  // namespace

void SsimParams::validate() const {
    if (window_size < 1 || window_size % 2 == 0) {
        throw InvalidArgument("SSIM window size must be odd and >= 1");
    }
    if (!(sigma > 0.0) || !(c1 > 0.0) || !(c2 > 0.0)) {
        throw InvalidArgument("SSIM sigma and stability constants must be positive");
    }
}

std::vector<double> gaussian_taps(int window_size, double sigma) {
    if (window_size < 1 || window_size % 2 == 0) {
        throw InvalidArgument("Gaussian window size must be odd and positive, got " + std::to_string(window_size));
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("Gaussian sigma must be positive");
    std::vector<double> taps(static_cast<std::size_t>(window_size));
    const int r = window_size / 2;
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(i + r)] = v;
        sum += v;
    }
    for (auto& v : taps) v /= sum;
    return taps;
}

RealGrid ssim_map(const ImageGrid& observed, const ImageGrid& rendered, const SsimParams& params) {
    params.validate();
    if (!observed.same_shape(rendered)) {
        throw InvalidDimension("SSIM inputs must have equal shapes");
    }
    if (observed.height() < params.window_size || observed.width() < params.window_size) {
        throw InvalidDimension("image " + std::to_string(observed.height()) + "x" +
                               std::to_string(observed.width()) + " is smaller than the " +
                               std::to_string(params.window_size) + "px SSIM window");
    }
    const RealGrid x = observed.grayscale();
    const RealGrid y = rendered.grayscale();
    const auto taps = gaussian_taps(params.window_size, params.sigma);

    const RealGrid mu_x = filter_valid(x, taps);
    const RealGrid mu_y = filter_valid(y, taps);
    const RealGrid e_xx = filter_valid(product(x, x), taps);
    const RealGrid e_yy = filter_valid(product(y, y), taps);
    const RealGrid e_xy = filter_valid(product(x, y), taps);

    RealGrid out(mu_x.height(), mu_x.width());
    auto o = out.data();
    auto mx = mu_x.data();
    auto my = mu_y.data();
    auto xx = e_xx.data();
    auto yy = e_yy.data();
    auto xy = e_xy.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double var_x = xx[i] - mx[i] * mx[i];
        const double var_y = yy[i] - my[i] * my[i];
        const double cov = xy[i] - mx[i] * my[i];
        const double num = (2.0 * mx[i] * my[i] + params.c1) * (2.0 * cov + params.c2);
        const double den =
            (mx[i] * mx[i] + my[i] * my[i] + params.c1) * (var_x + var_y + params.c2);
        o[i] = num / den;
    }
    return out;
}

DinoDissimilarity dino_dissimilarity(const PatchFeatureMap& observed,
                                     const PatchFeatureMap& rendered) {
    if (observed.grid_height() != rendered.grid_height() ||
        observed.grid_width() != rendered.grid_width() || observed.dim() != rendered.dim()) {
        throw InvalidDimension("feature maps must share grid shape and dimension");
    }
    DinoDissimilarity out{SaliencyGrid(observed.grid_height(), observed.grid_width()), 0};
    for (int y = 0; y < observed.grid_height(); ++y) {
        for (int x = 0; x < observed.grid_width(); ++x) {
            const auto a = observed.feature(y, x);
            const auto b = rendered.feature(y, x);
            double dot = 0.0;
            double na = 0.0;
            double nb = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                dot += static_cast<double>(a[i]) * b[i];
                na += static_cast<double>(a[i]) * a[i];
                nb += static_cast<double>(b[i]) * b[i];
            }
            if (na == 0.0 || nb == 0.0) {
                out.map(y, x) = 1.0;
                ++out.degenerate_patches;
                continue;
            }
            const double cosine = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
            out.map(y, x) = 1.0 - cosine;
        }
    }
    return out;
}

SaliencyGrid ssim_dissimilarity(const ImageGrid& observed, const ImageGrid& rendered,
                                int grid_height, int grid_width, const SsimParams& params) {
    const RealGrid s = ssim_map(observed, rendered, params);
    const int h = observed.height();
    const int w = observed.width();
    const int r = params.radius();
    RealGrid full(h, w);
    for (int y = 0; y < h; ++y) {
        const int sy = std::clamp(y - r, 0, s.height() - 1);
        for (int x = 0; x < w; ++x) {
            const int sx = std::clamp(x - r, 0, s.width() - 1);
            full(y, x) = 1.0 - s(sy, sx);
        }
    }
    return area_pool(full, grid_height, grid_width);
}

void FusionWeights::validate() const {
    if (!(dino >= 0.0 && dino <= 1.0 && ssim >= 0.0 && ssim <= 1.0) ||
        std::abs(dino + ssim - 1.0) > 1e-9) {
        throw InvalidArgument("fusion weights must lie in [0, 1] and sum to 1");
    }
}

FusionWeights adaptive_weights(double batch_mean_psnr, const WeightSchedule& schedule) {
    if (!std::isfinite(batch_mean_psnr)) throw InvalidArgument("PSNR must be finite");
    const double w_ssim =
        std::clamp((batch_mean_psnr - schedule.pivot_db) * schedule.slope_per_db,
                   schedule.min_ssim_weight, schedule.max_ssim_weight);
    return {1.0 - w_ssim, w_ssim};
}

SaliencyGrid fuse_saliency(const SaliencyGrid& d_dino, const SaliencyGrid& d_ssim,
                           const FusionWeights& weights) {
    if (!d_dino.same_shape(d_ssim)) {
        throw InvalidDimension("saliency maps must have equal shapes");
    }
    weights.validate();
    const RealGrid zd = zscore(d_dino);
    const RealGrid zs = zscore(d_ssim);
    SaliencyGrid out(d_dino.height(), d_dino.width());
    auto o = out.data();
    auto a = zd.data();
    auto b = zs.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = weights.dino * a[i] + weights.ssim * b[i];
    return out;
}

}  // namespace wildsieve::saliency
