#include "wildsieve/augment.hpp"

#include <algorithm>
#include <cmath>

#include "wildsieve/grid_ops.hpp"
#include "wildsieve/rng.hpp"

namespace wildsieve::augment {

namespace {

constexpr std::uint64_t kSceneStream = 0;
constexpr std::uint64_t kSharedStream = 1;
constexpr std::uint64_t kViewStreamBase = 2;

struct Box {
    int top = 0, left = 0, height = 0, width = 0;
};

Box footprint_box(const RealGrid& alpha) {
    int y0 = alpha.height(), x0 = alpha.width(), y1 = -1, x1 = -1;
    for (int y = 0; y < alpha.height(); ++y) {
        for (int x = 0; x < alpha.width(); ++x) {
            if (alpha(y, x) > 0.5) {
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
            }
        }
    }
    if (y1 < 0) return {};
    return {y0, x0, y1 - y0 + 1, x1 - x0 + 1};
}

struct Sprite {
    ImageGrid rgb;
    RealGrid alpha;
};

Sprite resize_nearest(const PasteObject& obj, int h, int w) {
    Sprite s{ImageGrid(h, w, 3), RealGrid(h, w)};
    for (int y = 0; y < h; ++y) {
        const int sy = static_cast<int>(static_cast<long long>(y) * obj.height() / h);
        for (int x = 0; x < w; ++x) {
            const int sx = static_cast<int>(static_cast<long long>(x) * obj.width() / w);
            for (int c = 0; c < 3; ++c) s.rgb.at(y, x, c) = obj.rgb().at(sy, sx, c);
            s.alpha(y, x) = obj.alpha()(sy, sx);
        }
    }
    return s;
}

// Separable Gaussian blur with zero padding outside the sprite box.
RealGrid gaussian_blur(const RealGrid& src, double sigma) {
    if (sigma <= 0.0) return src;
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        taps[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
        total += taps[static_cast<std::size_t>(i + r)];
    }
    for (double& t : taps) t /= total;
    const int h = src.height();
    const int w = src.width();
    RealGrid tmp(h, w);
    RealGrid out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int xx = x + i;
                if (xx >= 0 && xx < w) acc += taps[static_cast<std::size_t>(i + r)] * src(y, xx);
            }
            tmp(y, x) = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int yy = y + i;
                if (yy >= 0 && yy < h) acc += taps[static_cast<std::size_t>(i + r)] * tmp(yy, x);
            }
            out(y, x) = acc;
        }
    }
    return out;
}

struct Draw {
    int object = 0;
    Box box;
    Sprite sprite;
};

// Draws the object count and a valid placement for each object. Objects that
// cannot be placed within max_attempts are skipped.
std::vector<Draw> draw_objects(Rng& rng, int h, int w, const std::vector<PasteObject>& bank,
                               const PasteConfig& cfg, std::vector<std::string>& diagnostics) {
    const int side = std::min(h, w);
    const int lo = static_cast<int>(std::ceil(cfg.min_scale * side - 1e-9));
    const int hi = static_cast<int>(std::floor(cfg.max_scale * side + 1e-9));
    const int count = rng.between(cfg.min_objects, cfg.max_objects);
    std::vector<Draw> out;
    for (int n = 0; n < count; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_attempts && !placed; ++attempt) {
            if (lo > hi || lo < 1) break;
            Draw d;
            d.object = static_cast<int>(rng.below(bank.size()));
            const PasteObject& obj = bank[static_cast<std::size_t>(d.object)];
            const int longer = rng.between(lo, hi);
            const bool tall = obj.height() >= obj.width();
            const double ratio = tall ? static_cast<double>(obj.width()) / obj.height()
                                      : static_cast<double>(obj.height()) / obj.width();
            const int shorter = std::max(1, static_cast<int>(std::lround(longer * ratio)));
            d.box.height = tall ? longer : shorter;
            d.box.width = tall ? shorter : longer;

            const int my = static_cast<int>(std::ceil(cfg.margin_fraction * h - 1e-9));
            const int mx = static_cast<int>(std::ceil(cfg.margin_fraction * w - 1e-9));
            const int max_top = static_cast<int>(std::floor(h - cfg.margin_fraction * h + 1e-9)) - d.box.height;
            const int max_left = static_cast<int>(std::floor(w - cfg.margin_fraction * w + 1e-9)) - d.box.width;
            if (max_top < my || max_left < mx) continue;
            d.box.top = rng.between(my, max_top);
            d.box.left = rng.between(mx, max_left);

            d.sprite = resize_nearest(obj, d.box.height, d.box.width);
            // Downscaling can drop footprint rows or columns; re-check the
            // longer side of what will actually be pasted.
            const Box fp = footprint_box(d.sprite.alpha);
            const int fp_longer = std::max(fp.height, fp.width);
            if (fp.height == 0 || fp_longer < lo || fp_longer > hi) continue;
            out.push_back(std::move(d));
            placed = true;
        }
        if (!placed) {
            diagnostics.push_back("object " + std::to_string(n) + " skipped: no valid placement after " +
                                  std::to_string(cfg.max_attempts) + " attempts");
        }
    }
    return out;
}

void composite(ImageGrid& view, BinaryMask& mask, const Draw& d, double blur_sigma) {
    RealGrid footprint(d.box.height, d.box.width);
    for (int y = 0; y < d.box.height; ++y) {
        for (int x = 0; x < d.box.width; ++x) footprint(y, x) = d.sprite.alpha(y, x) > 0.5 ? 1.0 : 0.0;
    }
    const RealGrid feathered = gaussian_blur(footprint, blur_sigma);
    for (int y = 0; y < d.box.height; ++y) {
        for (int x = 0; x < d.box.width; ++x) {
            const int iy = d.box.top + y;
            const int ix = d.box.left + x;
            const double a = feathered(y, x);
            for (int c = 0; c < view.channels(); ++c) {
                const double src = view.channels() == 3
                                       ? d.sprite.rgb.at(y, x, c)
                                       : 0.299 * d.sprite.rgb.at(y, x, 0) + 0.587 * d.sprite.rgb.at(y, x, 1) +
                                             0.114 * d.sprite.rgb.at(y, x, 2);
                view.at(iy, ix, c) = a * src + (1.0 - a) * view.at(iy, ix, c);
            }
            if (footprint(y, x) > 0.0) mask.set(iy, ix, true);
        }
    }
}

PastePlacement describe(int view, const Draw& d) {
    const Box fp = footprint_box(d.sprite.alpha);
    PastePlacement p;
    p.view = view;
    p.object = d.object;
    p.top = d.box.top;
    p.left = d.box.left;
    p.height = d.box.height;
    p.width = d.box.width;
    p.footprint_top = d.box.top + fp.top;
    p.footprint_left = d.box.left + fp.left;
    p.footprint_height = fp.height;
    p.footprint_width = fp.width;
    for (double a : d.sprite.alpha.data()) p.footprint_pixels += a > 0.5 ? 1 : 0;
    return p;
}

}  // namespace

PasteObject::PasteObject(const ImageGrid& rgb, const RealGrid& alpha, std::string category)
    : category_(std::move(category)) {
    if (rgb.height() != alpha.height() || rgb.width() != alpha.width() || rgb.channels() != 3) {
        throw InvalidDimension("paste object needs an RGB image and an alpha of the same size");
    }
    const Box b = footprint_box(alpha);
    if (b.height == 0) throw InvalidArgument("paste object alpha has no pixel above 0.5");
    rgb_ = ImageGrid(b.height, b.width, 3);
    alpha_ = RealGrid(b.height, b.width);
    for (int y = 0; y < b.height; ++y) {
        for (int x = 0; x < b.width; ++x) {
            for (int c = 0; c < 3; ++c) rgb_.at(y, x, c) = rgb.at(b.top + y, b.left + x, c);
            alpha_(y, x) = alpha(b.top + y, b.left + x);
        }
    }
}

void PasteConfig::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (min_objects < 1 || max_objects < min_objects || !(min_scale > 0.0) || max_scale < min_scale ||
        max_scale > 1.0 || !(margin_fraction >= 0.0 && margin_fraction < 0.5) || blur_sigma < 0.0 ||
        !prob(scene_probability) || !prob(per_view_probability) || max_attempts < 1) {
        throw InvalidArgument("invalid paste configuration");
    }
}

nlohmann::json PasteConfig::to_json() const {
    return {{"min_objects", min_objects},
            {"max_objects", max_objects},
            {"min_scale", min_scale},
            {"max_scale", max_scale},
            {"margin_fraction", margin_fraction},
            {"blur_sigma", blur_sigma},
            {"scene_probability", scene_probability},
            {"per_view_probability", per_view_probability},
            {"max_attempts", max_attempts},
            {"seed", seed}};
}

PasteResult copy_paste(const std::vector<ImageGrid>& views, const std::vector<PasteObject>& bank,
                       const PasteConfig& config, std::uint64_t scene_id) {
    config.validate();
    if (bank.empty()) throw InvalidArgument("copy_paste needs a non-empty object bank");
    if (views.empty()) throw InvalidArgument("copy_paste needs at least one view");
    for (const auto& v : views) {
        if (!v.same_shape(views.front())) throw InvalidDimension("all views must share one shape");
    }
    const int h = views.front().height();
    const int w = views.front().width();

    PasteResult result;
    result.views = views;
    result.masks.assign(views.size(), BinaryMask(h, w));

    Rng scene(mix_seed({config.seed, scene_id, kSceneStream}));
    result.augmented = scene.bernoulli(config.scene_probability);
    if (!result.augmented) return result;
    result.per_view = scene.bernoulli(config.per_view_probability);

    std::vector<Draw> shared;
    if (!result.per_view) {
        Rng rng(mix_seed({config.seed, scene_id, kSharedStream}));
        shared = draw_objects(rng, h, w, bank, config, result.diagnostics);
    }
    for (std::size_t v = 0; v < views.size(); ++v) {
        std::vector<Draw> own;
        if (result.per_view) {
            Rng rng(mix_seed({config.seed, scene_id, kViewStreamBase + v}));
            own = draw_objects(rng, h, w, bank, config, result.diagnostics);
        }
        for (const Draw& d : result.per_view ? own : shared) {
            composite(result.views[v], result.masks[v], d, config.blur_sigma);
            result.placements.push_back(describe(static_cast<int>(v), d));
        }
    }
    return result;
}

TokenMask clustered_token_mask(int h, int w, double ratio, std::uint64_t seed) {
    if (h < 0 || w < 0) throw InvalidDimension("token grid dimensions must be non-negative");
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidArgument("token mask ratio must be in [0, 1]");
    TokenMask mask(h, w);
    const long long total = static_cast<long long>(h) * w;
    const long long n = std::min(total, static_cast<long long>(std::llround(ratio * static_cast<double>(total))));
    if (n == 0) return mask;

    Rng rng(seed);
    Grid2D<std::uint8_t> queued(h, w, 0);
    std::vector<int> frontier;
    auto enqueue = [&](int y, int x) {
        if (y < 0 || y >= h || x < 0 || x >= w || queued(y, x)) return;
        queued(y, x) = 1;
        frontier.push_back(y * w + x);
    };
    const auto start = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
    enqueue(start / w, start % w);
    for (long long placed = 0; placed < n; ++placed) {
        const auto pick = static_cast<std::size_t>(rng.below(frontier.size()));
        const int cell = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        const int y = cell / w;
        const int x = cell % w;
        mask.set(y, x, true);
        enqueue(y - 1, x);
        enqueue(y + 1, x);
        enqueue(y, x - 1);
        enqueue(y, x + 1);
    }
    return mask;
}

TokenMask dynamic_token_mask(const SoftMask& motion_prob, int patch_size, double tau) {
    if (patch_size < 1 || motion_prob.height() % patch_size != 0 || motion_prob.width() % patch_size != 0) {
        throw InvalidDimension("motion map dimensions must be divisible by the patch size");
    }
    const RealGrid pooled =
        area_pool(motion_prob.grid(), motion_prob.height() / patch_size, motion_prob.width() / patch_size);
    return threshold_mask(pooled, tau);
}

}  // namespace wildsieve::augment
