#include "wildsieve/grid_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace wildsieve {

namespace {

struct PoolTap {
    int source;
    double weight;
};

// Target cell i spans [i*n, (i+1)*n) and source pixel k spans [k*m, (k+1)*m)
// in units of 1/m source pixels, so every overlap is an exact integer.
std::vector<std::vector<PoolTap>> pool_taps(int n, int m) {
    std::vector<std::vector<PoolTap>> taps(static_cast<std::size_t>(m));
    const std::int64_t nn = n;
    const std::int64_t mm = m;
    for (std::int64_t i = 0; i < mm; ++i) {
        const std::int64_t lo = i * nn;
        const std::int64_t hi = (i + 1) * nn;
        for (std::int64_t k = lo / mm; k < n && k * mm < hi; ++k) {
            const std::int64_t overlap = std::min(hi, (k + 1) * mm) - std::max(lo, k * mm);
            if (overlap > 0) {
                taps[static_cast<std::size_t>(i)].push_back(
                    {static_cast<int>(k), static_cast<double>(overlap) / static_cast<double>(nn)});
            }
        }
    }
    return taps;
}

Grid2D<std::uint8_t> morph_once(const Grid2D<std::uint8_t>& src, MorphMode mode, int radius) {
    const int h = src.height();
    const int w = src.width();
    const bool dilate = mode == MorphMode::Dilate;
    Grid2D<std::uint8_t> rows(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t acc = dilate ? 0 : 1;
            for (int dx = -radius; dx <= radius; ++dx) {
                const int xx = x + dx;
                const std::uint8_t v = (xx < 0 || xx >= w) ? 0 : src(y, xx);
                acc = dilate ? std::max(acc, v) : std::min(acc, v);
            }
            rows(y, x) = acc;
        }
    }
    Grid2D<std::uint8_t> out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t acc = dilate ? 0 : 1;
            for (int dy = -radius; dy <= radius; ++dy) {
                const int yy = y + dy;
                const std::uint8_t v = (yy < 0 || yy >= h) ? 0 : rows(yy, x);
                acc = dilate ? std::max(acc, v) : std::min(acc, v);
            }
            out(y, x) = acc;
        }
    }
    return out;
}

}  // namespace

RealGrid area_pool(const RealGrid& src, int target_height, int target_width) {
    const int h = src.height();
    const int w = src.width();
    if (h < 1 || w < 1 || target_height < 1 || target_width < 1) {
        throw InvalidDimension("area_pool requires non-empty source and target grids");
    }
    if (target_height > h || target_width > w) {
        throw InvalidDimension("area_pool target " + std::to_string(target_height) + "x" +
                               std::to_string(target_width) + " exceeds source " +
                               std::to_string(h) + "x" + std::to_string(w));
    }
    if (target_height == h && target_width == w) return src;

    const auto row_taps = pool_taps(h, target_height);
    const auto col_taps = pool_taps(w, target_width);

    RealGrid cols(h, target_width);
    for (int y = 0; y < h; ++y) {
        for (int j = 0; j < target_width; ++j) {
            double acc = 0.0;
            for (const auto& tap : col_taps[static_cast<std::size_t>(j)]) {
                acc += tap.weight * src(y, tap.source);
            }
            cols(y, j) = acc;
        }
    }
    RealGrid out(target_height, target_width);
    for (int i = 0; i < target_height; ++i) {
        for (int j = 0; j < target_width; ++j) {
            double acc = 0.0;
            for (const auto& tap : row_taps[static_cast<std::size_t>(i)]) {
                acc += tap.weight * cols(tap.source, j);
            }
            out(i, j) = acc;
        }
    }
    return out;
}

RealGrid zscore(const RealGrid& src) {
    if (src.empty()) throw InvalidDimension("zscore of an empty grid");
    const auto values = src.data();
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= n;
    const double sigma = std::sqrt(var);

    RealGrid out(src.height(), src.width(), 0.0);
    if (!(sigma >= kZscoreMinSigma)) return out;
    auto dst = out.data();
    for (std::size_t i = 0; i < values.size(); ++i) dst[i] = (values[i] - mean) / sigma;
    return out;
}

BinaryMask threshold_mask(const RealGrid& src, double tau) {
    if (!std::isfinite(tau)) throw InvalidArgument("threshold must be finite");
    Grid2D<std::uint8_t> out(src.height(), src.width());
    auto s = src.data();
    auto d = out.data();
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] > tau ? 1 : 0;
    return BinaryMask(std::move(out));
}

BinaryMask threshold_mask(const SoftMask& src, double tau) { return threshold_mask(src.grid(), tau); }

BinaryMask morph(const BinaryMask& src, MorphMode mode, int kernel, int iterations) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw InvalidArgument("morphology kernel must be odd and >= 1, got " +
                              std::to_string(kernel));
    }
    if (iterations < 0) throw InvalidArgument("morphology iterations must be >= 0");
    Grid2D<std::uint8_t> cur = src.grid();
    const int radius = kernel / 2;
    if (radius == 0) return src;
    for (int it = 0; it < iterations; ++it) cur = morph_once(cur, mode, radius);
    return BinaryMask(std::move(cur));
}

ComponentLabels label_components(const BinaryMask& src) {
    const int h = src.height();
    const int w = src.width();
    ComponentLabels out{Grid2D<int>(h, w, -1), {}};
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (src(y, x) == 0 || out.labels(y, x) >= 0) continue;
            const int id = static_cast<int>(out.areas.size());
            int area = 0;
            out.labels(y, x) = id;
            stack.emplace_back(y, x);
            while (!stack.empty()) {
                const auto [cy, cx] = stack.back();
                stack.pop_back();
                ++area;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int ny = cy + dy;
                        const int nx = cx + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        if (src(ny, nx) == 0 || out.labels(ny, nx) >= 0) continue;
                        out.labels(ny, nx) = id;
                        stack.emplace_back(ny, nx);
                    }
                }
            }
            out.areas.push_back(area);
        }
    }
    return out;
}

BinaryMask filter_small_components(const BinaryMask& src, double min_area_fraction) {
    if (!(min_area_fraction >= 0.0 && min_area_fraction <= 1.0)) {
        throw InvalidArgument("min_area_fraction must be in [0, 1]");
    }
    const double min_area =
        min_area_fraction * static_cast<double>(src.height()) * static_cast<double>(src.width());
    const auto comps = label_components(src);
    BinaryMask out(src.height(), src.width());
    for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) {
            const int id = comps.labels(y, x);
            if (id >= 0 && static_cast<double>(comps.areas[static_cast<std::size_t>(id)]) >= min_area) {
                out.set(y, x, true);
            }
        }
    }
    return out;
}

BinaryMask upsample_nearest(const BinaryMask& src, int height, int width) {
    if (src.height() < 1 || src.width() < 1 || height < 1 || width < 1) {
        throw InvalidDimension("upsample_nearest requires non-empty grids");
    }
    BinaryMask out(height, width);
    for (int y = 0; y < height; ++y) {
        const int sy = static_cast<int>(static_cast<std::int64_t>(y) * src.height() / height);
        for (int x = 0; x < width; ++x) {
            const int sx = static_cast<int>(static_cast<std::int64_t>(x) * src.width() / width);
            out.set(y, x, src(sy, sx) != 0);
        }
    }
    return out;
}

}  // namespace wildsieve
