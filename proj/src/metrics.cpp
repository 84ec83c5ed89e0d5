#include "wildsieve/metrics.hpp"

#include <cmath>
#include <string>

#include "wildsieve/grid_ops.hpp"

namespace wildsieve::metrics {

namespace {

void require_same_shape(const ImageGrid& a, const ImageGrid& b) {
    if (!a.same_shape(b)) throw InvalidDimension("observed and rendered images differ in shape");
}

PsnrResult psnr_from_mse(double mse) {
    if (mse < kMseFloor) return {kSaturatedPsnr, true};
    return {-10.0 * std::log10(mse), false};
}

}  // namespace

PsnrResult masked_psnr(const ImageGrid& observed, const ImageGrid& rendered, const SoftMask& mask) {
    require_same_shape(observed, rendered);
    if (mask.height() != observed.height() || mask.width() != observed.width()) {
        throw InvalidDimension("mask and images differ in shape");
    }
    const int c = observed.channels();
    double num = 0.0;
    double den = 0.0;
    for (int y = 0; y < observed.height(); ++y) {
        for (int x = 0; x < observed.width(); ++x) {
            const double m = mask(y, x);
            den += m;
            if (m == 0.0) continue;
            double se = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const double d = observed.at(y, x, ch) - rendered.at(y, x, ch);
                se += d * d;
            }
            num += se * m;
        }
    }
    if (!(den > 0.0)) throw EmptyMask("masked PSNR over an empty mask");
    return psnr_from_mse(num / (static_cast<double>(c) * den));
}

PsnrResult psnr(const ImageGrid& observed, const ImageGrid& rendered) {
    require_same_shape(observed, rendered);
    const auto a = observed.data();
    const auto b = rendered.data();
    if (a.empty()) throw InvalidDimension("PSNR of an empty image");
    double se = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
    return psnr_from_mse(se / static_cast<double>(a.size()));
}

double masked_ssim(const ImageGrid& observed, const ImageGrid& rendered, const SoftMask& mask,
                   const saliency::SsimParams& params) {
    if (mask.height() != observed.height() || mask.width() != observed.width()) {
        throw InvalidDimension("mask and images differ in shape");
    }
    const RealGrid s = saliency::ssim_map(observed, rendered, params);
    const int r = params.radius();
    RealGrid cropped(mask.height() - 2 * r, mask.width() - 2 * r);
    for (int y = 0; y < cropped.height(); ++y) {
        for (int x = 0; x < cropped.width(); ++x) cropped(y, x) = mask(y + r, x + r);
    }
    const RealGrid pooled = area_pool(cropped, s.height(), s.width());
    double num = 0.0;
    double den = 0.0;
    auto ps = s.data();
    auto pm = pooled.data();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        num += ps[i] * pm[i];
        den += pm[i];
    }
    if (!(den > 0.0)) throw EmptyMask("masked SSIM: mask is empty at SSIM resolution");
    return num / den;
}

double mean_ssim(const ImageGrid& observed, const ImageGrid& rendered,
                 const saliency::SsimParams& params) {
    const RealGrid s = saliency::ssim_map(observed, rendered, params);
    double sum = 0.0;
    for (double v : s.data()) sum += v;
    return sum / static_cast<double>(s.size());
}

double masked_lpips(const LayerDiffStack& diffs, const SoftMask& mask) {
    double total = 0.0;
    for (std::size_t l = 0; l < diffs.layers.size(); ++l) {
        const auto& d = diffs.layers[l];
        const RealGrid pooled = area_pool(mask.grid(), d.height(), d.width());
        double num = 0.0;
        double den = 0.0;
        auto pd = d.data();
        auto pm = pooled.data();
        for (std::size_t i = 0; i < pd.size(); ++i) {
            if (!std::isfinite(pd[i]) || pd[i] < 0.0) {
                throw InvalidArgument("layer differences must be finite and non-negative");
            }
            num += static_cast<double>(pd[i]) * pm[i];
            den += pm[i];
        }
        if (!(den > 0.0)) {
            throw EmptyMask("masked LPIPS: mask is empty at layer " + std::to_string(l));
        }
        total += num / den;
    }
    return total;
}

IouRecall mask_iou_recall(const BinaryMask& pred, const BinaryMask& gt) {
    if (pred.height() != gt.height() || pred.width() != gt.width()) {
        throw InvalidDimension("prediction and ground-truth masks differ in shape");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    std::size_t positives = 0;
    auto p = pred.grid().data();
    auto g = gt.grid().data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        inter += p[i] & g[i];
        uni += p[i] | g[i];
        positives += g[i];
    }
    IouRecall out;
    out.iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    out.recall = positives == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(positives);
    return out;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json frames = nlohmann::json::array();
    double psnr_sum = 0.0;
    double ssim_sum = 0.0;
    double lpips_sum = 0.0;
    bool all_lpips = !per_frame.empty();
    for (const auto& f : per_frame) {
        frames.push_back({{"frame", f.frame},
                          {"psnr_masked", f.psnr_masked},
                          {"ssim_masked", f.ssim_masked},
                          {"lpips_masked", f.lpips_masked ? nlohmann::json(*f.lpips_masked) : nlohmann::json(nullptr)},
                          {"saturated", f.saturated}});
        psnr_sum += f.psnr_masked;
        ssim_sum += f.ssim_masked;
        if (f.lpips_masked) {
            lpips_sum += *f.lpips_masked;
        } else {
            all_lpips = false;
        }
    }
    const double n = static_cast<double>(per_frame.size());
    nlohmann::json summary;
    summary["psnr"] = per_frame.empty() ? nlohmann::json(nullptr) : nlohmann::json(psnr_sum / n);
    summary["ssim"] = per_frame.empty() ? nlohmann::json(nullptr) : nlohmann::json(ssim_sum / n);
    summary["lpips"] = all_lpips ? nlohmann::json(lpips_sum / n) : nlohmann::json(nullptr);
    summary["miou"] = mask_quality ? nlohmann::json(mask_quality->miou) : nlohmann::json(nullptr);
    summary["recall"] = mask_quality ? nlohmann::json(mask_quality->recall) : nlohmann::json(nullptr);
    return {{"per_frame", frames}, {"summary", summary}};
}

}  // namespace wildsieve::metrics
