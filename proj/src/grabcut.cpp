#include "wildsieve/grabcut.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "wildsieve/maxflow.hpp"
#include "wildsieve/rng.hpp"

namespace wildsieve::grabcut {

namespace {

struct NeighborPair {
    int a;
    int b;
    double weight;
};

std::vector<Eigen::Vector3d> pixel_colors(const ImageGrid& image) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(static_cast<std::size_t>(image.height()) * image.width());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            if (image.channels() == 3) {
                out.emplace_back(image.at(y, x, 0), image.at(y, x, 1), image.at(y, x, 2));
            } else {
                const double g = image.at(y, x, 0);
                out.emplace_back(g, g, g);
            }
        }
    }
    return out;
}

// Smoothness weights gamma * exp(-beta |z_m - z_n|^2) / dist, with beta
// estimated over the same neighbor system.
std::vector<NeighborPair> neighbor_pairs(const std::vector<Eigen::Vector3d>& z, int h, int w,
                                         const GrabcutParams& params) {
    struct Offset {
        int dy, dx;
        double dist;
    };
    std::vector<Offset> offsets{{0, 1, 1.0}, {1, 0, 1.0}};
    if (params.connectivity == 8) {
        offsets.push_back({1, 1, std::sqrt(2.0)});
        offsets.push_back({1, -1, std::sqrt(2.0)});
    }
    std::vector<NeighborPair> pairs;
    std::vector<double> d2;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (const auto& o : offsets) {
                const int ny = y + o.dy;
                const int nx = x + o.dx;
                if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                const int a = y * w + x;
                const int b = ny * w + nx;
                pairs.push_back({a, b, o.dist});
                d2.push_back((z[static_cast<std::size_t>(a)] - z[static_cast<std::size_t>(b)]).squaredNorm());
            }
        }
    }
    double mean = 0.0;
    for (double v : d2) mean += v;
    if (!d2.empty()) mean /= static_cast<double>(d2.size());
    const double beta = mean > 0.0 ? 1.0 / (2.0 * mean) : 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        pairs[i].weight = params.gamma * std::exp(-beta * d2[i]) / pairs[i].weight;
    }
    return pairs;
}

std::vector<Eigen::Vector3d> gather(const std::vector<Eigen::Vector3d>& z, const std::vector<std::uint8_t>& fg,
                                    bool want_fg) {
    std::vector<Eigen::Vector3d> out;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if ((fg[i] != 0) == want_fg) out.push_back(z[i]);
    }
    return out;
}

// Hard-assign every pixel to its cheapest component in its current class
// model, then refit that model by maximum likelihood.
std::optional<Gmm> refit(const std::vector<Eigen::Vector3d>& z, const std::vector<std::uint8_t>& fg,
                         bool want_fg, const Gmm& current) {
    std::vector<Eigen::Vector3d> pts;
    std::vector<std::size_t> assign;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if ((fg[i] != 0) != want_fg) continue;
        pts.push_back(z[i]);
        assign.push_back(current.best_component(z[i]).first);
    }
    if (pts.empty()) return std::nullopt;
    return fit_gmm_from_assignments(pts, assign, current.size());
}

double total_energy(const std::vector<Eigen::Vector3d>& z, const std::vector<std::uint8_t>& fg,
                    const Gmm& fg_model, const Gmm& bg_model, const std::vector<NeighborPair>& pairs) {
    double e = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        e += (fg[i] ? fg_model : bg_model).best_component(z[i]).second;
    }
    for (const auto& p : pairs) {
        if (fg[static_cast<std::size_t>(p.a)] != fg[static_cast<std::size_t>(p.b)]) e += p.weight;
    }
    return e;
}

}  // namespace

TrimapLabel trimap_label_from_gray(std::uint8_t v) {
    if (v < 32) return TrimapLabel::Background;
    if (v < 96) return TrimapLabel::ProbableBackground;
    if (v < 192) return TrimapLabel::ProbableForeground;
    return TrimapLabel::Foreground;
}

std::uint8_t trimap_label_to_gray(TrimapLabel l) {
    switch (l) {
        case TrimapLabel::Background: return 0;
        case TrimapLabel::ProbableBackground: return 64;
        case TrimapLabel::ProbableForeground: return 128;
        case TrimapLabel::Foreground: return 255;
    }
    return 0;
}

void GrabcutParams::validate() const {
    if (!(gamma > 0.0) || iterations < 1 || components < 1 ||
        (connectivity != 4 && connectivity != 8)) {
        throw InvalidArgument("grabcut needs gamma > 0, iterations >= 1, components >= 1, "
                              "connectivity 4 or 8");
    }
}

GrabcutResult grabcut(const ImageGrid& image, const Trimap& trimap, const GrabcutParams& params,
                      std::uint64_t seed) {
    params.validate();
    const int h = image.height();
    const int w = image.width();
    if (trimap.height() != h || trimap.width() != w) {
        throw InvalidDimension("trimap and image must have the same size");
    }
    const auto labels = trimap.data();
    if (std::none_of(labels.begin(), labels.end(), is_foreground)) {
        throw InvalidArgument("trimap has no foreground pixels");
    }

    const auto z = pixel_colors(image);
    std::vector<std::uint8_t> fg(z.size());
    std::vector<int> node_of(z.size(), -1);
    int nodes = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        fg[i] = is_foreground(labels[i]) ? 1 : 0;
        if (!is_definite(labels[i])) node_of[i] = nodes++;
    }

    auto to_mask = [&] {
        Grid2D<std::uint8_t> g(h, w, std::vector<std::uint8_t>(fg));
        return BinaryMask(std::move(g));
    };

    const auto fg_pixels = gather(z, fg, true);
    const auto bg_pixels = gather(z, fg, false);
    if (nodes == 0 || bg_pixels.empty()) return {to_mask(), {}};

    Gmm fg_model = fit_gmm(fg_pixels, params.components, mix_seed({seed, 1})).gmm;
    Gmm bg_model = fit_gmm(bg_pixels, params.components, mix_seed({seed, 2})).gmm;
    const auto pairs = neighbor_pairs(z, h, w, params);

    GrabcutResult result;
    for (int iter = 0; iter < params.iterations; ++iter) {
        if (auto m = refit(z, fg, true, fg_model)) fg_model = std::move(*m);
        if (auto m = refit(z, fg, false, bg_model)) bg_model = std::move(*m);

        std::vector<graphcut::TerminalCaps> terminals(static_cast<std::size_t>(nodes));
        for (std::size_t i = 0; i < z.size(); ++i) {
            const int n = node_of[i];
            if (n < 0) continue;
            const double cost_fg = fg_model.best_component(z[i]).second;
            const double cost_bg = bg_model.best_component(z[i]).second;
            const double base = std::min(cost_fg, cost_bg);
            // Source side is foreground: staying foreground cuts the sink edge.
            terminals[static_cast<std::size_t>(n)] = {cost_bg - base, cost_fg - base};
        }
        std::vector<graphcut::Arc> arcs;
        for (const auto& p : pairs) {
            const int na = node_of[static_cast<std::size_t>(p.a)];
            const int nb = node_of[static_cast<std::size_t>(p.b)];
            if (na >= 0 && nb >= 0) {
                arcs.push_back({na, nb, p.weight, p.weight});
            } else if (na >= 0 || nb >= 0) {
                const int n = na >= 0 ? na : nb;
                const bool other_fg = fg[static_cast<std::size_t>(na >= 0 ? p.b : p.a)] != 0;
                auto& t = terminals[static_cast<std::size_t>(n)];
                (other_fg ? t.source : t.sink) += p.weight;
            }
        }
        const auto cut = graphcut::min_cut(nodes, terminals, arcs);
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (node_of[i] >= 0) fg[i] = cut.source_side[static_cast<std::size_t>(node_of[i])];
        }
        result.energy.push_back(total_energy(z, fg, fg_model, bg_model, pairs));
    }
    result.mask = to_mask();
    return result;
}

BinaryMask grabcut_refine(const ImageGrid& image, const Trimap& trimap, const GrabcutParams& params,
                          std::uint64_t seed) {
    return grabcut(image, trimap, params, seed).mask;
}

}  // namespace wildsieve::grabcut
