#include "fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "wildsieve/grid_io.hpp"
#include "wildsieve/rng.hpp"

namespace wildsieve::fixture {

namespace {

constexpr int kMaterials = 5;

double normal(Rng& rng) {
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Orthonormal prototypes: kMaterials background materials plus one for the
// transient, so no background patch resembles it.
std::vector<std::vector<double>> prototypes(int dim, Rng& rng) {
    std::vector<std::vector<double>> out;
    while (static_cast<int>(out.size()) < kMaterials + 1) {
        std::vector<double> v(static_cast<std::size_t>(dim));
        for (double& x : v) x = normal(rng);
        for (const auto& u : out) {
            double d = 0.0;
            for (int i = 0; i < dim; ++i) d += v[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
            for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] -= d * u[static_cast<std::size_t>(i)];
        }
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        if (n < 1e-6) continue;
        for (double& x : v) x /= n;
        out.push_back(std::move(v));
    }
    return out;
}

// Material index at scene coordinates: irregular blobs from a few sinusoids.
struct Layout {
    double p[4] = {0.3, -1.1, -0.7, 0.4};
};

int material_at(const Layout& l, double y, double x) {
    const double a = std::sin(y * 0.045 + l.p[0]) + std::cos(x * 0.038 + l.p[1]) + 0.6 * std::sin((x + y) * 0.021);
    const double b = std::cos(y * 0.027 + l.p[2]) * std::sin(x * 0.052 + l.p[3]);
    const double v = (a + 2.6) / 5.2 * 3.0 + (b + 1.0);
    return std::clamp(static_cast<int>(v), 0, kMaterials - 1);
}

constexpr double kPalette[kMaterials][3] = {
    {0.42, 0.36, 0.28}, {0.30, 0.45, 0.25}, {0.55, 0.55, 0.52}, {0.25, 0.30, 0.40}, {0.62, 0.50, 0.35}};
constexpr double kTransientColor[3] = {0.85, 0.15, 0.75};

double texture(double y, double x, int m) {
    return 0.05 * std::sin(y * (0.31 + 0.07 * m) + x * 0.17) + 0.04 * std::cos(x * (0.23 + 0.05 * m) - y * 0.11);
}

struct Placement {
    int top = 0;
    int left = 0;
};

}  // namespace

TransientFixture make_transient_fixture(const TransientFixtureOptions& o) {
    TransientFixture fx;
    Rng proto_rng(mix_seed({o.seed, 1}));
    const auto protos = prototypes(o.dim, proto_rng);
    Layout layout;
    for (double& p : layout.p) p += 2.0 * std::numbers::pi * proto_rng.uniform01();
    const int gh = o.size / o.patch;
    const auto dim = static_cast<std::size_t>(o.dim);

    for (int f = 0; f < o.frames; ++f) {
        const bool clean = f >= o.frames - o.clean_frames;
        // Simulated camera drift plus a transient path off the patch lattice.
        const double dy = 3.0 * f;
        const double dx = 5.0 * f;
        const Placement p{28 + 21 * f, 36 + 23 * f};

        ImageGrid obs(o.size, o.size, 3);
        ImageGrid ren(o.size, o.size, 3);
        BinaryMask gt(o.size, o.size);
        Rng noise(mix_seed({o.seed, 2, static_cast<std::uint64_t>(f)}));
        std::vector<double> coverage(static_cast<std::size_t>(gh * gh * (kMaterials + 1)), 0.0);
        for (int y = 0; y < o.size; ++y) {
            for (int x = 0; x < o.size; ++x) {
                const int m = material_at(layout, y + dy, x + dx);
                const bool on = !clean && y >= p.top && y < p.top + o.object && x >= p.left &&
                                x < p.left + o.object;
                gt.set(y, x, on);
                const double t = texture(y + dy, x + dx, m);
                const std::size_t cell = static_cast<std::size_t>((y / o.patch) * gh + x / o.patch);
                coverage[cell * (kMaterials + 1) + static_cast<std::size_t>(on ? kMaterials : m)] += 1.0;
                for (int c = 0; c < 3; ++c) {
                    const double bg = kPalette[m][c] + t;
                    const double fg = kTransientColor[c] + 0.03 * std::sin(0.4 * (y - p.top) + 0.3 * c);
                    obs.at(y, x, c) = std::clamp((on ? fg : bg) + o.image_noise * normal(noise), 0.0, 1.0);
                    ren.at(y, x, c) = std::clamp(bg + o.image_noise * normal(noise), 0.0, 1.0);
                }
            }
        }

        Rng feat_noise(mix_seed({o.seed, 3, static_cast<std::uint64_t>(f)}));
        std::vector<float> fo(static_cast<std::size_t>(gh * gh) * dim);
        std::vector<float> fr(static_cast<std::size_t>(gh * gh) * dim);
        const double area = static_cast<double>(o.patch * o.patch);
        for (std::size_t cell = 0; cell < static_cast<std::size_t>(gh * gh); ++cell) {
            std::vector<double> vo(dim, 0.0);
            std::vector<double> vr(dim, 0.0);
            double static_share = 0.0;
            for (int m = 0; m <= kMaterials; ++m) {
                const double w = coverage[cell * (kMaterials + 1) + static_cast<std::size_t>(m)] / area;
                if (m < kMaterials) static_share += w;
                for (std::size_t i = 0; i < dim; ++i) {
                    vo[i] += w * protos[static_cast<std::size_t>(m)][i];
                    if (m < kMaterials) vr[i] += w * protos[static_cast<std::size_t>(m)][i];
                }
            }
            // Rendered features see the static scene only; where the
            // transient covered everything, fall back to the dominant
            // material under it, which the renderer would reproduce.
            if (static_share == 0.0) {
                const auto y = static_cast<int>(cell) / gh;
                const auto x = static_cast<int>(cell) % gh;
                const int m = material_at(layout, y * o.patch + o.patch / 2 + dy, x * o.patch + o.patch / 2 + dx);
                vr = protos[static_cast<std::size_t>(m)];
            }
            for (std::size_t i = 0; i < dim; ++i) {
                fo[cell * dim + i] = static_cast<float>(vo[i] + o.feature_noise * normal(feat_noise));
                fr[cell * dim + i] = static_cast<float>(vr[i] + o.feature_noise * normal(feat_noise));
            }
        }
        fx.observed.push_back(std::move(obs));
        fx.rendered.push_back(std::move(ren));
        fx.observed_features.emplace_back(gh, gh, o.dim, std::move(fo));
        fx.rendered_features.emplace_back(gh, gh, o.dim, std::move(fr));
        fx.ground_truth.push_back(std::move(gt));
        fx.clean.push_back(clean);
    }
    return fx;
}

void degrade_frame(TransientFixture& fx, int frame, double psnr, std::uint64_t seed) {
    const auto i = static_cast<std::size_t>(frame);
    const double delta = std::pow(10.0, -psnr / 20.0);
    const ImageGrid& ren = fx.rendered[i];
    ImageGrid out(ren.height(), ren.width(), ren.channels());
    Rng rng(seed);
    for (int y = 0; y < ren.height(); ++y) {
        for (int x = 0; x < ren.width(); ++x) {
            for (int c = 0; c < ren.channels(); ++c) {
                const double r = ren.at(y, x, c);
                double v = rng.bernoulli(0.5) ? r + delta : r - delta;
                if (v > 1.0) v = r - delta;
                if (v < 0.0) v = r + delta;
                out.at(y, x, c) = v;
            }
        }
    }
    fx.observed[i] = std::move(out);
}

void write_fixture(const TransientFixture& fx, const std::filesystem::path& dir) {
    for (const char* sub : {"observed", "rendered", "features", "rendered_features", "gt"}) {
        std::filesystem::create_directories(dir / sub);
    }
    for (std::size_t f = 0; f < fx.observed.size(); ++f) {
        char stem[32];
        std::snprintf(stem, sizeof(stem), "frame_%02zu", f);
        const std::string s(stem);
        io::write_image_png(dir / "observed" / (s + ".png"), fx.observed[f]);
        io::write_image_png(dir / "rendered" / (s + ".png"), fx.rendered[f]);
        io::write_features(dir / "features" / (s + ".wrzf"), fx.observed_features[f]);
        io::write_features(dir / "rendered_features" / (s + ".wrzf"), fx.rendered_features[f]);
        io::write_mask_png(dir / "gt" / (s + ".png"), fx.ground_truth[f]);
    }
}

}  // namespace wildsieve::fixture
