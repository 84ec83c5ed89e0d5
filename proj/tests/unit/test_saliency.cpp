#include <doctest.h>

#include <cmath>

#include "wildsieve/grid_ops.hpp"
#include "wildsieve/rng.hpp"
#include "wildsieve/saliency.hpp"

using namespace wildsieve;
using namespace wildsieve::saliency;

namespace {

ImageGrid random_image(Rng& rng, int h, int w, int c) {
    ImageGrid img(h, w, c);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int k = 0; k < c; ++k) img.at(y, x, k) = rng.uniform01();
        }
    }
    return img;
}

// Oracle: full 2-D Gaussian window evaluated directly at every valid
// position, with the window normalized as a whole.
RealGrid ssim_oracle(const RealGrid& a, const RealGrid& b, const SsimParams& p) {
    const int n = p.window_size;
    std::vector<double> w2(static_cast<std::size_t>(n * n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double di = i - n / 2;
            const double dj = j - n / 2;
            w2[static_cast<std::size_t>(i * n + j)] = std::exp(-(di * di + dj * dj) / (2 * p.sigma * p.sigma));
            total += w2[static_cast<std::size_t>(i * n + j)];
        }
    }
    for (double& v : w2) v /= total;
    RealGrid out(a.height() - n + 1, a.width() - n + 1);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            double ma = 0, mb = 0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double w = w2[static_cast<std::size_t>(i * n + j)];
                    ma += w * a(y + i, x + j);
                    mb += w * b(y + i, x + j);
                }
            }
            double va = 0, vb = 0, cov = 0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double w = w2[static_cast<std::size_t>(i * n + j)];
                    const double da = a(y + i, x + j) - ma;
                    const double db = b(y + i, x + j) - mb;
                    va += w * da * da;
                    vb += w * db * db;
                    cov += w * da * db;
                }
            }
            out(y, x) = (2 * ma * mb + p.c1) * (2 * cov + p.c2) / ((ma * ma + mb * mb + p.c1) * (va + vb + p.c2));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("gaussian taps are normalized and symmetric") {
    const auto t = gaussian_taps(11, 1.5);
    REQUIRE(t.size() == 11);
    double s = 0.0;
    for (double v : t) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t[0] == doctest::Approx(t[10]).epsilon(1e-15));
    CHECK(t[5] > t[4]);
    CHECK_THROWS_AS(gaussian_taps(10, 1.5), InvalidArgument);
}

TEST_CASE("ssim_map matches the direct 2-D window oracle") {
    Rng rng(21);
    const ImageGrid a = random_image(rng, 20, 23, 1);
    ImageGrid b = a;
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 23; ++x) b.at(y, x, 0) = std::clamp(a.at(y, x, 0) + rng.uniform(-0.2, 0.2), 0.0, 1.0);
    }
    const SsimParams p;
    const RealGrid got = ssim_map(a, b, p);
    const RealGrid want = ssim_oracle(a.grayscale(), b.grayscale(), p);
    REQUIRE(got.height() == 10);
    REQUIRE(got.width() == 13);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got.data()[i] - want.data()[i]) < 1e-12);
}

TEST_CASE("ssim_map examples and properties") {
    Rng rng(8);
    const ImageGrid a = random_image(rng, 16, 16, 3);
    const ImageGrid b = random_image(rng, 16, 16, 3);
    const RealGrid self = ssim_map(a, a);
    for (double v : self.data()) CHECK(std::abs(v - 1.0) < 1e-9);

    const RealGrid ab = ssim_map(a, b);
    const RealGrid ba = ssim_map(b, a);
    for (std::size_t i = 0; i < ab.size(); ++i) {
        CHECK(std::abs(ab.data()[i] - ba.data()[i]) < 1e-9);
        CHECK(ab.data()[i] <= 1.0 + 1e-9);
    }

    const SsimParams p;
    const RealGrid flat = ssim_map(ImageGrid(12, 12, 1, 0.0), ImageGrid(12, 12, 1, 1.0));
    const double expected = p.c1 * p.c2 / ((1 + p.c1) * p.c2);
    CHECK(flat(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(flat(0, 0) == doctest::Approx(9.999e-5).epsilon(1e-4));

    CHECK_THROWS_AS(ssim_map(ImageGrid(10, 20, 1), ImageGrid(10, 20, 1)), InvalidDimension);
    CHECK_THROWS_AS(ssim_map(ImageGrid(20, 20, 1), ImageGrid(20, 21, 1)), InvalidDimension);
}

TEST_CASE("dino dissimilarity") {
    const PatchFeatureMap a(1, 2, 2, {1, 0, 0, 3});
    const PatchFeatureMap b(1, 2, 2, {0, 5, 0, -1});
    auto same = dino_dissimilarity(a, a);
    CHECK(same.map(0, 0) == doctest::Approx(0.0));
    CHECK(same.map(0, 1) == doctest::Approx(0.0));
    auto d = dino_dissimilarity(a, b);
    CHECK(d.map(0, 0) == doctest::Approx(1.0));
    CHECK(d.map(0, 1) == doctest::Approx(2.0));
    CHECK(d.degenerate_patches == 0);

    const PatchFeatureMap z(1, 2, 2, {0, 0, 0, 3});
    auto dz = dino_dissimilarity(z, a);
    CHECK(dz.map(0, 0) == 1.0);
    CHECK(dz.degenerate_patches == 1);
    CHECK_THROWS_AS(dino_dissimilarity(a, PatchFeatureMap(2, 1, 2, {1, 0, 0, 1})), InvalidDimension);
}

TEST_CASE("ssim dissimilarity at patch resolution") {
    Rng rng(2);
    const ImageGrid a = random_image(rng, 256, 256, 3);
    const auto zero = ssim_dissimilarity(a, a, 16, 16);
    CHECK(zero.height() == 16);
    CHECK(zero.width() == 16);
    for (double v : zero.data()) CHECK(std::abs(v) < 1e-9);

    // More rendering noise, more dissimilarity.
    const ImageGrid base(64, 64, 1, 0.5);
    double prev = -1.0;
    for (double amp : {0.02, 0.08, 0.2}) {
        Rng noise(77);
        ImageGrid r = base;
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) r.at(y, x, 0) = 0.5 + amp * (2 * noise.uniform01() - 1);
        }
        const auto d = ssim_dissimilarity(base, r, 4, 4);
        double mean = 0.0;
        for (double v : d.data()) mean += v / 16.0;
        CHECK(mean > prev);
        prev = mean;
    }
}

TEST_CASE("adaptive weights") {
    auto w15 = adaptive_weights(15);
    CHECK(w15.dino == doctest::Approx(0.8));
    CHECK(w15.ssim == doctest::Approx(0.2));
    auto w20 = adaptive_weights(20);
    CHECK(w20.dino == doctest::Approx(0.5));
    CHECK(w20.ssim == doctest::Approx(0.5));
    auto w30 = adaptive_weights(30);
    CHECK(w30.dino == doctest::Approx(0.2));
    CHECK(w30.ssim == doctest::Approx(0.8));
    double prev = 0.0;
    for (double p = -10; p <= 120; p += 0.5) {
        auto w = adaptive_weights(p);
        CHECK(std::abs(w.dino + w.ssim - 1.0) < 1e-9);
        CHECK(w.ssim >= prev);
        prev = w.ssim;
    }
}

TEST_CASE("fusion") {
    const RealGrid a(1, 3, std::vector<double>{0, 1, 2});
    const RealGrid b(1, 3, std::vector<double>{2, 1, 0});
    const auto f = fuse_saliency(a, b, {0.5, 0.5});
    for (double v : f.data()) CHECK(std::abs(v) < 1e-12);
    CHECK(fuse_saliency(a, b, {1.0, 0.0}) == zscore(a));
    const auto eq = fuse_saliency(a, a, {0.3, 0.7});
    for (std::size_t i = 0; i < 3; ++i) CHECK(eq.data()[i] == doctest::Approx(zscore(a).data()[i]));

    Rng rng(6);
    RealGrid x(4, 5), y(4, 5), ys(4, 5);
    for (std::size_t i = 0; i < 20; ++i) {
        x.data()[i] = rng.uniform01();
        y.data()[i] = rng.uniform01();
        ys.data()[i] = 7.0 * y.data()[i] + 3.0;
    }
    const auto f1 = fuse_saliency(x, y, {0.4, 0.6});
    const auto f2 = fuse_saliency(x, ys, {0.4, 0.6});
    for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(f1.data()[i] - f2.data()[i]) < 1e-9);
    CHECK_THROWS_AS(fuse_saliency(x, RealGrid(5, 4), {0.5, 0.5}), InvalidDimension);
    CHECK_THROWS_AS(fuse_saliency(x, y, {0.7, 0.7}), InvalidArgument);
}
