#include <doctest.h>

#include <cmath>
#include <numeric>

#include "wildsieve/grid.hpp"
#include "wildsieve/grid_ops.hpp"
#include "wildsieve/rng.hpp"

using namespace wildsieve;

namespace {

RealGrid random_grid(Rng& rng, int h, int w) {
    RealGrid g(h, w);
    for (double& v : g.data()) v = rng.uniform(-3.0, 5.0);
    return g;
}

// Oracle: replicate every source pixel th x tw times, then take plain block
// means of size H x W. Exact for any sizes, no fractional bookkeeping.
RealGrid pool_by_supersampling(const RealGrid& src, int th, int tw) {
    const int h = src.height();
    const int w = src.width();
    RealGrid out(th, tw);
    for (int oy = 0; oy < th; ++oy) {
        for (int ox = 0; ox < tw; ++ox) {
            double s = 0.0;
            for (int sy = oy * h; sy < (oy + 1) * h; ++sy) {
                for (int sx = ox * w; sx < (ox + 1) * w; ++sx) s += src(sy / th, sx / tw);
            }
            out(oy, ox) = s / (static_cast<double>(h) * w);
        }
    }
    return out;
}

BinaryMask block(int h, int w, int y0, int x0, int bh, int bw) {
    BinaryMask m(h, w);
    for (int y = y0; y < y0 + bh; ++y) {
        for (int x = x0; x < x0 + bw; ++x) m.set(y, x, true);
    }
    return m;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            if (a(y, x) && !b(y, x)) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("grid types validate their contents") {
    CHECK_THROWS_AS(RealGrid(2, 2, std::vector<double>(3)), InvalidDimension);
    CHECK_THROWS_AS(SoftMask(RealGrid(1, 1, 1.5)), InvalidArgument);
    CHECK_THROWS_AS(BinaryMask(Grid2D<std::uint8_t>(1, 1, std::uint8_t{2})), InvalidArgument);
    CHECK_THROWS_AS(ImageGrid(1, 1, 2), InvalidDimension);
    CHECK_THROWS_AS(ImageGrid(1, 1, 1, std::vector<double>{1.2}).validate(), InvalidArgument);
    CHECK_THROWS_AS(PatchFeatureMap(1, 1, 2, {1.0f, NAN}), InvalidArgument);

    ImageGrid img(1, 1, 3, std::vector<double>{1.0, 0.0, 0.0});
    CHECK(img.grayscale()(0, 0) == doctest::Approx(0.299));
    CHECK(SoftMask::ones(2, 3).sum() == 6.0);
    CHECK(SoftMask::ones(2, 2).complement().sum() == 0.0);
}

TEST_CASE("area_pool examples") {
    const RealGrid ones(4, 4, 1.0);
    CHECK(area_pool(ones, 2, 2) == RealGrid(2, 2, 1.0));

    RealGrid two(2, 2, std::vector<double>{1, 1, 0, 0});
    CHECK(area_pool(two, 1, 1)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

    RealGrid row(1, 3, std::vector<double>{0, 3, 6});
    const RealGrid pooled = area_pool(row, 1, 2);
    CHECK(pooled(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pooled(0, 1) == doctest::Approx(5.0).epsilon(1e-12));

    CHECK_THROWS_AS(area_pool(RealGrid(0, 3), 1, 1), InvalidDimension);
    CHECK_THROWS_AS(area_pool(row, 0, 1), InvalidDimension);
    CHECK_THROWS_AS(area_pool(row, 1, 4), InvalidDimension);
}

TEST_CASE("area_pool matches the supersampling oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const int h = rng.between(1, 13);
        const int w = rng.between(1, 13);
        const int th = rng.between(1, h);
        const int tw = rng.between(1, w);
        const RealGrid src = random_grid(rng, h, w);
        const RealGrid got = area_pool(src, th, tw);
        const RealGrid want = pool_by_supersampling(src, th, tw);
        for (int y = 0; y < th; ++y) {
            for (int x = 0; x < tw; ++x) CHECK(got(y, x) == doctest::Approx(want(y, x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("area_pool is idempotent and mean-preserving for divisible sizes") {
    Rng rng(3);
    const RealGrid src = random_grid(rng, 12, 18);
    const RealGrid once = area_pool(src, 4, 6);
    CHECK(area_pool(once, 4, 6) == once);
    const double m0 = std::accumulate(src.data().begin(), src.data().end(), 0.0) / src.size();
    const double m1 = std::accumulate(once.data().begin(), once.data().end(), 0.0) / once.size();
    CHECK(m1 == doctest::Approx(m0).epsilon(1e-12));
}

TEST_CASE("zscore") {
    const RealGrid z = zscore(RealGrid(1, 3, std::vector<double>{0, 1, 2}));
    CHECK(z(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(z(0, 1) == doctest::Approx(0.0));
    CHECK(z(0, 2) == doctest::Approx(1.224744871391589).epsilon(1e-12));

    CHECK(zscore(RealGrid(3, 3, 4.2)) == RealGrid(3, 3, 0.0));

    Rng rng(5);
    const RealGrid x = random_grid(rng, 7, 9);
    const RealGrid zx = zscore(x);
    double mean = 0.0;
    double var = 0.0;
    for (double v : zx.data()) mean += v;
    mean /= zx.size();
    for (double v : zx.data()) var += (v - mean) * (v - mean);
    var /= zx.size();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-9);

    const RealGrid zz = zscore(zx);
    RealGrid affine(7, 9);
    for (int i = 0; i < 63; ++i) affine.data()[static_cast<std::size_t>(i)] = 3.5 * x.data()[static_cast<std::size_t>(i)] - 2.0;
    const RealGrid za = zscore(affine);
    for (std::size_t i = 0; i < zx.size(); ++i) {
        CHECK(std::abs(zz.data()[i] - zx.data()[i]) < 1e-9);
        CHECK(std::abs(za.data()[i] - zx.data()[i]) < 1e-9);
    }
}

TEST_CASE("threshold_mask is strict") {
    CHECK(threshold_mask(RealGrid(2, 2, 0.4), 0.5).count() == 0);
    CHECK(threshold_mask(RealGrid(2, 2, 0.6), 0.5).count() == 4);
    CHECK(threshold_mask(RealGrid(2, 2, 0.5), 0.5).count() == 0);
    CHECK(threshold_mask(SoftMask(RealGrid(2, 2, 0.0)), 0.0).count() == 0);
}

TEST_CASE("morphology examples") {
    BinaryMask dot(5, 5);
    dot.set(2, 2, true);
    CHECK(morph(dot, MorphMode::Dilate, 3, 1) == block(5, 5, 1, 1, 3, 3));

    BinaryMask full = block(6, 6, 0, 0, 6, 6);
    CHECK(morph(full, MorphMode::Erode, 3, 1) == block(6, 6, 1, 1, 4, 4));

    CHECK(morph(block(9, 9, 2, 2, 5, 5), MorphMode::Erode, 3, 2) == block(9, 9, 4, 4, 1, 1));
    CHECK_THROWS_AS(morph(dot, MorphMode::Dilate, 4, 1), InvalidArgument);
    CHECK(morph(dot, MorphMode::Dilate, 3, 0) == dot);
}

TEST_CASE("opening and closing sandwich the input") {
    // Erosion treats pixels outside the image as background, so closing can
    // lose foreground at the border; masks here keep a background margin.
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        BinaryMask m(20, 20);
        for (int y = 2; y < 18; ++y) {
            for (int x = 2; x < 18; ++x) m.set(y, x, rng.bernoulli(0.45));
        }
        const BinaryMask opened = morph(morph(m, MorphMode::Erode, 3, 1), MorphMode::Dilate, 3, 1);
        const BinaryMask closed = morph(morph(m, MorphMode::Dilate, 3, 1), MorphMode::Erode, 3, 1);
        CHECK(subset(opened, m));
        CHECK(subset(m, closed));
        CHECK(morph(m, MorphMode::Dilate, 3, 1).count() >= m.count());
        CHECK(morph(m, MorphMode::Erode, 3, 1).count() <= m.count());
    }
}

TEST_CASE("connected components use 8-connectivity") {
    BinaryMask m(4, 4);
    m.set(0, 0, true);
    m.set(1, 1, true);
    m.set(3, 3, true);
    const auto labels = label_components(m);
    REQUIRE(labels.areas.size() == 2);
    CHECK(labels.areas[0] == 2);
    CHECK(labels.areas[1] == 1);
    CHECK(labels.labels(0, 1) == -1);
}

TEST_CASE("filter_small_components") {
    BinaryMask m(256, 256);
    for (int i = 0; i < 100; ++i) m.set(10 + i / 10, 10 + i % 10, true);
    for (int i = 0; i < 200; ++i) m.set(100 + i / 20, 100 + i % 20, true);
    const BinaryMask f = filter_small_components(m, 0.0025);
    CHECK(f.count() == 200);
    CHECK(f(100, 100) == 1);
    CHECK(f(10, 10) == 0);
    CHECK(filter_small_components(f, 0.0025) == f);
    CHECK(filter_small_components(m, 0.0) == m);
}

TEST_CASE("nearest upsampling replicates cells") {
    BinaryMask s(2, 2);
    s.set(0, 1, true);
    const BinaryMask u = upsample_nearest(s, 4, 6);
    CHECK(u.count() == 6);
    CHECK(u(0, 3) == 1);
    CHECK(u(1, 5) == 1);
    CHECK(u(2, 3) == 0);
}
