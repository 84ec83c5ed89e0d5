#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wildsieve/grid.hpp"

namespace wildsieve::fixture {

struct TransientFixtureOptions {
    int frames = 8;
    int size = 256;
    int patch = 16;
    int dim = 32;
    int object = 48;
    /// The last `clean_frames` frames contain no transient.
    int clean_frames = 2;
    double image_noise = 0.01;
    double feature_noise = 0.03;
    std::uint64_t seed = 7;
};

/// Static textured scene with a square transient moving across it. The
/// rendered side is the same scene without the transient, with independent
/// noise, so the transient is the only real residual.
struct TransientFixture {
    std::vector<ImageGrid> observed;
    std::vector<ImageGrid> rendered;
    std::vector<PatchFeatureMap> observed_features;
    std::vector<PatchFeatureMap> rendered_features;
    std::vector<BinaryMask> ground_truth;
    std::vector<bool> clean;
};

TransientFixture make_transient_fixture(const TransientFixtureOptions& options = {});

/// Replaces frame `frame`'s observation with one whose every channel differs
/// from the rendering by exactly 10^(-psnr/20), so its PSNR is `psnr` dB.
void degrade_frame(TransientFixture& fx, int frame, double psnr, std::uint64_t seed);

/// observed/, rendered/, features/, rendered_features/, gt/ with frame_XX stems.
void write_fixture(const TransientFixture& fx, const std::filesystem::path& dir);

}  // namespace wildsieve::fixture
