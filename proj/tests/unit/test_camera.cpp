#include <doctest.h>

#include <cmath>

#include <Eigen/Geometry>

#include "wildsieve/camera.hpp"
#include "wildsieve/rng.hpp"

using namespace wildsieve;
using namespace wildsieve::camera;

namespace {

Eigen::Matrix3d random_rotation(Rng& rng) {
    Eigen::Quaterniond q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    q.normalize();
    return q.toRotationMatrix();
}

}  // namespace

TEST_CASE("rot6d examples") {
    CHECK(rot6d_to_matrix({{1, 0, 0}, {0, 1, 0}}).isApprox(Eigen::Matrix3d::Identity(), 1e-12));
    CHECK(rot6d_to_matrix({{2, 0, 0}, {0, 3, 0}}).isApprox(Eigen::Matrix3d::Identity(), 1e-12));
    Eigen::Matrix3d want;
    want << 0, 1, 0, 1, 0, 0, 0, 0, -1;
    const Eigen::Matrix3d r = rot6d_to_matrix({{0, 1, 0}, {1, 0, 0}});
    CHECK((r - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0));

    CHECK_THROWS_AS(rot6d_to_matrix({{1, 0, 0}, {2, 0, 0}}), DegenerateRotation);
    CHECK_THROWS_AS(rot6d_to_matrix({{0, 0, 0}, {0, 1, 0}}), DegenerateRotation);
}

TEST_CASE("rot6d roundtrips random rotations") {
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Matrix3d r = random_rotation(rng);
        const Eigen::Matrix3d back = rot6d_to_matrix(Rot6D::from_matrix(r));
        CHECK((back - r).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK(std::abs(back.determinant() - 1.0) <= 1e-6);
        CHECK((back.transpose() * back - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("plucker ray map examples") {
    const Intrinsics k{50, 50, 32, 32};
    Pose pose;
    const auto map = plucker_ray_map(k, pose, 64, 64);
    // Pixel (31, 31) has its center at (31.5, 31.5); the principal point sits
    // on the corner shared by pixels 31 and 32, so test a centered grid.
    const Intrinsics kc{50, 50, 31.5, 31.5};
    const auto centered = plucker_ray_map(kc, pose, 63, 63);
    CHECK((centered.direction(31, 31) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
    CHECK(centered.moment(31, 31).norm() < 1e-12);

    pose.translation = {1, 0, 0};
    const auto shifted = plucker_ray_map(kc, pose, 63, 63);
    CHECK((shifted.moment(31, 31) - Eigen::Vector3d(0, -1, 0)).norm() < 1e-12);

    // Pixel-center convention: pixel (0, 0) looks through (0.5, 0.5).
    const Eigen::Vector3d d00 = Eigen::Vector3d((0.5 - 32) / 50, (0.5 - 32) / 50, 1).normalized();
    CHECK((map.direction(0, 0) - d00).norm() < 1e-12);
}

TEST_CASE("plucker constraint and translation equivariance") {
    Rng rng(9);
    for (int cam = 0; cam < 5; ++cam) {
        const Intrinsics k{rng.uniform(20, 90), rng.uniform(20, 90), rng.uniform(0, 32), rng.uniform(0, 24)};
        Pose pose;
        pose.rotation = random_rotation(rng);
        pose.translation = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Eigen::Vector3d t(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        Pose moved = pose;
        moved.translation += t;
        const auto a = plucker_ray_map(k, pose, 24, 32);
        const auto b = plucker_ray_map(k, moved, 24, 32);
        for (int y = 0; y < 24; ++y) {
            for (int x = 0; x < 32; ++x) {
                const auto& d = a.direction(y, x);
                CHECK(std::abs(d.norm() - 1.0) <= 1e-6);
                CHECK(std::abs(d.dot(a.moment(y, x))) <= 1e-6);
                CHECK((b.direction(y, x) - d).norm() < 1e-12);
                CHECK((b.moment(y, x) - a.moment(y, x) - t.cross(d)).norm() < 1e-9);
            }
        }
    }
}

TEST_CASE("ray map flattens to a d=6 feature map") {
    const auto map = plucker_ray_map({10, 10, 2, 2}, Pose{}, 4, 4);
    const auto f = map.to_feature_map();
    CHECK(f.dim() == 6);
    CHECK(f.grid_height() == 4);
    const auto v = f.feature(1, 2);
    CHECK(v[0] == static_cast<float>(map.direction(1, 2).x()));
    CHECK(v[5] == static_cast<float>(map.moment(1, 2).z()));
}

TEST_CASE("trajectory segmentation") {
    std::vector<Eigen::Vector3d> line;
    for (int i = 0; i < 21; ++i) line.emplace_back(0.1 * i, 0, 0);
    const auto segs = segment_trajectory(line, 1.0);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].start_index == 0);
    CHECK(segs[0].end_index == 10);
    CHECK(segs[1].start_index == 11);
    CHECK(segs[1].end_index == 20);
    CHECK(segs[0].path_length >= 1.0 - 1e-9);

    const std::vector<Eigen::Vector3d> still(5, Eigen::Vector3d(1, 2, 3));
    const auto one = segment_trajectory(still, 0.5);
    REQUIRE(one.size() == 1);
    CHECK(one[0].end_index == 4);

    const auto single = segment_trajectory({Eigen::Vector3d::Zero()}, 1.0);
    REQUIRE(single.size() == 1);
    CHECK(single[0].start_index == 0);
    CHECK(single[0].end_index == 0);

    Rng rng(4);
    std::vector<Eigen::Vector3d> walk{Eigen::Vector3d::Zero()};
    for (int i = 0; i < 200; ++i) {
        walk.push_back(walk.back() + Eigen::Vector3d(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0));
    }
    const auto parts = segment_trajectory(walk, 1.5);
    int expected_start = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        CHECK(parts[i].start_index == expected_start);
        CHECK(parts[i].start_index <= parts[i].end_index);
        if (i + 1 < parts.size()) CHECK(parts[i].path_length >= 1.5 * (1 - 1e-9));
        expected_start = parts[i].end_index + 1;
    }
    CHECK(expected_start == static_cast<int>(walk.size()));
}

TEST_CASE("camera JSON accepts rot6d and R") {
    const auto rig = parse_camera_json(R"({"intrinsics":{"fx":100,"fy":90,"cx":32,"cy":24},
        "frames":[{"rot6d":[0,1,0,1,0,0],"t":[1,2,3]},{"R":[1,0,0,0,1,0,0,0,1],"t":[0,0,0]}]})");
    CHECK(rig.intrinsics.fy == 90);
    REQUIRE(rig.frames.size() == 2);
    CHECK(rig.frames[0].rotation(2, 2) == doctest::Approx(-1.0));
    CHECK(rig.frames[0].translation.y() == 2);
    CHECK(rig.frames[1].rotation.isIdentity());
    CHECK_THROWS_AS(parse_camera_json(R"({"intrinsics":{"fx":-1,"fy":1,"cx":0,"cy":0},"frames":[]})"),
                    InvalidArgument);
    CHECK_THROWS(parse_camera_json("{not json"));
}
