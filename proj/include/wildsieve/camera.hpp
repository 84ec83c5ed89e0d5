#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wildsieve/grid.hpp"

namespace wildsieve::camera {

/// Pinhole intrinsics in pixels.
struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;

    void validate() const;
};

/// Camera-to-world rigid transform. `translation` is the camera center in
/// world coordinates.
struct Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    /// Checks R^T R = I and det R = +1 within `tol`.
    void validate(double tol = 1e-6) const;
};

/// Continuous rotation parameterization: two column seeds that are
/// Gram-Schmidt orthonormalized.
struct Rot6D {
    Eigen::Vector3d a1;
    Eigen::Vector3d a2;

    static Rot6D from_matrix(const Eigen::Matrix3d& r) { return {r.col(0), r.col(1)}; }
    static Rot6D from_array(const std::array<double, 6>& v) {
        return {Eigen::Vector3d(v[0], v[1], v[2]), Eigen::Vector3d(v[3], v[4], v[5])};
    }
};

inline constexpr double kDegenerateSeedNorm = 1e-8;

/// Throws DegenerateRotation when the seeds are (near) parallel or zero.
Eigen::Matrix3d rot6d_to_matrix(const Rot6D& v);

class PluckerRayMap {
public:
    PluckerRayMap(int height, int width);

    int height() const { return height_; }
    int width() const { return width_; }

    const Eigen::Vector3d& direction(int y, int x) const { return directions_[index(y, x)]; }
    const Eigen::Vector3d& moment(int y, int x) const { return moments_[index(y, x)]; }
    void set(int y, int x, const Eigen::Vector3d& d, const Eigen::Vector3d& m) {
        directions_[index(y, x)] = d;
        moments_[index(y, x)] = m;
    }

    /// Six channels per pixel: direction followed by moment.
    PatchFeatureMap to_feature_map() const;

private:
    std::size_t index(int y, int x) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int height_;
    int width_;
    std::vector<Eigen::Vector3d> directions_;
    std::vector<Eigen::Vector3d> moments_;
};

/// Rays through pixel centers (u + 0.5, v + 0.5), directions rotated to the
/// world frame and normalized, moments o x d with o the camera center.
PluckerRayMap plucker_ray_map(const Intrinsics& k, const Pose& pose, int height, int width);

struct TrajectorySegment {
    int start_index = 0;
    int end_index = 0;  // inclusive
    double path_length = 0.0;

    bool operator==(const TrajectorySegment&) const = default;
};

/// Greedy split of a camera path. A segment closes at the first frame whose
/// accumulated step length since the segment start reaches `tau_translation`
/// (within a relative 1e-9, so sums of decimal steps land on the boundary).
/// The trailing partial segment is always emitted.
std::vector<TrajectorySegment> segment_trajectory(const std::vector<Eigen::Vector3d>& centers,
                                                  double tau_translation);

struct CameraRig {
    Intrinsics intrinsics;
    std::vector<Pose> frames;
};

/// {"intrinsics":{fx,fy,cx,cy},"frames":[{"rot6d":[6]|"R":[9 row-major],"t":[3]}]}
CameraRig parse_camera_json(const std::string& text);
CameraRig read_camera_json(const std::filesystem::path& path);

}  // namespace wildsieve::camera
