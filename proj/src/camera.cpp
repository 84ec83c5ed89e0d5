#include "wildsieve/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "wildsieve/error.hpp"

namespace wildsieve::camera {

void Intrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
        !std::isfinite(cx) || !std::isfinite(cy)) {
        throw InvalidArgument("intrinsics need finite values with fx > 0 and fy > 0");
    }
}

void Pose::validate(double tol) const {
    if (!rotation.allFinite() || !translation.allFinite()) {
        throw InvalidArgument("pose contains non-finite values");
    }
    const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                             .cwiseAbs()
                             .maxCoeff();
    if (ortho > tol || std::abs(rotation.determinant() - 1.0) > tol) {
        throw InvalidArgument("pose rotation is not a proper rotation matrix");
    }
}

Eigen::Matrix3d rot6d_to_matrix(const Rot6D& v) {
    const double n1 = v.a1.norm();
    if (!(n1 >= kDegenerateSeedNorm)) throw DegenerateRotation("first rotation seed is zero");
    const Eigen::Vector3d c1 = v.a1 / n1;
    const Eigen::Vector3d residual = v.a2 - v.a2.dot(c1) * c1;
    const double n2 = residual.norm();
    if (!(n2 >= kDegenerateSeedNorm)) {
        throw DegenerateRotation("rotation seeds are parallel or the second seed is zero");
    }
    const Eigen::Vector3d c2 = residual / n2;
    Eigen::Matrix3d r;
    r.col(0) = c1;
    r.col(1) = c2;
    r.col(2) = c1.cross(c2);
    return r;
}

PluckerRayMap::PluckerRayMap(int height, int width) : height_(height), width_(width) {
    if (height < 1 || width < 1) throw InvalidDimension("ray map needs H, W >= 1");
    directions_.assign(static_cast<std::size_t>(height) * width, Eigen::Vector3d::Zero());
    moments_.assign(directions_.size(), Eigen::Vector3d::Zero());
}

PatchFeatureMap PluckerRayMap::to_feature_map() const {
    std::vector<float> data;
    data.reserve(directions_.size() * 6);
    for (std::size_t i = 0; i < directions_.size(); ++i) {
        for (int c = 0; c < 3; ++c) data.push_back(static_cast<float>(directions_[i][c]));
        for (int c = 0; c < 3; ++c) data.push_back(static_cast<float>(moments_[i][c]));
    }
    return PatchFeatureMap(height_, width_, 6, std::move(data));
}

PluckerRayMap plucker_ray_map(const Intrinsics& k, const Pose& pose, int height, int width) {
    k.validate();
    PluckerRayMap out(height, width);
    const Eigen::Vector3d& origin = pose.translation;
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            const Eigen::Vector3d cam((u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0);
            const Eigen::Vector3d d = (pose.rotation * cam).normalized();
            out.set(v, u, d, origin.cross(d));
        }
    }
    return out;
}

std::vector<TrajectorySegment> segment_trajectory(const std::vector<Eigen::Vector3d>& centers,
                                                  double tau_translation) {
    if (centers.empty()) throw InvalidArgument("segment_trajectory needs at least one center");
    if (!(tau_translation > 0.0) || !std::isfinite(tau_translation)) {
        throw InvalidArgument("translation threshold must be positive and finite");
    }
    const double reach = tau_translation * (1.0 - 1e-9);
    std::vector<TrajectorySegment> segments;
    const int n = static_cast<int>(centers.size());
    int start = 0;
    double accumulated = 0.0;
    for (int i = 1; i < n; ++i) {
        if (i == start) continue;
        accumulated += (centers[static_cast<std::size_t>(i)] -
                        centers[static_cast<std::size_t>(i - 1)])
                           .norm();
        if (accumulated >= reach) {
            segments.push_back({start, i, accumulated});
            start = i + 1;
            accumulated = 0.0;
        }
    }
    if (start < n) segments.push_back({start, n - 1, accumulated});
    return segments;
}

namespace {

template <std::size_t N>
std::array<double, N> read_array(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != N) {
        throw InvalidArgument(std::string("camera JSON: \"") + key + "\" must be an array of " +
                              std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = j.at(key)[i].template get<double>();
    return out;
}

}  // namespace

CameraRig parse_camera_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("camera JSON: ") + e.what());
    }
    try {
        CameraRig rig;
        const auto& in = doc.at("intrinsics");
        rig.intrinsics = {in.at("fx").get<double>(), in.at("fy").get<double>(),
                          in.at("cx").get<double>(), in.at("cy").get<double>()};
        rig.intrinsics.validate();
        for (const auto& frame : doc.at("frames")) {
            Pose pose;
            if (frame.contains("rot6d")) {
                pose.rotation = rot6d_to_matrix(Rot6D::from_array(read_array<6>(frame, "rot6d")));
            } else {
                const auto r = read_array<9>(frame, "R");
                for (int i = 0; i < 3; ++i) {
                    for (int c = 0; c < 3; ++c) pose.rotation(i, c) = r[static_cast<std::size_t>(i * 3 + c)];
                }
            }
            const auto t = read_array<3>(frame, "t");
            pose.translation = Eigen::Vector3d(t[0], t[1], t[2]);
            pose.validate();
            rig.frames.push_back(pose);
        }
        return rig;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("camera JSON: ") + e.what());
    }
}

CameraRig read_camera_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open camera file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_camera_json(ss.str());
}

}  // namespace wildsieve::camera
