#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace wildsieve::grabcut {

inline constexpr double kCovarianceFloor = 1e-6;

/// Clamps the eigenvalues of a symmetric matrix from below.
Eigen::Matrix3d floor_covariance(const Eigen::Matrix3d& cov, double min_eigenvalue = kCovarianceFloor);

struct GaussianComponent {
    double weight = 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();

    // Cached from covariance by Gmm::finalize().
    Eigen::Matrix3d inverse = Eigen::Matrix3d::Identity();
    double log_det = 0.0;
};

/// Full-covariance RGB mixture.
class Gmm {
public:
    Gmm() = default;
    explicit Gmm(std::vector<GaussianComponent> components);

    std::size_t size() const { return components_.size(); }
    const std::vector<GaussianComponent>& components() const { return components_; }

    /// -log(weight_k) - log N(z | mean_k, cov_k) without the constant
    /// (3/2) log(2 pi).
    double component_cost(std::size_t k, const Eigen::Vector3d& z) const;

    /// argmin_k component_cost, and the cost itself.
    std::pair<std::size_t, double> best_component(const Eigen::Vector3d& z) const;

    /// log sum_k weight_k N(z | mean_k, cov_k), including all constants.
    double log_density(const Eigen::Vector3d& z) const;

private:
    std::vector<GaussianComponent> components_;
};

struct GmmFit {
    Gmm gmm;
    /// Total log-likelihood after each E-step.
    std::vector<double> log_likelihood;
    /// Set when fewer distinct points than requested components exist.
    int reduced_components = 0;
};

struct GmmFitOptions {
    int max_iterations = 50;
    double relative_tolerance = 1e-5;
};

/// EM with k-means++ initialization. Deterministic for a given seed.
GmmFit fit_gmm(std::span<const Eigen::Vector3d> pixels, int k, std::uint64_t seed,
               const GmmFitOptions& options = {});

/// Maximum-likelihood refit from hard component assignments. Components
/// that receive no pixels are dropped.
Gmm fit_gmm_from_assignments(std::span<const Eigen::Vector3d> pixels,
                             std::span<const std::size_t> assignment, std::size_t k);

}  // namespace wildsieve::grabcut
