#include "wildsieve/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "wildsieve/error.hpp"
#include "wildsieve/rng.hpp"

namespace wildsieve::grabcut {

namespace {

void finalize(GaussianComponent& c) {
    c.covariance = floor_covariance(c.covariance);
    c.inverse = c.covariance.inverse();
    c.log_det = std::log(c.covariance.determinant());
}

double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// k-means++ seeding; stops early when every remaining point coincides with
// a chosen center.
std::vector<Eigen::Vector3d> kmeanspp_centers(std::span<const Eigen::Vector3d> pixels, int k, Rng& rng) {
    std::vector<Eigen::Vector3d> centers;
    centers.push_back(pixels[rng.below(pixels.size())]);
    std::vector<double> d2(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) d2[i] = (pixels[i] - centers[0]).squaredNorm();
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        if (!(total > 0.0)) break;
        const double target = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t pick = pixels.size() - 1;
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            acc += d2[i];
            if (acc > target && d2[i] > 0.0) {
                pick = i;
                break;
            }
        }
        while (d2[pick] == 0.0) --pick;
        centers.push_back(pixels[pick]);
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            d2[i] = std::min(d2[i], (pixels[i] - centers.back()).squaredNorm());
        }
    }
    return centers;
}

}  // namespace

Eigen::Matrix3d floor_covariance(const Eigen::Matrix3d& cov, double min_eigenvalue) {
    const Eigen::Matrix3d sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(sym);
    Eigen::Vector3d eig = solver.eigenvalues();
    if (eig.minCoeff() >= min_eigenvalue) return sym;
    for (int i = 0; i < 3; ++i) eig[i] = std::max(eig[i], min_eigenvalue);
    const Eigen::Matrix3d& v = solver.eigenvectors();
    Eigen::Matrix3d out = v * eig.asDiagonal() * v.transpose();
    return 0.5 * (out + out.transpose());
}

Gmm::Gmm(std::vector<GaussianComponent> components) : components_(std::move(components)) {
    double total = 0.0;
    for (auto& c : components_) {
        finalize(c);
        total += c.weight;
    }
    if (components_.empty() || !(total > 0.0)) throw InvalidArgument("GMM needs a positive-weight component");
    for (auto& c : components_) c.weight /= total;
}

double Gmm::component_cost(std::size_t k, const Eigen::Vector3d& z) const {
    const auto& c = components_[k];
    if (c.weight <= 0.0) return std::numeric_limits<double>::infinity();
    const Eigen::Vector3d d = z - c.mean;
    return -std::log(c.weight) + 0.5 * c.log_det + 0.5 * d.dot(c.inverse * d);
}

std::pair<std::size_t, double> Gmm::best_component(const Eigen::Vector3d& z) const {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const double cost = component_cost(k, z);
        if (cost < best_cost) {
            best_cost = cost;
            best = k;
        }
    }
    return {best, best_cost};
}

double Gmm::log_density(const Eigen::Vector3d& z) const {
    const double norm = 1.5 * std::log(2.0 * std::numbers::pi);
    std::vector<double> buf(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k) buf[k] = -component_cost(k, z) - norm;
    return log_sum_exp(buf);
}

Gmm fit_gmm_from_assignments(std::span<const Eigen::Vector3d> pixels,
                             std::span<const std::size_t> assignment, std::size_t k) {
    if (pixels.size() != assignment.size()) throw InvalidArgument("assignment length mismatch");
    std::vector<double> count(k, 0.0);
    std::vector<Eigen::Vector3d> sum(k, Eigen::Vector3d::Zero());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        count[assignment[i]] += 1.0;
        sum[assignment[i]] += pixels[i];
    }
    std::vector<Eigen::Vector3d> mean(k);
    for (std::size_t c = 0; c < k; ++c) mean[c] = count[c] > 0.0 ? Eigen::Vector3d(sum[c] / count[c]) : Eigen::Vector3d::Zero();
    std::vector<Eigen::Matrix3d> scatter(k, Eigen::Matrix3d::Zero());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const Eigen::Vector3d d = pixels[i] - mean[assignment[i]];
        scatter[assignment[i]] += d * d.transpose();
    }
    std::vector<GaussianComponent> comps;
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] <= 0.0) continue;
        GaussianComponent g;
        g.weight = count[c] / static_cast<double>(pixels.size());
        g.mean = mean[c];
        g.covariance = scatter[c] / count[c];
        comps.push_back(g);
    }
    return Gmm(std::move(comps));
}

GmmFit fit_gmm(std::span<const Eigen::Vector3d> pixels, int k, std::uint64_t seed,
               const GmmFitOptions& options) {
    if (pixels.empty()) throw InvalidArgument("fit_gmm needs at least one pixel");
    if (k < 1) throw InvalidArgument("fit_gmm needs k >= 1");
    Rng rng(seed);
    const auto centers = kmeanspp_centers(pixels, std::min<int>(k, static_cast<int>(pixels.size())), rng);
    const std::size_t kk = centers.size();

    GmmFit fit;
    fit.reduced_components = static_cast<int>(kk) < k ? static_cast<int>(kk) : 0;

    std::vector<std::size_t> assignment(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < kk; ++c) {
            const double d = (pixels[i] - centers[c]).squaredNorm();
            if (d < best) {
                best = d;
                assignment[i] = c;
            }
        }
    }
    Gmm gmm = fit_gmm_from_assignments(pixels, assignment, kk);

    const double norm = 1.5 * std::log(2.0 * std::numbers::pi);
    std::vector<double> logp(pixels.size() * gmm.size());
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const std::size_t m = gmm.size();
        logp.resize(pixels.size() * m);
        // E-step.
        double ll = 0.0;
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            std::span<double> row(logp.data() + i * m, m);
            for (std::size_t c = 0; c < m; ++c) row[c] = -gmm.component_cost(c, pixels[i]) - norm;
            const double lse = log_sum_exp(row);
            ll += lse;
            for (std::size_t c = 0; c < m; ++c) row[c] = std::exp(row[c] - lse);
        }
        const bool converged =
            !fit.log_likelihood.empty() &&
            std::abs(ll - fit.log_likelihood.back()) <= options.relative_tolerance * std::abs(fit.log_likelihood.back());
        fit.log_likelihood.push_back(ll);
        if (converged) break;

        // M-step.
        std::vector<GaussianComponent> comps;
        for (std::size_t c = 0; c < m; ++c) {
            double nk = 0.0;
            Eigen::Vector3d mu = Eigen::Vector3d::Zero();
            for (std::size_t i = 0; i < pixels.size(); ++i) {
                nk += logp[i * m + c];
                mu += logp[i * m + c] * pixels[i];
            }
            if (!(nk > 1e-12)) continue;
            mu /= nk;
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (std::size_t i = 0; i < pixels.size(); ++i) {
                const Eigen::Vector3d d = pixels[i] - mu;
                cov += logp[i * m + c] * (d * d.transpose());
            }
            GaussianComponent g;
            g.weight = nk;
            g.mean = mu;
            g.covariance = cov / nk;
            comps.push_back(g);
        }
        gmm = Gmm(std::move(comps));
    }
    fit.gmm = std::move(gmm);
    return fit;
}

}  // namespace wildsieve::grabcut
