#include "partreg/sampling.hpp"

#include "convex_hull.hpp"
#include "partreg/errors.hpp"
#include "partreg/kdtree.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace partreg {

KeypointSet farthest_point_sampling(const PointCloud& cloud, int k,
                                    std::optional<std::uint64_t> random_start_seed) {
    cloud.validate("farthest_point_sampling");
    const int n = static_cast<int>(cloud.size());
    if (k < 1 || k > n) throw InvalidCount("farthest_point_sampling: k out of range");

    int start = 0;
    if (random_start_seed) {
        std::mt19937_64 rng(*random_start_seed);
        start = static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
    } else {
        const Eigen::Vector3d c = cloud.centroid();
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            const double d = (cloud.points[i] - c).squaredNorm();
            if (d > best) {
                best = d;
                start = i;
            }
        }
    }

    std::vector<int> selected;
    selected.reserve(k);
    std::vector<char> taken(n, 0);
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
    selected.push_back(start);
    taken[start] = 1;
    while (static_cast<int>(selected.size()) < k) {
        const Eigen::Vector3d& last = cloud.points[selected.back()];
        int next = -1;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            const double d = (cloud.points[i] - last).squaredNorm();
            if (d < min_sq[i]) min_sq[i] = d;
            if (!taken[i] && min_sq[i] > best) {
                best = min_sq[i];
                next = i;
            }
        }
        selected.push_back(next);
        taken[next] = 1;
    }

    KeypointSet out;
    out.positions.resize(3, k);
    out.source_indices = selected;
    for (int j = 0; j < k; ++j) out.positions.col(j) = cloud.points[selected[j]];
    return out;
}

PointCloud estimate_normals(const PointCloud& cloud, int k_neighbors,
                            const Eigen::Vector3d& viewpoint) {
    cloud.validate("estimate_normals");
    const int n = static_cast<int>(cloud.size());
    if (k_neighbors < 3 || k_neighbors >= n)
        throw InvalidCount("estimate_normals: need |cloud| > k_neighbors >= 3");

    KdTree3 tree(cloud.points);
    PointCloud out = cloud;
    out.normals.assign(n, Eigen::Vector3d::UnitZ());
    int degenerate = 0;

    for (int i = 0; i < n; ++i) {
        const std::vector<int> nb = tree.knn(cloud.points[i], k_neighbors);
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (int j : nb) mean += cloud.points[j];
        mean /= static_cast<double>(nb.size());
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (int j : nb) {
            const Eigen::Vector3d d = cloud.points[j] - mean;
            cov += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
        const Eigen::Vector3d evals = eig.eigenvalues();  // ascending

        const Eigen::Vector3d to_view = viewpoint - cloud.points[i];
        Eigen::Vector3d normal;
        if (!(evals[1] > evals[2] * 1e-9)) {  // covariance rank < 2
            ++degenerate;
            normal = to_view.norm() > 1e-12 ? to_view.normalized() : Eigen::Vector3d::UnitZ();
        } else {
            normal = eig.eigenvectors().col(0);
            if (normal.dot(to_view) < 0.0) normal = -normal;
        }
        out.normals[i] = normal;
    }
    if (degenerate > 0)
        warn("estimate_normals: " + std::to_string(degenerate) +
             " degenerate neighborhoods fell back to the viewpoint direction");
    return out;
}

GroundFrame estimate_ground(const PointCloud& background, const GroundEstimationParams& params) {
    background.validate("estimate_ground");
    const int n = static_cast<int>(background.size());
    if (n < 3) throw InvalidCount("estimate_ground: need at least 3 points");

    Eigen::Vector3d mean = background.centroid();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : background.points) {
        const Eigen::Vector3d d = p - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    if (!(eig.eigenvalues()[1] > eig.eigenvalues()[2] * 1e-12))
        throw DegenerateInput("estimate_ground: points are collinear");

    const double tau = params.inlier_fraction * background.bbox_diagonal();
    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<int> pick(0, n - 1);

    int best_count = -1;
    Eigen::Vector3d best_normal = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d best_point = Eigen::Vector3d::Zero();
    for (int it = 0; it < params.iterations; ++it) {
        const int a = pick(rng);
        int b = pick(rng);
        int c = pick(rng);
        if (a == b || a == c || b == c) continue;
        const Eigen::Vector3d& pa = background.points[a];
        Eigen::Vector3d nrm = (background.points[b] - pa).cross(background.points[c] - pa);
        const double len = nrm.norm();
        if (len <= 1e-18) continue;
        nrm /= len;
        int count = 0;
        for (const auto& p : background.points)
            if (std::abs(nrm.dot(p - pa)) <= tau) ++count;
        if (count > best_count) {
            best_count = count;
            best_normal = nrm;
            best_point = pa;
        }
    }
    if (best_count < 0) throw DegenerateInput("estimate_ground: no valid plane hypothesis");

    // Refit on the consensus set.
    std::vector<int> inliers;
    for (int i = 0; i < n; ++i)
        if (std::abs(best_normal.dot(background.points[i] - best_point)) <= tau)
            inliers.push_back(i);
    Eigen::Vector3d imean = Eigen::Vector3d::Zero();
    for (int i : inliers) imean += background.points[i];
    imean /= static_cast<double>(inliers.size());
    Eigen::Matrix3d icov = Eigen::Matrix3d::Zero();
    for (int i : inliers) {
        const Eigen::Vector3d d = background.points[i] - imean;
        icov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ieig(icov);
    Eigen::Vector3d normal = ieig.eigenvalues()[1] > ieig.eigenvalues()[2] * 1e-12
                                 ? Eigen::Vector3d(ieig.eigenvectors().col(0))
                                 : best_normal;

    if (normal.dot(params.sensor_origin - imean) < 0.0) normal = -normal;
    GroundFrame out;
    out.normal = normal;
    out.plane_offset = -normal.dot(imean);
    return out;
}

std::vector<int> hidden_point_removal(const PointCloud& cloud, const Eigen::Vector3d& viewpoint,
                                      double hpr_radius) {
    cloud.validate("hidden_point_removal");
    const int n = static_cast<int>(cloud.size());

    double max_dist = 0.0;
    for (const auto& p : cloud.points) max_dist = std::max(max_dist, (p - viewpoint).norm());
    const double gamma = std::max(hpr_radius, max_dist * (1.0 + 1e-9));
    if (gamma <= 0.0) return {};

    // Spherical flip, rescaled so the hull works on O(1) coordinates.
    std::vector<Eigen::Vector3d> flipped(n + 1);
    const double scale = 1.0 / (2.0 * gamma);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d d = cloud.points[i] - viewpoint;
        const double len = d.norm();
        flipped[i] = len > 1e-300 ? Eigen::Vector3d(d * ((2.0 * gamma - len) / len) * scale)
                                  : Eigen::Vector3d::Zero();
    }
    flipped[n] = Eigen::Vector3d::Zero();  // the viewpoint itself

    std::vector<int> hull = detail::convex_hull_vertices(flipped);
    std::vector<int> visible;
    visible.reserve(hull.size());
    for (int idx : hull)
        if (idx < n) visible.push_back(idx);
    return visible;
}

namespace {

Eigen::Vector3d fibonacci_direction(int i, int m) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const double theta = golden_angle * static_cast<double>(i);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(theta), r * std::sin(theta), z};
}

}  // namespace

PartitionDictionary partition_template(const PointCloud& complete_template, int m,
                                       double view_radius_scale, double hpr_radius_exponent) {
    complete_template.validate("partition_template");
    if (complete_template.size() < 10)
        throw InvalidCount("partition_template: template needs at least 10 points");
    if (m < 1) throw InvalidCount("partition_template: m must be >= 1");

    const Eigen::Vector3d center = complete_template.centroid();
    const double radius = complete_template.bounding_radius();
    const double gamma = std::pow(10.0, hpr_radius_exponent) * radius;

    PartitionDictionary dict;
    for (int i = 0; i < m; ++i) {
        const Eigen::Vector3d viewpoint =
            center + view_radius_scale * radius * fibonacci_direction(i, m);
        const std::vector<int> visible =
            hidden_point_removal(complete_template, viewpoint, gamma);
        if (static_cast<int>(visible.size()) < 3) {
            ++dict.dropped_viewpoints;
            warn("partition_template: viewpoint " + std::to_string(i) +
                 " left fewer than 3 visible points and was dropped");
            continue;
        }
        PointCloud partial;
        partial.frame_label = complete_template.frame_label;
        partial.points.reserve(visible.size());
        for (int idx : visible) partial.points.push_back(complete_template.points[idx]);
        if (complete_template.has_normals()) {
            partial.normals.reserve(visible.size());
            for (int idx : visible) partial.normals.push_back(complete_template.normals[idx]);
        }
        dict.partials.push_back(std::move(partial));
        dict.viewpoints.push_back(viewpoint);
    }
    if (dict.partials.empty())
        throw EmptyPartition("partition_template: every viewpoint was dropped");
    return dict;
}

}  // namespace partreg
