#pragma once

#include "partreg/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace partreg {

/// Ground plane: unit normal n and offset d with n·x + d = 0 on the plane.
struct GroundFrame {
    Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
    double plane_offset = 0.0;
};

/// The m partial views of a template, all expressed in the template frame.
/// Viewpoints that produced fewer than 3 visible points are dropped and
/// counted in dropped_viewpoints.
struct PartitionDictionary {
    std::vector<PointCloud> partials;
    std::vector<Eigen::Vector3d> viewpoints;
    int dropped_viewpoints = 0;

    std::size_t size() const { return partials.size(); }
};

struct GroundEstimationParams {
    Eigen::Vector3d sensor_origin = Eigen::Vector3d::Zero();
    int iterations = 500;
    /// Inlier threshold as a fraction of the bounding-box diagonal.
    double inlier_fraction = 0.01;
    std::uint64_t seed = 0;
};

/// Greedy farthest point sampling. Deterministic: starts at the point with
/// maximum distance from the centroid (ties to lowest index) unless a seed
/// for a random start is supplied; each subsequent pick maximizes the
/// minimum distance to the already selected set.
KeypointSet farthest_point_sampling(const PointCloud& cloud, int k,
                                    std::optional<std::uint64_t> random_start_seed = std::nullopt);

/// Per-point normals from the smallest-eigenvalue direction of the
/// k-neighborhood covariance, oriented so normal·(viewpoint - p) >= 0.
/// Degenerate neighborhoods (covariance rank < 2) fall back to the
/// viewpoint direction.
PointCloud estimate_normals(const PointCloud& cloud, int k_neighbors,
                            const Eigen::Vector3d& viewpoint);

/// Robust consensus plane fit; the normal is oriented toward the sensor
/// origin. Throws DegenerateInput when the points are collinear.
GroundFrame estimate_ground(const PointCloud& background,
                            const GroundEstimationParams& params = {});

/// Visible subset of a cloud as seen from a viewpoint, via spherical
/// flipping and a convex hull. hpr_radius is the flipping sphere radius;
/// returns ascending point indices.
std::vector<int> hidden_point_removal(const PointCloud& cloud, const Eigen::Vector3d& viewpoint,
                                      double hpr_radius);

/// Partitions a complete template into partial views from m viewpoints on
/// a sphere of radius view_radius_scale x bounding-sphere radius, placed
/// by a spherical Fibonacci spiral. The flipping radius is
/// 10^hpr_radius_exponent x bounding-sphere radius.
PartitionDictionary partition_template(const PointCloud& complete_template, int m,
                                       double view_radius_scale = 3.0,
                                       double hpr_radius_exponent = 2.5);

}  // namespace partreg
