#pragma once

#include "partreg/core.hpp"

#include <cstdint>
#include <random>
#include <utility>

namespace partreg {

/// Synthetic scan parameters. camera_pose maps template-frame points into
/// the simulated camera frame; the returned ground truth is its inverse.
struct ScanSpec {
    RigidTransform camera_pose;
    double noise_sigma = 0.0;
    double dropout_fraction = 0.0;
    Eigen::Vector3d viewpoint = Eigen::Vector3d::Zero();  // template frame
};

/// Visible subset from spec.viewpoint (same hidden-point-removal operator
/// as partitioning), moved into the camera frame, with isotropic Gaussian
/// noise and seeded dropout. Returns the scan and the exact transform that
/// maps it back onto the template.
std::pair<PointCloud, RigidTransform> generate_scan(const PointCloud& tmpl, const ScanSpec& spec,
                                                    std::uint64_t seed,
                                                    double hpr_radius_exponent = 2.5);

/// Uniform rotation via the subgroup-algorithm construction.
Eigen::Matrix3d sample_rotation_uniform(std::mt19937_64& rng);

/// Uniform direction on the unit sphere.
Eigen::Vector3d sample_direction_uniform(std::mt19937_64& rng);

/// Stateless seed mixing for per-trial streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace partreg
