#include "partreg/scan.hpp"

#include "partreg/errors.hpp"
#include "partreg/sampling.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace partreg {

std::pair<PointCloud, RigidTransform> generate_scan(const PointCloud& tmpl, const ScanSpec& spec,
                                                    std::uint64_t seed,
                                                    double hpr_radius_exponent) {
    tmpl.validate("generate_scan");
    if (tmpl.size() < 10) throw InvalidCount("generate_scan: template needs at least 10 points");
    if (spec.noise_sigma < 0.0) throw DegenerateParameters("generate_scan: negative noise sigma");
    if (spec.dropout_fraction < 0.0 || spec.dropout_fraction >= 1.0)
        throw DegenerateParameters("generate_scan: dropout fraction must be in [0, 1)");

    const double gamma = std::pow(10.0, hpr_radius_exponent) * tmpl.bounding_radius();
    const std::vector<int> visible = hidden_point_removal(tmpl, spec.viewpoint, gamma);
    if (visible.empty()) throw EmptyScan("generate_scan: no visible points from the viewpoint");

    PointCloud subset;
    subset.frame_label = tmpl.frame_label;
    subset.points.reserve(visible.size());
    for (int idx : visible) subset.points.push_back(tmpl.points[idx]);
    if (tmpl.has_normals()) {
        subset.normals.reserve(visible.size());
        for (int idx : visible) subset.normals.push_back(tmpl.normals[idx]);
    }

    PointCloud scan = apply_transform(spec.camera_pose, subset);
    scan.frame_label = "camera";

    std::mt19937_64 rng(seed);
    if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (auto& p : scan.points)
            p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    }

    const int drop = static_cast<int>(std::floor(spec.dropout_fraction *
                                                 static_cast<double>(scan.size())));
    if (drop > 0) {
        std::vector<int> order(scan.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(scan.size() - drop);
        std::sort(order.begin(), order.end());
        PointCloud kept;
        kept.frame_label = scan.frame_label;
        kept.points.reserve(order.size());
        for (int idx : order) kept.points.push_back(scan.points[idx]);
        if (scan.has_normals()) {
            kept.normals.reserve(order.size());
            for (int idx : order) kept.normals.push_back(scan.normals[idx]);
        }
        scan = std::move(kept);
    }

    return {std::move(scan), inverse(spec.camera_pose)};
}

Eigen::Matrix3d sample_rotation_uniform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u1 = uniform(rng);
    const double u2 = uniform(rng);
    const double u3 = uniform(rng);
    const double s1 = std::sqrt(1.0 - u1);
    const double s2 = std::sqrt(u1);
    const double t1 = 2.0 * std::numbers::pi * u2;
    const double t2 = 2.0 * std::numbers::pi * u3;
    const Eigen::Quaterniond q(s2 * std::cos(t2), s1 * std::sin(t1), s1 * std::cos(t1),
                               s2 * std::sin(t2));
    return q.normalized().toRotationMatrix();
}

Eigen::Vector3d sample_direction_uniform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double z = 2.0 * uniform(rng) - 1.0;
    const double theta = 2.0 * std::numbers::pi * uniform(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(theta), r * std::sin(theta), z};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    auto splitmix = [](std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    };
    return splitmix(seed ^ splitmix(stream + 1));
}

}  // namespace partreg
