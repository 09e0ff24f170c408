#pragma once

#include "partreg/core.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace partreg::testing {

struct Box {
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;

    bool contains_closed(const Eigen::Vector3d& p, double eps = 1e-9) const {
        return p.x() >= lo.x() - eps && p.x() <= hi.x() + eps && p.y() >= lo.y() - eps &&
               p.y() <= hi.y() + eps && p.z() >= lo.z() - eps && p.z() <= hi.z() + eps;
    }
};

// Uniform sample on one box face; face in [0,6): -x,+x,-y,+y,-z,+z.
inline void sample_box_face(const Box& box, int face, std::mt19937_64& rng,
                            Eigen::Vector3d& point, Eigen::Vector3d& normal) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::Vector3d extent = box.hi - box.lo;
    const int axis = face / 2;
    const bool positive = face % 2 == 1;
    point = box.lo + Eigen::Vector3d(u(rng) * extent.x(), u(rng) * extent.y(),
                                     u(rng) * extent.z());
    point[axis] = positive ? box.hi[axis] : box.lo[axis];
    normal = Eigen::Vector3d::Zero();
    normal[axis] = positive ? 1.0 : -1.0;
}

inline double face_area(const Box& box, int face) {
    const Eigen::Vector3d e = box.hi - box.lo;
    const int axis = face / 2;
    return axis == 0 ? e.y() * e.z() : (axis == 1 ? e.x() * e.z() : e.x() * e.y());
}

// Surface samples over a union of boxes, rejecting points on or inside the
// other boxes so internal contact faces disappear.
inline PointCloud sample_box_union(const std::vector<Box>& boxes, int n, std::uint64_t seed,
                                   const char* label) {
    std::mt19937_64 rng(seed);
    std::vector<double> weights;
    for (const Box& b : boxes)
        for (int f = 0; f < 6; ++f) weights.push_back(face_area(b, f));
    std::discrete_distribution<int> pick(weights.begin(), weights.end());

    PointCloud cloud;
    cloud.frame_label = label;
    while (static_cast<int>(cloud.size()) < n) {
        const int choice = pick(rng);
        const int box_idx = choice / 6;
        const int face = choice % 6;
        Eigen::Vector3d p, nrm;
        sample_box_face(boxes[box_idx], face, rng, p, nrm);
        bool rejected = false;
        for (std::size_t b = 0; b < boxes.size(); ++b) {
            if (static_cast<int>(b) == box_idx) continue;
            if (boxes[b].contains_closed(p)) {
                rejected = true;
                break;
            }
        }
        if (rejected) continue;
        cloud.points.push_back(p);
        cloud.normals.push_back(nrm);
    }
    return cloud;
}

/// Asymmetric composite of three boxes (a stepped tower with a side tab).
inline PointCloud make_box_composite(int n = 2000, std::uint64_t seed = 11) {
    const std::vector<Box> boxes = {
        {{0.0, 0.0, 0.0}, {1.0, 0.6, 0.3}},
        {{0.0, 0.0, 0.3}, {0.45, 0.6, 0.75}},
        {{0.7, 0.15, 0.3}, {0.95, 0.45, 0.5}},
    };
    return sample_box_union(boxes, n, seed, "template");
}

/// Cylinder along z with hemispherical caps on both ends.
inline PointCloud make_capped_cylinder(int n = 2000, std::uint64_t seed = 12,
                                       double radius = 0.25, double height = 0.7) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double side_area = 2.0 * std::numbers::pi * radius * height;
    const double cap_area = 4.0 * std::numbers::pi * radius * radius;  // two hemispheres

    PointCloud cloud;
    cloud.frame_label = "template";
    while (static_cast<int>(cloud.size()) < n) {
        const double pickv = u(rng) * (side_area + cap_area);
        Eigen::Vector3d p, nrm;
        if (pickv < side_area) {
            const double theta = 2.0 * std::numbers::pi * u(rng);
            const double z = height * u(rng);
            nrm = {std::cos(theta), std::sin(theta), 0.0};
            p = Eigen::Vector3d(radius * nrm.x(), radius * nrm.y(), z);
        } else {
            const bool top = u(rng) < 0.5;
            const double zs = u(rng);  // hemisphere via rejection-free mapping
            const double theta = 2.0 * std::numbers::pi * u(rng);
            const double cz = top ? zs : -zs;
            const double r = std::sqrt(std::max(0.0, 1.0 - cz * cz));
            nrm = {r * std::cos(theta), r * std::sin(theta), cz};
            p = Eigen::Vector3d(0.0, 0.0, top ? height : 0.0) + radius * nrm;
        }
        cloud.points.push_back(p);
        cloud.normals.push_back(nrm);
    }
    return cloud;
}

/// L-shaped bracket from two slabs.
inline PointCloud make_l_bracket(int n = 2000, std::uint64_t seed = 13) {
    const std::vector<Box> boxes = {
        {{0.0, 0.0, 0.0}, {1.0, 0.5, 0.12}},
        {{0.0, 0.0, 0.12}, {0.12, 0.5, 0.8}},
    };
    return sample_box_union(boxes, n, seed, "template");
}

/// Uniform samples on a sphere with outward normals.
inline PointCloud make_sphere(int n = 2000, std::uint64_t seed = 14, double radius = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PointCloud cloud;
    cloud.frame_label = "template";
    cloud.points.reserve(n);
    cloud.normals.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double z = 2.0 * u(rng) - 1.0;
        const double theta = 2.0 * std::numbers::pi * u(rng);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Eigen::Vector3d dir(r * std::cos(theta), r * std::sin(theta), z);
        cloud.points.push_back(radius * dir);
        cloud.normals.push_back(dir);
    }
    return cloud;
}

inline PointCloud make_box_cloud(int n = 2000, std::uint64_t seed = 15) {
    return sample_box_union({{{-0.5, -0.4, -0.3}, {0.5, 0.4, 0.3}}}, n, seed, "template");
}

/// Regular grid in the z=0 plane.
inline PointCloud make_plane_grid(int nx = 20, int ny = 20, double spacing = 0.05) {
    PointCloud cloud;
    cloud.frame_label = "plane";
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            cloud.points.emplace_back(i * spacing, j * spacing, 0.0);
    return cloud;
}

inline PointCloud make_random_cloud(int n, std::uint64_t seed, double extent = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-extent, extent);
    PointCloud cloud;
    cloud.frame_label = "random";
    cloud.points.reserve(n);
    for (int i = 0; i < n; ++i) cloud.points.emplace_back(u(rng), u(rng), u(rng));
    return cloud;
}

}  // namespace partreg::testing
