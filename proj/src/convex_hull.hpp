#pragma once

#include <Eigen/Core>

#include <vector>

namespace partreg::detail {

/// Indices of the points that are vertices of the 3D convex hull.
/// Degenerate inputs (coplanar, collinear, coincident) fall back to
/// returning the first occurrence of every distinct coordinate, since no
/// occlusion is decidable for them.
std::vector<int> convex_hull_vertices(const std::vector<Eigen::Vector3d>& points);

}  // namespace partreg::detail
