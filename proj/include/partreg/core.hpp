#pragma once

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace partreg {

/// A point cloud with optional per-point unit normals. Immutable by
/// convention once handed to an operation; all operations return copies.
struct PointCloud {
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Vector3d> normals;  // empty, or one unit vector per point
    std::string frame_label;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_normals() const { return !normals.empty() && normals.size() == points.size(); }

    Eigen::Vector3d centroid() const;
    /// Diagonal of the axis-aligned bounding box.
    double bbox_diagonal() const;
    /// Radius of the sphere centered at the centroid that encloses all points.
    double bounding_radius() const;

    /// Throws EmptyInput / DegenerateInput when the basic invariants
    /// (nonempty, matching normal count, unit normals) are violated.
    void validate(const char* op_name) const;
};

/// Rotation + translation in SE(3). Rotation stored as an explicit
/// orthonormal matrix with det +1.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
    static RigidTransform identity() { return {}; }
};

/// compose(a, b) applies b first, then a: (a ∘ b)(x) = a(b(x)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& t);

/// Transforms points by R·p + t; normals, when present, rotate by R only.
PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud);

/// Continuous 6D rotation parameterization: two unconstrained 3-vectors
/// mapped to a rotation by Gram-Schmidt. Used only inside optimizers.
struct Rotation6D {
    Eigen::Vector3d a1;
    Eigen::Vector3d a2;
};

/// Gram-Schmidt: columns b1 = a1/|a1|, b2 = normalized rejection of a2,
/// b3 = b1 x b2. Throws DegenerateParameters when a1 or the rejection of
/// a2 has norm <= 1e-12.
Eigen::Matrix3d to_rotation(const Rotation6D& r);
/// Canonical inverse: the first two columns of the rotation.
Rotation6D from_rotation(const Eigen::Matrix3d& rotation);

/// Keypoints are a packed 3xk position block plus the indices of the
/// originating cloud points, in selection order.
struct KeypointSet {
    Eigen::Matrix3Xd positions;       // 3 x k
    std::vector<int> source_indices;  // k unique indices into the source cloud

    int count() const { return static_cast<int>(positions.cols()); }
};

/// Entry (j,k) = Euclidean distance between column j of P and column k of Q.
Eigen::MatrixXd pairwise_distances(const Eigen::Matrix3Xd& p, const Eigen::Matrix3Xd& q);

/// Index and distance of the cloud point closest to the query.
/// Ties broken by lowest index. Uses a spatial index above 256 points.
std::pair<int, double> nearest_neighbor(const Eigen::Vector3d& query, const PointCloud& cloud);

}  // namespace partreg
