#include "partreg/core.hpp"

#include "partreg/errors.hpp"
#include "partreg/kdtree.hpp"
#include <Eigen/Geometry>

#include <cmath>
#include <limits>

namespace partreg {

Eigen::Vector3d PointCloud::centroid() const {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& p : points) sum += p;
    return sum / static_cast<double>(points.size());
}

double PointCloud::bbox_diagonal() const {
    if (points.empty()) return 0.0;
    Eigen::Vector3d lo = points.front();
    Eigen::Vector3d hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

double PointCloud::bounding_radius() const {
    if (points.empty()) return 0.0;
    const Eigen::Vector3d c = centroid();
    double max_sq = 0.0;
    for (const auto& p : points) max_sq = std::max(max_sq, (p - c).squaredNorm());
    return std::sqrt(max_sq);
}

void PointCloud::validate(const char* op_name) const {
    if (points.empty()) throw EmptyInput(std::string(op_name) + ": empty point cloud");
    if (!normals.empty()) {
        if (normals.size() != points.size())
            throw DegenerateInput(std::string(op_name) + ": normal count does not match point count");
        for (const auto& n : normals) {
            if (std::abs(n.norm() - 1.0) > 1e-6)
                throw DegenerateInput(std::string(op_name) + ": non-unit normal");
        }
    }
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    return out;
}

RigidTransform inverse(const RigidTransform& t) {
    RigidTransform out;
    out.rotation = t.rotation.transpose();
    out.translation = -(out.rotation * t.translation);
    return out;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud) {
    cloud.validate("apply_transform");
    PointCloud out;
    out.frame_label = cloud.frame_label;
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points) out.points.push_back(t.rotation * p + t.translation);
    if (cloud.has_normals()) {
        out.normals.reserve(cloud.normals.size());
        for (const auto& n : cloud.normals) out.normals.push_back(t.rotation * n);
    }
    return out;
}

Eigen::Matrix3d to_rotation(const Rotation6D& r) {
    const double n1 = r.a1.norm();
    if (n1 <= 1e-12) throw DegenerateParameters("to_rotation: |a1| below 1e-12");
    const Eigen::Vector3d b1 = r.a1 / n1;
    const Eigen::Vector3d u2 = r.a2 - b1.dot(r.a2) * b1;
    const double n2 = u2.norm();
    if (n2 <= 1e-12) throw DegenerateParameters("to_rotation: a2 collinear with a1");
    const Eigen::Vector3d b2 = u2 / n2;
    Eigen::Matrix3d out;
    out.col(0) = b1;
    out.col(1) = b2;
    out.col(2) = b1.cross(b2);
    return out;
}

Rotation6D from_rotation(const Eigen::Matrix3d& rotation) {
    return {rotation.col(0), rotation.col(1)};
}

Eigen::MatrixXd pairwise_distances(const Eigen::Matrix3Xd& p, const Eigen::Matrix3Xd& q) {
    if (p.cols() == 0 || q.cols() == 0) throw EmptyInput("pairwise_distances: empty point set");
    Eigen::MatrixXd out(p.cols(), q.cols());
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
        out.col(k) = (p.colwise() - q.col(k)).colwise().norm().transpose();
    }
    return out;
}

std::pair<int, double> nearest_neighbor(const Eigen::Vector3d& query, const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyInput("nearest_neighbor: empty point cloud");
    if (cloud.size() <= 256) {
        int best = 0;
        double best_sq = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const double d = (cloud.points[i] - query).squaredNorm();
            if (d < best_sq) {
                best_sq = d;
                best = static_cast<int>(i);
            }
        }
        return {best, std::sqrt(best_sq)};
    }
    KdTree3 tree(cloud.points);
    return tree.nearest(query);
}

}  // namespace partreg
