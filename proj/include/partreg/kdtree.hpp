#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace partreg {

/// Exact static k-d tree over 3D points. Nearest queries break distance
/// ties by lowest point index, matching the linear-scan convention used
/// throughout the library. Built once, then safe to query from any thread.
class KdTree3 {
public:
    explicit KdTree3(const std::vector<Eigen::Vector3d>& points);

    std::size_t size() const { return points_.size(); }

    /// (index, distance) of the closest point; ties to lowest index.
    std::pair<int, double> nearest(const Eigen::Vector3d& query) const;

    /// Indices of the k closest points, ordered by (distance, index).
    std::vector<int> knn(const Eigen::Vector3d& query, int k) const;

    /// Indices of all points with distance <= radius, ascending by index.
    std::vector<int> radius_search(const Eigen::Vector3d& query, double radius) const;

    /// True when at least one point lies within radius of the query.
    bool any_within(const Eigen::Vector3d& query, double radius) const;

private:
    struct Node {
        int left = -1;
        int right = -1;
        int begin = 0;   // leaf payload range in order_
        int end = 0;
        int axis = 0;
        double split = 0.0;
    };

    int build(int begin, int end, int depth);
    void nearest_impl(int node, const Eigen::Vector3d& q, int& best_idx, double& best_sq) const;

    std::vector<Eigen::Vector3d> points_;
    std::vector<int> order_;    // point indices, partitioned by the tree
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr int kLeafSize = 16;
};

}  // namespace partreg
