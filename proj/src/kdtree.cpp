#include "partreg/kdtree.hpp"

#include "partreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace partreg {

KdTree3::KdTree3(const std::vector<Eigen::Vector3d>& points) : points_(points) {
    if (points_.empty()) throw EmptyInput("KdTree3: empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree3::build(int begin, int end, int depth) {
    Node node;
    node.begin = begin;
    node.end = end;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return id;

    Eigen::Vector3d lo = points_[order_[begin]];
    Eigen::Vector3d hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] == lo[axis]) return id;  // all coincident along every axis: stays a leaf

    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });

    nodes_[id].axis = axis;
    nodes_[id].split = points_[order_[mid]][axis];
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree3::nearest_impl(int node_id, const Eigen::Vector3d& q, int& best_idx,
                           double& best_sq) const {
    const Node& node = nodes_[node_id];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int idx = order_[i];
            const double d = (points_[idx] - q).squaredNorm();
            if (d < best_sq || (d == best_sq && idx < best_idx)) {
                best_sq = d;
                best_idx = idx;
            }
        }
        return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    nearest_impl(near, q, best_idx, best_sq);
    // Equal plane distance must still be visited so an equally distant,
    // lower-index point on the far side can win the tie.
    if (delta * delta <= best_sq) nearest_impl(far, q, best_idx, best_sq);
}

std::pair<int, double> KdTree3::nearest(const Eigen::Vector3d& query) const {
    int best_idx = std::numeric_limits<int>::max();
    double best_sq = std::numeric_limits<double>::infinity();
    nearest_impl(root_, query, best_idx, best_sq);
    return {best_idx, std::sqrt(best_sq)};
}

std::vector<int> KdTree3::knn(const Eigen::Vector3d& query, int k) const {
    if (k < 1 || static_cast<std::size_t>(k) > points_.size())
        throw InvalidCount("KdTree3::knn: k out of range");

    using Entry = std::pair<double, int>;  // (squared distance, index)
    auto worse = [](const Entry& a, const Entry& b) {
        return a.first < b.first || (a.first == b.first && a.second < b.second);
    };
    std::vector<Entry> heap;  // max-heap by (distance, index)
    heap.reserve(k + 1);

    auto visit = [&](auto&& self, int node_id) -> void {
        const Node& node = nodes_[node_id];
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[i];
                const Entry e{(points_[idx] - query).squaredNorm(), idx};
                if (static_cast<int>(heap.size()) < k) {
                    heap.push_back(e);
                    std::push_heap(heap.begin(), heap.end(), worse);
                } else if (worse(e, heap.front())) {
                    std::pop_heap(heap.begin(), heap.end(), worse);
                    heap.back() = e;
                    std::push_heap(heap.begin(), heap.end(), worse);
                }
            }
            return;
        }
        const double delta = query[node.axis] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        self(self, near);
        if (static_cast<int>(heap.size()) < k || delta * delta <= heap.front().first)
            self(self, far);
    };
    visit(visit, root_);

    std::sort(heap.begin(), heap.end());
    std::vector<int> out;
    out.reserve(heap.size());
    for (const auto& e : heap) out.push_back(e.second);
    return out;
}

std::vector<int> KdTree3::radius_search(const Eigen::Vector3d& query, double radius) const {
    std::vector<int> out;
    const double r_sq = radius * radius;
    auto visit = [&](auto&& self, int node_id) -> void {
        const Node& node = nodes_[node_id];
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[i];
                if ((points_[idx] - query).squaredNorm() <= r_sq) out.push_back(idx);
            }
            return;
        }
        const double delta = query[node.axis] - node.split;
        if (delta <= radius) self(self, node.left);
        if (-delta <= radius) self(self, node.right);
    };
    visit(visit, root_);
    std::sort(out.begin(), out.end());
    return out;
}

bool KdTree3::any_within(const Eigen::Vector3d& query, double radius) const {
    const double r_sq = radius * radius;
    auto visit = [&](auto&& self, int node_id) -> bool {
        const Node& node = nodes_[node_id];
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                if ((points_[order_[i]] - query).squaredNorm() <= r_sq) return true;
            }
            return false;
        }
        const double delta = query[node.axis] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        if (self(self, near)) return true;
        if (delta * delta <= r_sq) return self(self, far);
        return false;
    };
    return visit(visit, root_);
}

}  // namespace partreg
