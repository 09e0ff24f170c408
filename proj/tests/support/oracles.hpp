#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

// Independent brute-force references. These deliberately avoid the library
// implementations so they can act as oracles.
namespace partreg::oracles {

inline std::pair<int, double> nn_linear(const Eigen::Vector3d& query,
                                        const std::vector<Eigen::Vector3d>& points) {
    int best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = (points[i] - query).squaredNorm();
        if (d < best_sq) {
            best_sq = d;
            best = static_cast<int>(i);
        }
    }
    return {best, std::sqrt(best_sq)};
}

inline Eigen::MatrixXd pairwise_bruteforce(const Eigen::Matrix3Xd& p, const Eigen::Matrix3Xd& q) {
    Eigen::MatrixXd out(p.cols(), q.cols());
    for (Eigen::Index j = 0; j < p.cols(); ++j)
        for (Eigen::Index k = 0; k < q.cols(); ++k)
            out(j, k) = std::sqrt(std::pow(p(0, j) - q(0, k), 2) + std::pow(p(1, j) - q(1, k), 2) +
                                  std::pow(p(2, j) - q(2, k), 2));
    return out;
}

inline double chamfer_bruteforce(const std::vector<Eigen::Vector3d>& x,
                                 const std::vector<Eigen::Vector3d>& y) {
    double sum = 0.0;
    for (const auto& p : x) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : y) best = std::min(best, (p - q).norm());
        sum += best;
    }
    return sum / static_cast<double>(x.size());
}

// Quadratic-time farthest point sampling with the same start and tie rules
// as the library contract: start at max centroid distance (lowest index on
// ties), then repeatedly take the point maximizing the minimum squared
// distance to the selected set.
inline std::vector<int> fps_quadratic(const std::vector<Eigen::Vector3d>& points, int k) {
    const int n = static_cast<int>(points.size());
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : points) centroid += p;
    centroid /= static_cast<double>(n);

    std::vector<int> selected;
    std::vector<char> taken(n, 0);
    int start = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        const double d = (points[i] - centroid).squaredNorm();
        if (d > best) {
            best = d;
            start = i;
        }
    }
    selected.push_back(start);
    taken[start] = 1;
    while (static_cast<int>(selected.size()) < k) {
        int next = -1;
        double next_best = -1.0;
        for (int i = 0; i < n; ++i) {
            if (taken[i]) continue;
            double min_sq = std::numeric_limits<double>::infinity();
            for (int s : selected) min_sq = std::min(min_sq, (points[i] - points[s]).squaredNorm());
            if (min_sq > next_best) {
                next_best = min_sq;
                next = i;
            }
        }
        selected.push_back(next);
        taken[next] = 1;
    }
    return selected;
}

// Transportation problem between two histograms with ground cost |i - j|,
// solved as min-cost max-flow by successive shortest paths (SPFA). This is
// the LP oracle for the 1-D EMD.
inline double emd_lp(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
    const int b = static_cast<int>(h1.size());
    const int source = 2 * b;
    const int sink = 2 * b + 1;
    const int nodes = 2 * b + 2;

    struct Arc {
        int to;
        double cap;
        double cost;
        int rev;
    };
    std::vector<std::vector<Arc>> graph(nodes);
    auto add_arc = [&](int from, int to, double cap, double cost) {
        graph[from].push_back({to, cap, cost, static_cast<int>(graph[to].size())});
        graph[to].push_back({from, 0.0, -cost, static_cast<int>(graph[from].size()) - 1});
    };

    for (int i = 0; i < b; ++i) add_arc(source, i, h1[i], 0.0);
    for (int j = 0; j < b; ++j) add_arc(b + j, sink, h2[j], 0.0);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j)
            add_arc(i, b + j, std::numeric_limits<double>::infinity(), std::abs(i - j));

    double total_cost = 0.0;
    const double flow_eps = 1e-15;
    while (true) {
        std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
        std::vector<int> prev_node(nodes, -1);
        std::vector<int> prev_arc(nodes, -1);
        std::vector<char> in_queue(nodes, 0);
        std::deque<int> queue;
        dist[source] = 0.0;
        queue.push_back(source);
        in_queue[source] = 1;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            in_queue[u] = 0;
            for (std::size_t a = 0; a < graph[u].size(); ++a) {
                const Arc& arc = graph[u][a];
                if (arc.cap <= flow_eps) continue;
                if (dist[u] + arc.cost < dist[arc.to] - 1e-15) {
                    dist[arc.to] = dist[u] + arc.cost;
                    prev_node[arc.to] = u;
                    prev_arc[arc.to] = static_cast<int>(a);
                    if (!in_queue[arc.to]) {
                        queue.push_back(arc.to);
                        in_queue[arc.to] = 1;
                    }
                }
            }
        }
        if (prev_node[sink] < 0) break;

        double push = std::numeric_limits<double>::infinity();
        for (int v = sink; v != source; v = prev_node[v])
            push = std::min(push, graph[prev_node[v]][prev_arc[v]].cap);
        if (push <= flow_eps) break;
        for (int v = sink; v != source; v = prev_node[v]) {
            Arc& arc = graph[prev_node[v]][prev_arc[v]];
            arc.cap -= push;
            graph[arc.to][arc.rev].cap += push;
            total_cost += push * arc.cost;
        }
    }
    return total_cost;
}

// Quaternion-route rotation angle, independent of the trace formula.
inline double quat_angle(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
    const Eigen::Quaterniond q1(r1);
    const Eigen::Quaterniond q2(r2);
    const Eigen::Quaterniond rel = q1.conjugate() * q2;
    return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

}  // namespace partreg::oracles
