#include "convex_hull.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>

namespace partreg::detail {

namespace {

struct Face {
    int v[3];
    Eigen::Vector3d normal;  // outward, unit
    double offset;           // normal . x = offset on the face plane
    bool alive = true;
};

std::vector<int> distinct_points(const std::vector<Eigen::Vector3d>& pts) {
    std::vector<int> out;
    std::map<std::array<double, 3>, int> seen;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        std::array<double, 3> key{pts[i].x(), pts[i].y(), pts[i].z()};
        if (seen.emplace(key, i).second) out.push_back(i);
    }
    return out;
}

Face make_face(int a, int b, int c, const std::vector<Eigen::Vector3d>& pts,
               const Eigen::Vector3d& inside) {
    Face f;
    f.v[0] = a;
    f.v[1] = b;
    f.v[2] = c;
    Eigen::Vector3d n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double len = n.norm();
    if (len > 0.0) n /= len;
    double off = n.dot(pts[a]);
    if (n.dot(inside) > off) {  // flip so the interior reference stays below the plane
        std::swap(f.v[1], f.v[2]);
        n = -n;
        off = -off;
    }
    f.normal = n;
    f.offset = off;
    return f;
}

}  // namespace

std::vector<int> convex_hull_vertices(const std::vector<Eigen::Vector3d>& points) {
    const int n = static_cast<int>(points.size());
    if (n <= 4) return distinct_points(points);

    // Work on centered, scaled copies so the epsilon is dimensionless.
    Eigen::Vector3d lo = points[0], hi = points[0];
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const double extent = (hi - lo).maxCoeff();
    if (extent <= 0.0) return distinct_points(points);
    std::vector<Eigen::Vector3d> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = (points[i] - center) / extent;
    const double eps = 1e-10;

    // Initial simplex from extreme points.
    int i0 = 0, i1 = 0;
    for (int i = 1; i < n; ++i) {
        if (pts[i].x() < pts[i0].x()) i0 = i;
        if (pts[i].x() > pts[i1].x()) i1 = i;
    }
    if (i0 == i1 || (pts[i1] - pts[i0]).norm() <= eps) {
        // Flat in x; retry with the overall farthest pair from point 0.
        i0 = 0;
        double best = -1.0;
        for (int i = 1; i < n; ++i) {
            const double d = (pts[i] - pts[0]).squaredNorm();
            if (d > best) {
                best = d;
                i1 = i;
            }
        }
        if (best <= eps * eps) return distinct_points(points);
    }

    const Eigen::Vector3d axis = (pts[i1] - pts[i0]).normalized();
    int i2 = -1;
    double best_line = eps;
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d d = pts[i] - pts[i0];
        const double dist = (d - d.dot(axis) * axis).norm();
        if (dist > best_line) {
            best_line = dist;
            i2 = i;
        }
    }
    if (i2 < 0) return distinct_points(points);

    Eigen::Vector3d plane_n = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
    int i3 = -1;
    double best_plane = eps;
    for (int i = 0; i < n; ++i) {
        const double dist = std::abs(plane_n.dot(pts[i] - pts[i0]));
        if (dist > best_plane) {
            best_plane = dist;
            i3 = i;
        }
    }
    if (i3 < 0) return distinct_points(points);

    const Eigen::Vector3d inside = 0.25 * (pts[i0] + pts[i1] + pts[i2] + pts[i3]);
    std::vector<Face> faces;
    faces.push_back(make_face(i0, i1, i2, pts, inside));
    faces.push_back(make_face(i0, i1, i3, pts, inside));
    faces.push_back(make_face(i0, i2, i3, pts, inside));
    faces.push_back(make_face(i1, i2, i3, pts, inside));

    std::vector<int> visible;
    for (int p = 0; p < n; ++p) {
        if (p == i0 || p == i1 || p == i2 || p == i3) continue;
        visible.clear();
        for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
            if (faces[f].alive && faces[f].normal.dot(pts[p]) - faces[f].offset > eps)
                visible.push_back(f);
        }
        if (visible.empty()) continue;

        // Horizon edges appear in exactly one visible face; keep their
        // stored orientation so the replacement cone stays outward.
        std::unordered_map<std::uint64_t, std::pair<int, int>> edge_once;
        for (int f : visible) {
            const Face& face = faces[f];
            for (int e = 0; e < 3; ++e) {
                const int a = face.v[e];
                const int b = face.v[(e + 1) % 3];
                const std::uint64_t key =
                    (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                    static_cast<std::uint64_t>(std::max(a, b));
                auto it = edge_once.find(key);
                if (it == edge_once.end())
                    edge_once.emplace(key, std::make_pair(a, b));
                else
                    it->second.first = -1;  // shared by two visible faces: interior
            }
        }
        for (int f : visible) faces[f].alive = false;
        for (const auto& [key, edge] : edge_once) {
            (void)key;
            if (edge.first < 0) continue;
            faces.push_back(make_face(edge.first, edge.second, p, pts, inside));
        }
    }

    std::set<int> verts;
    for (const Face& f : faces) {
        if (!f.alive) continue;
        verts.insert(f.v[0]);
        verts.insert(f.v[1]);
        verts.insert(f.v[2]);
    }
    return {verts.begin(), verts.end()};
}

}  // namespace partreg::detail
