#include "partreg/descriptors.hpp"

#include "atomic_io.hpp"
#include "partreg/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace partreg {

namespace {

constexpr double kAlignedSin = 0.08715574274765817;  // sin(5 deg)

// The three standard pairwise angular features in the Darboux frame of the
// pair. Returns false for coincident points or a normal parallel to the
// connecting line.
bool pair_features(const Eigen::Vector3d& p1, const Eigen::Vector3d& n1_in,
                   const Eigen::Vector3d& p2, const Eigen::Vector3d& n2_in, double& f1,
                   double& f2, double& f3) {
    Eigen::Vector3d d = p2 - p1;
    const double dist = d.norm();
    if (dist <= 1e-300) return false;

    Eigen::Vector3d n1 = n1_in;
    Eigen::Vector3d n2 = n2_in;
    const double angle1 = n1.dot(d) / dist;
    const double angle2 = n2.dot(d) / dist;
    if (std::abs(angle1) < std::abs(angle2)) {
        std::swap(n1, n2);
        d = -d;
        f3 = -angle2;
    } else {
        f3 = angle1;
    }

    Eigen::Vector3d v = d.cross(n1);
    const double v_norm = v.norm();
    if (v_norm <= 1e-300) return false;
    v /= v_norm;
    const Eigen::Vector3d w = n1.cross(v);
    f2 = v.dot(n2);
    f1 = std::atan2(w.dot(n2), n1.dot(n2));
    return true;
}

int clamp_bin(double value, int bins) {
    const int b = static_cast<int>(std::floor(value));
    return std::clamp(b, 0, bins - 1);
}

void require_normals(const PointCloud& cloud, const char* op) {
    if (!cloud.has_normals())
        throw DegenerateInput(std::string(op) + ": cloud has no normals");
}

void require_index(const PointCloud& cloud, int idx, const char* op) {
    if (idx < 0 || idx >= static_cast<int>(cloud.size()))
        throw InvalidCount(std::string(op) + ": keypoint index out of range");
}

}  // namespace

Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd out = raw;
    const double uniform = 1.0 / static_cast<double>(raw.cols());
    for (Eigen::Index j = 0; j < raw.rows(); ++j) {
        const double sum = raw.row(j).sum();
        if (sum > 0.0)
            out.row(j) /= sum;
        else
            out.row(j).setConstant(uniform);
    }
    return out;
}

PfhDescriptor compute_pfh(const PointCloud& cloud, int keypoint_index, double radius, int bins) {
    KdTree3 tree(cloud.points);
    return compute_pfh(cloud, tree, keypoint_index, radius, bins);
}

PfhDescriptor compute_pfh(const PointCloud& cloud, const KdTree3& tree, int keypoint_index,
                          double radius, int bins) {
    require_normals(cloud, "compute_pfh");
    require_index(cloud, keypoint_index, "compute_pfh");
    if (bins < 1) throw InvalidCount("compute_pfh: bins must be >= 1");

    const int total_bins = bins * bins * bins;
    PfhDescriptor out;
    out.histogram = Eigen::VectorXd::Zero(total_bins);

    const std::vector<int> nb = tree.radius_search(cloud.points[keypoint_index], radius);
    if (nb.size() < 2) {
        warn("compute_pfh: fewer than 2 points within the feature radius; returning a uniform histogram");
        out.histogram.setConstant(1.0 / total_bins);
        return out;
    }

    const double inv_two_pi = 1.0 / (2.0 * std::numbers::pi);
    double pairs = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
            double f1, f2, f3;
            if (!pair_features(cloud.points[nb[i]], cloud.normals[nb[i]], cloud.points[nb[j]],
                               cloud.normals[nb[j]], f1, f2, f3))
                continue;
            const int t = clamp_bin((f1 + std::numbers::pi) * inv_two_pi * bins, bins);
            const int a = clamp_bin((f2 + 1.0) * 0.5 * bins, bins);
            const int h = clamp_bin((f3 + 1.0) * 0.5 * bins, bins);
            out.histogram[t + bins * a + bins * bins * h] += 1.0;
            pairs += 1.0;
        }
    }
    if (pairs == 0.0) {
        warn("compute_pfh: all neighborhood pairs were degenerate; returning a uniform histogram");
        out.histogram.setConstant(1.0 / total_bins);
        return out;
    }
    out.histogram /= pairs;
    return out;
}

double pfh_affinity(const PfhDescriptor& d1, const PfhDescriptor& d2, double epsilon) {
    if (d1.histogram.size() != d2.histogram.size())
        throw InvalidCount("pfh_affinity: histogram sizes differ");
    if (!(epsilon > 0.0))
        throw DegenerateParameters("pfh_affinity: epsilon must be positive");
    double emd = 0.0;
    double cdf_diff = 0.0;
    for (Eigen::Index i = 0; i < d1.histogram.size(); ++i) {
        cdf_diff += d1.histogram[i] - d2.histogram[i];
        emd += std::abs(cdf_diff);
    }
    return 1.0 / (emd + epsilon);
}

LpsDescriptor compute_lps(const PointCloud& cloud, int keypoint_index, const GroundFrame& ground,
                          double radius) {
    KdTree3 tree(cloud.points);
    return compute_lps(cloud, tree, keypoint_index, ground, radius);
}

LpsDescriptor compute_lps(const PointCloud& cloud, const KdTree3& tree, int keypoint_index,
                          const GroundFrame& ground, double radius) {
    require_normals(cloud, "compute_lps");
    require_index(cloud, keypoint_index, "compute_lps");

    const Eigen::Vector3d p = cloud.points[keypoint_index];
    const Eigen::Vector3d ground_n = ground.normal.normalized();
    Eigen::Vector3d x = cloud.normals[keypoint_index];

    LpsDescriptor out;
    out.radius = radius;

    const std::vector<int> nb = tree.radius_search(p, radius);

    if (ground_n.cross(x).norm() < kAlignedSin) {
        out.pca_fallback = true;
        if (nb.size() >= 3) {
            Eigen::Vector3d mean = Eigen::Vector3d::Zero();
            for (int i : nb) mean += cloud.points[i];
            mean /= static_cast<double>(nb.size());
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (int i : nb) {
                const Eigen::Vector3d d = cloud.points[i] - mean;
                cov += d * d.transpose();
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
            if (eig.eigenvalues()[2] > 0.0) {
                Eigen::Vector3d candidate = eig.eigenvectors().col(0);
                if (candidate.dot(cloud.normals[keypoint_index]) < 0.0) candidate = -candidate;
                x = candidate;
            }
        }
    }
    x.normalize();

    Eigen::Vector3d y = ground_n.cross(x);
    if (y.norm() <= 1e-12) {
        // Residual one-degree-of-freedom ambiguity: the ground normal still
        // aligns with x after the fallback. Pick the coordinate axis least
        // aligned with x as a deterministic seed.
        int axis = 0;
        x.cwiseAbs().minCoeff(&axis);
        y = Eigen::Vector3d::Unit(axis).cross(x);
    }
    y.normalize();
    const Eigen::Vector3d z = x.cross(y);

    out.frame.col(0) = x;
    out.frame.col(1) = y;
    out.frame.col(2) = z;

    out.local_points.reserve(nb.size());
    for (int i : nb) out.local_points.push_back(out.frame.transpose() * (cloud.points[i] - p));
    out.build_query_index();
    return out;
}

void LpsDescriptor::build_query_index() {
    Eigen::Vector3d lo = local_points.empty() ? Eigen::Vector3d::Zero() : local_points.front();
    Eigen::Vector3d hi = lo;
    for (const auto& p : local_points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    (hi - lo).maxCoeff(&sort_axis);
    const int axis = sort_axis;
    const int ua = (axis + 1) % 3;
    const int va = (axis + 2) % 3;

    std::vector<int> order(local_points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return local_points[a][axis] < local_points[b][axis];
    });
    sorted_key.resize(order.size());
    sorted_u.resize(order.size());
    sorted_v.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Eigen::Vector3d& p = local_points[order[i]];
        sorted_key[i] = p[axis];
        sorted_u[i] = p[ua];
        sorted_v[i] = p[va];
    }
}

namespace {

bool exists_within(const LpsDescriptor& d, const Eigen::Vector3d& p, double tau, double tau_sq) {
    const int axis = d.sort_axis;
    const double pk = p[axis];
    const double pu = p[(axis + 1) % 3];
    const double pv = p[(axis + 2) % 3];
    const std::size_t n = d.sorted_key.size();
    std::size_t i = std::lower_bound(d.sorted_key.begin(), d.sorted_key.end(), pk - tau) -
                    d.sorted_key.begin();
    const double hi = pk + tau;
    for (; i < n && d.sorted_key[i] <= hi; ++i) {
        const double dk = d.sorted_key[i] - pk;
        const double du = d.sorted_u[i] - pu;
        const double dv = d.sorted_v[i] - pv;
        if (dk * dk + du * du + dv * dv <= tau_sq) return true;
    }
    return false;
}

}  // namespace

double lps_affinity(const LpsDescriptor& d1, const LpsDescriptor& d2, double fscore_threshold) {
    if (d1.local_points.empty() || d2.local_points.empty())
        throw EmptyInput("lps_affinity: empty descriptor");
    const double tau = fscore_threshold;
    const double tau_sq = tau * tau;

    int hit1 = 0;
    for (const auto& p : d1.local_points)
        if (exists_within(d2, p, tau, tau_sq)) ++hit1;
    int hit2 = 0;
    for (const auto& p : d2.local_points)
        if (exists_within(d1, p, tau, tau_sq)) ++hit2;

    const double precision = static_cast<double>(hit1) / static_cast<double>(d1.local_points.size());
    const double recall = static_cast<double>(hit2) / static_cast<double>(d2.local_points.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

std::vector<PfhDescriptor> compute_pfh_set(const PointCloud& cloud, const KeypointSet& keys,
                                           double radius, int bins) {
    KdTree3 tree(cloud.points);
    std::vector<PfhDescriptor> out;
    out.reserve(keys.count());
    for (int idx : keys.source_indices) out.push_back(compute_pfh(cloud, tree, idx, radius, bins));
    return out;
}

std::vector<LpsDescriptor> compute_lps_set(const PointCloud& cloud, const KeypointSet& keys,
                                           const GroundFrame& ground, double radius) {
    KdTree3 tree(cloud.points);
    std::vector<LpsDescriptor> out;
    out.reserve(keys.count());
    for (int idx : keys.source_indices) out.push_back(compute_lps(cloud, tree, idx, ground, radius));
    return out;
}

AffinityMatrix affinity_from_descriptors(const std::vector<PfhDescriptor>& source,
                                         const std::vector<PfhDescriptor>& target, double epsilon) {
    if (source.empty() || target.empty()) throw EmptyInput("affinity_from_descriptors: empty descriptor set");
    Eigen::MatrixXd raw(source.size(), target.size());
    for (std::size_t j = 0; j < source.size(); ++j)
        for (std::size_t k = 0; k < target.size(); ++k)
            raw(j, k) = pfh_affinity(source[j], target[k], epsilon);
    return {row_normalize(raw)};
}

AffinityMatrix affinity_from_descriptors(const std::vector<LpsDescriptor>& source,
                                         const std::vector<LpsDescriptor>& target,
                                         double fscore_threshold) {
    if (source.empty() || target.empty()) throw EmptyInput("affinity_from_descriptors: empty descriptor set");
    Eigen::MatrixXd raw(source.size(), target.size());
    for (std::size_t j = 0; j < source.size(); ++j)
        for (std::size_t k = 0; k < target.size(); ++k)
            raw(j, k) = lps_affinity(source[j], target[k], fscore_threshold);
    return {row_normalize(raw)};
}

AffinityMatrix build_affinity(const PointCloud& source_cloud, const KeypointSet& source_keys,
                              const GroundFrame& source_ground, const PointCloud& target_cloud,
                              const KeypointSet& target_keys, const GroundFrame& target_ground,
                              const DescriptorConfig& config) {
    if (config.kind == DescriptorKind::Pfh) {
        const auto src = compute_pfh_set(source_cloud, source_keys, config.radius, config.bins);
        const auto tgt = compute_pfh_set(target_cloud, target_keys, config.radius, config.bins);
        return affinity_from_descriptors(src, tgt, config.epsilon);
    }
    const auto src = compute_lps_set(source_cloud, source_keys, source_ground, config.radius);
    const auto tgt = compute_lps_set(target_cloud, target_keys, target_ground, config.radius);
    return affinity_from_descriptors(src, tgt, config.fscore_threshold);
}

std::vector<std::pair<int, int>> extract_hard_correspondences(const AffinityMatrix& affinity) {
    if (affinity.rows() == 0 || affinity.cols() == 0)
        throw EmptyInput("extract_hard_correspondences: empty affinity matrix");
    std::vector<std::pair<int, int>> out;
    out.reserve(affinity.rows());
    for (Eigen::Index j = 0; j < affinity.rows(); ++j) {
        int best = 0;
        for (Eigen::Index k = 1; k < affinity.cols(); ++k)
            if (affinity.scores(j, k) > affinity.scores(j, best)) best = static_cast<int>(k);
        out.emplace_back(static_cast<int>(j), best);
    }
    return out;
}

void save_correspondences(const std::vector<std::pair<int, int>>& pairs,
                          const std::filesystem::path& path) {
    std::ostringstream body;
    for (const auto& [src, tgt] : pairs) body << src << " " << tgt << "\n";
    detail::atomic_write(path, body.str());
}

}  // namespace partreg
