#pragma once

#include "partreg/core.hpp"
#include "partreg/kdtree.hpp"
#include "partreg/sampling.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace partreg {

enum class DescriptorKind { Pfh, Lps };

struct DescriptorConfig {
    DescriptorKind kind = DescriptorKind::Lps;
    double radius = 0.1;            // absolute feature radius
    int bins = 5;                   // PFH bins per angular feature
    double epsilon = 1e-3;          // PFH affinity regularizer
    double fscore_threshold = 0.005;  // absolute LPS match distance
};

/// Histogram over bins^3 cells of the three pairwise angular features,
/// normalized to sum 1.
struct PfhDescriptor {
    Eigen::VectorXd histogram;
};

/// Raw neighborhood point set expressed in the keypoint's local reference
/// frame (columns x, y, z). The flat arrays hold the same points ordered
/// along the axis of largest spread to speed up threshold queries;
/// local_points keeps cloud order.
struct LpsDescriptor {
    std::vector<Eigen::Vector3d> local_points;
    Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
    double radius = 0.0;
    bool pca_fallback = false;
    int sort_axis = 0;
    std::vector<double> sorted_key;  // coordinates along sort_axis, ascending
    std::vector<double> sorted_u;    // remaining two coordinates, same order
    std::vector<double> sorted_v;

    void build_query_index();
};

/// Row-stochastic similarity matrix between source and target keypoints.
struct AffinityMatrix {
    Eigen::MatrixXd scores;

    Eigen::Index rows() const { return scores.rows(); }
    Eigen::Index cols() const { return scores.cols(); }
};

/// Divides each row by its sum; all-zero rows become uniform.
Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& raw);

PfhDescriptor compute_pfh(const PointCloud& cloud, int keypoint_index, double radius,
                          int bins = 5);
PfhDescriptor compute_pfh(const PointCloud& cloud, const KdTree3& tree, int keypoint_index,
                          double radius, int bins = 5);

/// 1 / (EMD + epsilon); EMD is the L1 distance between the cumulative
/// sums of the flattened histograms (unit distance between adjacent bins).
double pfh_affinity(const PfhDescriptor& d1, const PfhDescriptor& d2, double epsilon);

LpsDescriptor compute_lps(const PointCloud& cloud, int keypoint_index, const GroundFrame& ground,
                          double radius);
LpsDescriptor compute_lps(const PointCloud& cloud, const KdTree3& tree, int keypoint_index,
                          const GroundFrame& ground, double radius);

/// F-score of the two local patches at the distance threshold.
double lps_affinity(const LpsDescriptor& d1, const LpsDescriptor& d2, double fscore_threshold);

std::vector<PfhDescriptor> compute_pfh_set(const PointCloud& cloud, const KeypointSet& keys,
                                           double radius, int bins = 5);
std::vector<LpsDescriptor> compute_lps_set(const PointCloud& cloud, const KeypointSet& keys,
                                           const GroundFrame& ground, double radius);

AffinityMatrix affinity_from_descriptors(const std::vector<PfhDescriptor>& source,
                                         const std::vector<PfhDescriptor>& target, double epsilon);
AffinityMatrix affinity_from_descriptors(const std::vector<LpsDescriptor>& source,
                                         const std::vector<LpsDescriptor>& target,
                                         double fscore_threshold);

/// Descriptor scores between all keypoint pairs, row-normalized to sum 1.
/// Each keypoint set is described against its own cloud; the ground frames
/// are expressed per cloud frame (used by the LPS descriptor only).
AffinityMatrix build_affinity(const PointCloud& source_cloud, const KeypointSet& source_keys,
                              const GroundFrame& source_ground, const PointCloud& target_cloud,
                              const KeypointSet& target_keys, const GroundFrame& target_ground,
                              const DescriptorConfig& config);

/// Per row j: (j, argmax_k A_jk), ties to the lowest k.
std::vector<std::pair<int, int>> extract_hard_correspondences(const AffinityMatrix& affinity);

/// One "src tgt" pair per line, for external correspondence-based solvers.
void save_correspondences(const std::vector<std::pair<int, int>>& pairs,
                          const std::filesystem::path& path);

}  // namespace partreg
