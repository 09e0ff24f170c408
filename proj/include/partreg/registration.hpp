#pragma once

#include "partreg/core.hpp"
#include "partreg/descriptors.hpp"
#include "partreg/kdtree.hpp"
#include "partreg/sampling.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <tuple>
#include <vector>

namespace partreg {

/// Soft correspondences parameterized through logits; the realized matrix
/// is the row-wise exponential normalization, so rows stay on the simplex
/// with strictly positive entries at every optimizer step.
struct CorrespondenceMatrix {
    Eigen::MatrixXd logits;

    static CorrespondenceMatrix from_affinity(const AffinityMatrix& affinity);
    Eigen::MatrixXd realized() const;
};

struct OptimizerConfig {
    double learning_rate = 0.001;
    int steps_per_stage = 300;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double chamfer_weight = 0.0;  // lambda for the optional one-directional Chamfer term
};

enum class SelectionCriterion { MinLoss, MinChamfer };

struct CandidateResult {
    RigidTransform pose;
    double final_loss = 0.0;
    double chamfer = 0.0;
    bool degenerate_init = false;
};

struct RegistrationResult {
    RigidTransform pose;
    double final_loss = 0.0;
    double chamfer_to_template = 0.0;
    int candidate_index = -1;
    std::vector<CandidateResult> all_candidates;
};

struct RegistrationOptions {
    int keypoint_count = 128;  // n observed keypoints; each partial gets 2n
    DescriptorConfig descriptor;
    OptimizerConfig optimizer;
    SelectionCriterion selection = SelectionCriterion::MinLoss;
    GroundFrame observed_ground;
    GroundFrame template_ground;
    Eigen::Vector3d observed_viewpoint = Eigen::Vector3d::Zero();  // for normal estimation
    int normal_neighbors = 30;
    int threads = 1;  // candidate-level parallelism
};

/// Weighted Kabsch initialization: soft virtual targets A·Pt', centered
/// SVD, reflection fix through the sign of the last singular direction.
/// A degenerate cross-covariance (two smallest singular values < 1e-12)
/// yields identity rotation with centroid-aligning translation; the flag,
/// when provided, reports it.
RigidTransform svd_initialize(const KeypointSet& source_keys, const KeypointSet& target_keys,
                              const AffinityMatrix& affinity, bool* degenerate = nullptr);

/// Weighted pairwise distance: sum of W .* d(T·P, Q) plus
/// lambda * mean_j min_q |T·P_j - q| over the template points.
double wpd_loss(const Eigen::MatrixXd& weights, const RigidTransform& transform,
                const KeypointSet& source_keys, const KeypointSet& target_keys,
                const PointCloud& tmpl, double lambda);

/// Loss and analytic gradients of the shared objective kernel at one
/// state. Both optimization stages evaluate exactly this; it is exposed so
/// gradients can be validated against finite differences. When `logits`
/// is set the weights are their row-softmax and g_logits is filled
/// (stage 2); otherwise `weights` is used as-is (stage 1).
struct ObjectiveEval {
    double loss = 0.0;
    Eigen::Vector3d g_a1 = Eigen::Vector3d::Zero();
    Eigen::Vector3d g_a2 = Eigen::Vector3d::Zero();
    Eigen::Vector3d g_t = Eigen::Vector3d::Zero();
    Eigen::MatrixXd g_logits;
};

ObjectiveEval evaluate_wpd(const Rotation6D& rotation, const Eigen::Vector3d& translation,
                           const Eigen::MatrixXd& weights, const KeypointSet& source_keys,
                           const KeypointSet& target_keys, const PointCloud& tmpl, double lambda,
                           const Eigen::MatrixXd* logits = nullptr);

/// Stage 1: adaptive-moment descent on (6D rotation, translation) with the
/// affinity held fixed. Returns the best iterate.
RigidTransform optimize_pose(const RigidTransform& initial, const AffinityMatrix& affinity,
                             const KeypointSet& source_keys, const KeypointSet& target_keys,
                             const PointCloud& tmpl, const OptimizerConfig& config);

using JointObserver =
    std::function<void(int step, double loss, const Eigen::MatrixXd& realized)>;

struct JointResult {
    RigidTransform pose;
    CorrespondenceMatrix correspondences;
    double final_loss = 0.0;
};

/// Stage 2: joint descent on pose and correspondence logits. Returns the
/// best iterate (pose, correspondences, loss). The observer, when set, is
/// invoked with the realized correspondences at every evaluated step.
JointResult optimize_joint(const RigidTransform& initial, const CorrespondenceMatrix& c0,
                           const KeypointSet& source_keys, const KeypointSet& target_keys,
                           const PointCloud& tmpl, const OptimizerConfig& config,
                           const JointObserver& observer = nullptr);

/// Mean distance from each point of X to its nearest neighbor in Y.
double one_directional_chamfer(const PointCloud& x, const PointCloud& y);

/// Point-to-point ICP from a deterministic low-discrepancy set of start
/// rotations (the first start is the identity); returns the transform with
/// the lowest mean closest-point residual.
RigidTransform icp_multistart(const PointCloud& observed, const PointCloud& target,
                              int starts = 20);

/// Target-side data that depends only on the dictionary, template and
/// configuration; computing it once lets a harness amortize it over trials.
struct CandidateAssets {
    KeypointSet target_keys;
    std::vector<PfhDescriptor> pfh;
    std::vector<LpsDescriptor> lps;
};

struct DictionaryAssets {
    std::vector<CandidateAssets> candidates;
    std::shared_ptr<KdTree3> template_tree;
};

DictionaryAssets prepare_dictionary(const PartitionDictionary& dictionary, const PointCloud& tmpl,
                                    const RegistrationOptions& options);

RegistrationResult register_with_assets(const PointCloud& observed,
                                        const DictionaryAssets& assets, const PointCloud& tmpl,
                                        const RegistrationOptions& options);

/// Full pipeline over the partition dictionary: per partial, sample
/// keypoints, build the affinity, initialize by SVD, run both optimization
/// stages, then select the candidate per the criterion (ties to lowest
/// index). Candidates whose initialization was degenerate are recorded but
/// excluded from selection; if all are degenerate, AllCandidatesFailed.
RegistrationResult register_dictionary(const PointCloud& observed,
                                       const PartitionDictionary& dictionary,
                                       const PointCloud& tmpl,
                                       const RegistrationOptions& options);

}  // namespace partreg
