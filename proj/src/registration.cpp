#include "partreg/registration.hpp"

#include "partreg/errors.hpp"
#include "partreg/parallel.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace partreg {

namespace {

constexpr double kDistanceGuard = 1e-12;

// ---------------------------------------------------------------------------
// Gram-Schmidt pose parameterization and its gradient.

struct PoseParams {
    Eigen::Vector3d a1;
    Eigen::Vector3d a2;
    Eigen::Vector3d t;
};

struct GsCache {
    Eigen::Vector3d b1, b2, b3;
    double n1 = 0.0;
    double n2 = 0.0;
};

Eigen::Matrix3d gs_rotation(const PoseParams& p, GsCache& cache) {
    cache.n1 = p.a1.norm();
    if (cache.n1 <= 1e-12) throw DegenerateParameters("optimizer: |a1| collapsed");
    cache.b1 = p.a1 / cache.n1;
    const Eigen::Vector3d u2 = p.a2 - cache.b1.dot(p.a2) * cache.b1;
    cache.n2 = u2.norm();
    if (cache.n2 <= 1e-12) throw DegenerateParameters("optimizer: a2 collapsed onto a1");
    cache.b2 = u2 / cache.n2;
    cache.b3 = cache.b1.cross(cache.b2);
    Eigen::Matrix3d r;
    r.col(0) = cache.b1;
    r.col(1) = cache.b2;
    r.col(2) = cache.b3;
    return r;
}

// Pulls dL/dR back to the two unconstrained 3-vectors.
void gs_backprop(const PoseParams& p, const GsCache& c, const Eigen::Matrix3d& g_r,
                 Eigen::Vector3d& g_a1, Eigen::Vector3d& g_a2) {
    const Eigen::Vector3d g1 = g_r.col(0);
    const Eigen::Vector3d g2 = g_r.col(1);
    const Eigen::Vector3d g3 = g_r.col(2);

    Eigen::Vector3d h1 = g1 + c.b2.cross(g3);
    const Eigen::Vector3d h2 = g2 + g3.cross(c.b1);

    const Eigen::Vector3d q = (h2 - c.b2.dot(h2) * c.b2) / c.n2;
    g_a2 = q - c.b1.dot(q) * c.b1;
    h1 += -(q.dot(c.b1)) * p.a2 - (c.b1.dot(p.a2)) * q;
    g_a1 = (h1 - c.b1.dot(h1) * c.b1) / c.n1;
}

// ---------------------------------------------------------------------------
// Shared loss kernel for both optimization stages.

struct LossGrad {
    double loss = 0.0;
    Eigen::Vector3d g_a1 = Eigen::Vector3d::Zero();
    Eigen::Vector3d g_a2 = Eigen::Vector3d::Zero();
    Eigen::Vector3d g_t = Eigen::Vector3d::Zero();
    Eigen::MatrixXd g_logits;
};

LossGrad evaluate_objective(const PoseParams& pose, const Eigen::MatrixXd& weights,
                            const Eigen::Matrix3Xd& source, const Eigen::Matrix3Xd& target,
                            double lambda, const KdTree3* tmpl_tree,
                            const std::vector<Eigen::Vector3d>* tmpl_points, bool want_grad,
                            bool want_logit_grad) {
    LossGrad out;
    GsCache gs;
    const Eigen::Matrix3d rotation = gs_rotation(pose, gs);
    const Eigen::Matrix3Xd x = (rotation * source).colwise() + pose.t;
    const Eigen::Index n = source.cols();
    const Eigen::Index k = target.cols();

    Eigen::MatrixXd dist(n, k);
    for (Eigen::Index col = 0; col < k; ++col)
        dist.col(col) = (x.colwise() - target.col(col)).colwise().norm().transpose();

    out.loss = (weights.array() * dist.array()).sum();

    Eigen::Matrix3Xd g_x;
    if (want_grad) {
        const Eigen::MatrixXd ratio =
            (dist.array() > kDistanceGuard).select(weights.array() / dist.array(), 0.0);
        const Eigen::VectorXd row_sum = ratio.rowwise().sum();
        g_x = x * row_sum.asDiagonal() - target * ratio.transpose();
    }

    if (lambda > 0.0 && tmpl_tree != nullptr) {
        const double scale = lambda / static_cast<double>(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto [idx, d] = tmpl_tree->nearest(x.col(j));
            out.loss += scale * d;
            if (want_grad && d > kDistanceGuard)
                g_x.col(j) += scale * (x.col(j) - (*tmpl_points)[idx]) / d;
        }
    }

    if (want_grad) {
        const Eigen::Matrix3d g_r = g_x * source.transpose();
        out.g_t = g_x.rowwise().sum();
        gs_backprop(pose, gs, g_r, out.g_a1, out.g_a2);
    }
    if (want_logit_grad) {
        const Eigen::VectorXd row_dot = (weights.array() * dist.array()).rowwise().sum();
        out.g_logits = weights.array() * (dist.array().colwise() - row_dot.array());
    }
    return out;
}

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    int step = 0;

    explicit AdamState(Eigen::Index size)
        : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}

    void update(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                const OptimizerConfig& cfg) {
        ++step;
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
        v = cfg.adam_beta2 * v.array().matrix() +
            (1.0 - cfg.adam_beta2) * grad.array().square().matrix();
        const double bias1 = 1.0 - std::pow(cfg.adam_beta1, step);
        const double bias2 = 1.0 - std::pow(cfg.adam_beta2, step);
        params.array() -= cfg.learning_rate * (m.array() / bias1) /
                          ((v.array() / bias2).sqrt() + cfg.adam_epsilon);
    }
};

PoseParams pose_params_from(const RigidTransform& t) {
    const Rotation6D r = from_rotation(t.rotation);
    return {r.a1, r.a2, t.translation};
}

RigidTransform pose_from_params(const PoseParams& p) {
    RigidTransform out;
    out.rotation = to_rotation({p.a1, p.a2});
    out.translation = p.t;
    return out;
}

Eigen::Matrix3d kabsch_rotation(const Eigen::Matrix3d& cross_cov, bool* degenerate) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross_cov,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (degenerate != nullptr)
        *degenerate = svd.singularValues()[1] < 1e-12;
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Matrix3d r = v * svd.matrixU().transpose();
    if (r.determinant() < 0.0) {
        v.col(2) = -v.col(2);
        r = v * svd.matrixU().transpose();
    }
    return r;
}

RigidTransform kabsch(const std::vector<Eigen::Vector3d>& src,
                      const std::vector<Eigen::Vector3d>& dst) {
    Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d dst_mean = Eigen::Vector3d::Zero();
    for (const auto& p : src) src_mean += p;
    for (const auto& p : dst) dst_mean += p;
    src_mean /= static_cast<double>(src.size());
    dst_mean /= static_cast<double>(dst.size());

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i)
        h += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();

    bool degenerate = false;
    RigidTransform out;
    out.rotation = kabsch_rotation(h, &degenerate);
    if (degenerate) out.rotation = Eigen::Matrix3d::Identity();
    out.translation = dst_mean - out.rotation * src_mean;
    return out;
}

double halton(int index, int base) {
    double f = 1.0;
    double r = 0.0;
    int i = index;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

Eigen::Matrix3d shoemake_rotation(double u1, double u2, double u3) {
    const double s1 = std::sqrt(1.0 - u1);
    const double s2 = std::sqrt(u1);
    const double t1 = 2.0 * std::numbers::pi * u2;
    const double t2 = 2.0 * std::numbers::pi * u3;
    const Eigen::Quaterniond q(s2 * std::cos(t2), s1 * std::sin(t1), s1 * std::cos(t1),
                               s2 * std::sin(t2));
    return q.normalized().toRotationMatrix();
}

double mean_nn_distance(const std::vector<Eigen::Vector3d>& pts, const RigidTransform& t,
                        const KdTree3& tree) {
    double sum = 0.0;
    for (const auto& p : pts) sum += tree.nearest(t.apply(p)).second;
    return sum / static_cast<double>(pts.size());
}

void check_shapes(const KeypointSet& source, const KeypointSet& target,
                  const Eigen::MatrixXd& weights, const char* op) {
    if (source.count() == 0 || target.count() == 0)
        throw EmptyInput(std::string(op) + ": empty keypoint set");
    if (weights.rows() != source.count() || weights.cols() != target.count())
        throw InvalidCount(std::string(op) + ": weight matrix shape mismatch");
}

PointCloud ensure_normals(const PointCloud& cloud, int k_neighbors,
                          const Eigen::Vector3d& viewpoint) {
    if (cloud.has_normals()) return cloud;
    const int k = std::min<int>(k_neighbors, static_cast<int>(cloud.size()) - 1);
    if (k < 3) {
        PointCloud out = cloud;
        Eigen::Vector3d dir = viewpoint - cloud.centroid();
        if (dir.norm() <= 1e-12) dir = Eigen::Vector3d::UnitZ();
        out.normals.assign(cloud.size(), dir.normalized());
        return out;
    }
    return estimate_normals(cloud, k, viewpoint);
}

}  // namespace

// ---------------------------------------------------------------------------

CorrespondenceMatrix CorrespondenceMatrix::from_affinity(const AffinityMatrix& affinity) {
    CorrespondenceMatrix out;
    out.logits = (affinity.scores.array() + 1e-12).log();
    return out;
}

Eigen::MatrixXd CorrespondenceMatrix::realized() const {
    const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    Eigen::MatrixXd out = (logits.array().colwise() - row_max.array()).exp();
    const Eigen::VectorXd row_sum = out.rowwise().sum();
    out.array().colwise() /= row_sum.array();
    return out;
}

RigidTransform svd_initialize(const KeypointSet& source_keys, const KeypointSet& target_keys,
                              const AffinityMatrix& affinity, bool* degenerate) {
    check_shapes(source_keys, target_keys, affinity.scores, "svd_initialize");

    const Eigen::Matrix3Xd& p = source_keys.positions;
    // Soft virtual target per source keypoint.
    const Eigen::MatrixXd virtual_targets = affinity.scores * target_keys.positions.transpose();
    const Eigen::Vector3d source_mean = p.rowwise().mean();
    const Eigen::Vector3d target_mean = virtual_targets.colwise().mean().transpose();

    const Eigen::Matrix3d cross_cov = (p.colwise() - source_mean) *
                                      (virtual_targets.rowwise() - target_mean.transpose());

    bool degen = false;
    Eigen::Matrix3d rotation = kabsch_rotation(cross_cov, &degen);
    if (degen) {
        warn("svd_initialize: degenerate cross-covariance; falling back to centroid alignment");
        rotation = Eigen::Matrix3d::Identity();
    }
    if (degenerate != nullptr) *degenerate = degen;

    RigidTransform out;
    out.rotation = rotation;
    out.translation = target_mean - rotation * source_mean;
    return out;
}

ObjectiveEval evaluate_wpd(const Rotation6D& rotation, const Eigen::Vector3d& translation,
                           const Eigen::MatrixXd& weights, const KeypointSet& source_keys,
                           const KeypointSet& target_keys, const PointCloud& tmpl, double lambda,
                           const Eigen::MatrixXd* logits) {
    const PoseParams pose{rotation.a1, rotation.a2, translation};
    Eigen::MatrixXd realized;
    const Eigen::MatrixXd* w = &weights;
    if (logits != nullptr) {
        CorrespondenceMatrix c;
        c.logits = *logits;
        realized = c.realized();
        w = &realized;
    }
    check_shapes(source_keys, target_keys, *w, "evaluate_wpd");

    std::unique_ptr<KdTree3> tree;
    const std::vector<Eigen::Vector3d>* tmpl_points = nullptr;
    if (lambda > 0.0) {
        tmpl.validate("evaluate_wpd");
        tree = std::make_unique<KdTree3>(tmpl.points);
        tmpl_points = &tmpl.points;
    }
    const LossGrad lg =
        evaluate_objective(pose, *w, source_keys.positions, target_keys.positions, lambda,
                           tree.get(), tmpl_points, true, logits != nullptr);
    ObjectiveEval out;
    out.loss = lg.loss;
    out.g_a1 = lg.g_a1;
    out.g_a2 = lg.g_a2;
    out.g_t = lg.g_t;
    out.g_logits = lg.g_logits;
    return out;
}

double wpd_loss(const Eigen::MatrixXd& weights, const RigidTransform& transform,
                const KeypointSet& source_keys, const KeypointSet& target_keys,
                const PointCloud& tmpl, double lambda) {
    check_shapes(source_keys, target_keys, weights, "wpd_loss");
    if (lambda < 0.0) throw DegenerateParameters("wpd_loss: lambda must be >= 0");

    const PoseParams pose = pose_params_from(transform);
    if (lambda > 0.0) {
        tmpl.validate("wpd_loss");
        KdTree3 tree(tmpl.points);
        return evaluate_objective(pose, weights, source_keys.positions, target_keys.positions,
                                  lambda, &tree, &tmpl.points, false, false)
            .loss;
    }
    return evaluate_objective(pose, weights, source_keys.positions, target_keys.positions, 0.0,
                              nullptr, nullptr, false, false)
        .loss;
}

RigidTransform optimize_pose(const RigidTransform& initial, const AffinityMatrix& affinity,
                             const KeypointSet& source_keys, const KeypointSet& target_keys,
                             const PointCloud& tmpl, const OptimizerConfig& config) {
    check_shapes(source_keys, target_keys, affinity.scores, "optimize_pose");
    if (config.steps_per_stage < 1 || !(config.learning_rate > 0.0))
        throw DegenerateParameters("optimize_pose: invalid optimizer configuration");

    std::unique_ptr<KdTree3> tree;
    const std::vector<Eigen::Vector3d>* tmpl_points = nullptr;
    if (config.chamfer_weight > 0.0) {
        tmpl.validate("optimize_pose");
        tree = std::make_unique<KdTree3>(tmpl.points);
        tmpl_points = &tmpl.points;
    }

    PoseParams params = pose_params_from(initial);
    Eigen::VectorXd flat(9);
    flat << params.a1, params.a2, params.t;
    AdamState adam(9);

    double best_loss = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best = flat;

    for (int step = 0; step <= config.steps_per_stage; ++step) {
        const PoseParams current{flat.segment<3>(0), flat.segment<3>(3), flat.segment<3>(6)};
        const bool want_grad = step < config.steps_per_stage;
        const LossGrad lg = evaluate_objective(current, affinity.scores, source_keys.positions,
                                               target_keys.positions, config.chamfer_weight,
                                               tree.get(), tmpl_points, want_grad, false);
        if (lg.loss < best_loss) {
            best_loss = lg.loss;
            best = flat;
        }
        if (!want_grad) break;
        Eigen::VectorXd grad(9);
        grad << lg.g_a1, lg.g_a2, lg.g_t;
        adam.update(flat, grad, config);
    }

    return pose_from_params({best.segment<3>(0), best.segment<3>(3), best.segment<3>(6)});
}

JointResult optimize_joint(const RigidTransform& initial, const CorrespondenceMatrix& c0,
                           const KeypointSet& source_keys, const KeypointSet& target_keys,
                           const PointCloud& tmpl, const OptimizerConfig& config,
                           const JointObserver& observer) {
    check_shapes(source_keys, target_keys, c0.logits, "optimize_joint");
    if (config.steps_per_stage < 1 || !(config.learning_rate > 0.0))
        throw DegenerateParameters("optimize_joint: invalid optimizer configuration");

    std::unique_ptr<KdTree3> tree;
    const std::vector<Eigen::Vector3d>* tmpl_points = nullptr;
    if (config.chamfer_weight > 0.0) {
        tmpl.validate("optimize_joint");
        tree = std::make_unique<KdTree3>(tmpl.points);
        tmpl_points = &tmpl.points;
    }

    const Eigen::Index n = c0.logits.rows();
    const Eigen::Index k = c0.logits.cols();
    const Eigen::Index pose_size = 9;
    const Eigen::Index total = pose_size + n * k;

    PoseParams params = pose_params_from(initial);
    Eigen::VectorXd flat(total);
    flat.segment<3>(0) = params.a1;
    flat.segment<3>(3) = params.a2;
    flat.segment<3>(6) = params.t;
    flat.tail(n * k) = Eigen::Map<const Eigen::VectorXd>(c0.logits.data(), n * k);
    AdamState adam(total);

    double best_loss = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best = flat;
    CorrespondenceMatrix current_c;
    current_c.logits.resize(n, k);

    for (int step = 0; step <= config.steps_per_stage; ++step) {
        const PoseParams current{flat.segment<3>(0), flat.segment<3>(3), flat.segment<3>(6)};
        current_c.logits = Eigen::Map<const Eigen::MatrixXd>(flat.data() + pose_size, n, k);
        const Eigen::MatrixXd realized = current_c.realized();

        const bool want_grad = step < config.steps_per_stage;
        const LossGrad lg = evaluate_objective(current, realized, source_keys.positions,
                                               target_keys.positions, config.chamfer_weight,
                                               tree.get(), tmpl_points, want_grad, want_grad);
        if (observer) observer(step, lg.loss, realized);
        if (lg.loss < best_loss) {
            best_loss = lg.loss;
            best = flat;
        }
        if (!want_grad) break;

        Eigen::VectorXd grad(total);
        grad.segment<3>(0) = lg.g_a1;
        grad.segment<3>(3) = lg.g_a2;
        grad.segment<3>(6) = lg.g_t;
        grad.tail(n * k) = Eigen::Map<const Eigen::VectorXd>(lg.g_logits.data(), n * k);
        adam.update(flat, grad, config);
    }

    JointResult out;
    out.pose = pose_from_params({best.segment<3>(0), best.segment<3>(3), best.segment<3>(6)});
    out.correspondences.logits = Eigen::Map<const Eigen::MatrixXd>(best.data() + pose_size, n, k);
    out.final_loss = best_loss;
    return out;
}

double one_directional_chamfer(const PointCloud& x, const PointCloud& y) {
    x.validate("one_directional_chamfer");
    y.validate("one_directional_chamfer");
    double sum = 0.0;
    if (y.size() > 256) {
        KdTree3 tree(y.points);
        for (const auto& p : x.points) sum += tree.nearest(p).second;
    } else {
        for (const auto& p : x.points) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : y.points) best = std::min(best, (p - q).squaredNorm());
            sum += std::sqrt(best);
        }
    }
    return sum / static_cast<double>(x.size());
}

RigidTransform icp_multistart(const PointCloud& observed, const PointCloud& target, int starts) {
    observed.validate("icp_multistart");
    target.validate("icp_multistart");
    if (starts < 1) throw InvalidCount("icp_multistart: starts must be >= 1");

    const KdTree3 tree(target.points);
    const Eigen::Vector3d obs_centroid = observed.centroid();
    const Eigen::Vector3d tgt_centroid = target.centroid();

    RigidTransform best;
    double best_residual = std::numeric_limits<double>::infinity();

    std::vector<Eigen::Vector3d> matched(observed.size());
    for (int s = 0; s < starts; ++s) {
        RigidTransform t;
        t.rotation = s == 0 ? Eigen::Matrix3d::Identity()
                            : shoemake_rotation(halton(s, 2), halton(s, 3), halton(s, 5));
        t.translation = tgt_centroid - t.rotation * obs_centroid;

        for (int iter = 0; iter < 100; ++iter) {
            for (std::size_t i = 0; i < observed.size(); ++i)
                matched[i] = target.points[tree.nearest(t.apply(observed.points[i])).first];
            const RigidTransform next = kabsch(observed.points, matched);
            const double delta = (next.rotation - t.rotation).norm() +
                                 (next.translation - t.translation).norm();
            t = next;
            if (delta < 1e-6) break;
        }

        const double residual = mean_nn_distance(observed.points, t, tree);
        if (residual < best_residual) {
            best_residual = residual;
            best = t;
        }
    }
    return best;
}

DictionaryAssets prepare_dictionary(const PartitionDictionary& dictionary, const PointCloud& tmpl,
                                    const RegistrationOptions& options) {
    tmpl.validate("register_dictionary");
    if (dictionary.partials.empty()) throw EmptyInput("register_dictionary: empty dictionary");
    if (dictionary.viewpoints.size() != dictionary.partials.size())
        throw DegenerateInput("register_dictionary: viewpoint count does not match partials");

    DictionaryAssets assets;
    assets.template_tree = std::make_shared<KdTree3>(tmpl.points);
    assets.candidates.reserve(dictionary.size());

    const int target_count = 2 * options.keypoint_count;
    for (std::size_t i = 0; i < dictionary.partials.size(); ++i) {
        const PointCloud part =
            ensure_normals(dictionary.partials[i], options.normal_neighbors,
                           dictionary.viewpoints[i]);
        CandidateAssets cand;
        const int k = std::min<int>(target_count, static_cast<int>(part.size()));
        cand.target_keys = farthest_point_sampling(part, k);
        if (options.descriptor.kind == DescriptorKind::Pfh)
            cand.pfh = compute_pfh_set(part, cand.target_keys, options.descriptor.radius,
                                       options.descriptor.bins);
        else
            cand.lps = compute_lps_set(part, cand.target_keys, options.template_ground,
                                       options.descriptor.radius);
        assets.candidates.push_back(std::move(cand));
    }
    return assets;
}

RegistrationResult register_with_assets(const PointCloud& observed,
                                        const DictionaryAssets& assets, const PointCloud& tmpl,
                                        const RegistrationOptions& options) {
    observed.validate("register_dictionary");
    if (static_cast<int>(observed.size()) < options.keypoint_count)
        throw InvalidCount("register_dictionary: observed cloud smaller than the keypoint count");
    if (assets.candidates.empty()) throw EmptyInput("register_dictionary: no candidates");

    const PointCloud obs =
        ensure_normals(observed, options.normal_neighbors, options.observed_viewpoint);
    const KeypointSet obs_keys = farthest_point_sampling(obs, options.keypoint_count);

    std::vector<PfhDescriptor> obs_pfh;
    std::vector<LpsDescriptor> obs_lps;
    if (options.descriptor.kind == DescriptorKind::Pfh)
        obs_pfh = compute_pfh_set(obs, obs_keys, options.descriptor.radius,
                                  options.descriptor.bins);
    else
        obs_lps = compute_lps_set(obs, obs_keys, options.observed_ground,
                                  options.descriptor.radius);

    RegistrationResult result;
    result.all_candidates.resize(assets.candidates.size());

    parallel_for(static_cast<int>(assets.candidates.size()), options.threads, [&](int i) {
        const CandidateAssets& cand = assets.candidates[i];
        const AffinityMatrix affinity =
            options.descriptor.kind == DescriptorKind::Pfh
                ? affinity_from_descriptors(obs_pfh, cand.pfh, options.descriptor.epsilon)
                : affinity_from_descriptors(obs_lps, cand.lps,
                                            options.descriptor.fscore_threshold);

        CandidateResult entry;
        const RigidTransform t0 =
            svd_initialize(obs_keys, cand.target_keys, affinity, &entry.degenerate_init);
        const RigidTransform t1 =
            optimize_pose(t0, affinity, obs_keys, cand.target_keys, tmpl, options.optimizer);
        const JointResult joint =
            optimize_joint(t1, CorrespondenceMatrix::from_affinity(affinity), obs_keys,
                           cand.target_keys, tmpl, options.optimizer);

        entry.pose = joint.pose;
        entry.final_loss = joint.final_loss;
        entry.chamfer = mean_nn_distance(observed.points, joint.pose, *assets.template_tree);
        result.all_candidates[i] = std::move(entry);
    });

    int selected = -1;
    for (std::size_t i = 0; i < result.all_candidates.size(); ++i) {
        const CandidateResult& c = result.all_candidates[i];
        if (c.degenerate_init) continue;
        if (selected < 0) {
            selected = static_cast<int>(i);
            continue;
        }
        const CandidateResult& cur = result.all_candidates[selected];
        const double value =
            options.selection == SelectionCriterion::MinLoss ? c.final_loss : c.chamfer;
        const double cur_value =
            options.selection == SelectionCriterion::MinLoss ? cur.final_loss : cur.chamfer;
        if (value < cur_value) selected = static_cast<int>(i);
    }
    if (selected < 0)
        throw AllCandidatesFailed(
            "register_dictionary: every candidate had a degenerate initialization");

    result.candidate_index = selected;
    result.pose = result.all_candidates[selected].pose;
    result.final_loss = result.all_candidates[selected].final_loss;
    result.chamfer_to_template = result.all_candidates[selected].chamfer;
    return result;
}

RegistrationResult register_dictionary(const PointCloud& observed,
                                       const PartitionDictionary& dictionary,
                                       const PointCloud& tmpl,
                                       const RegistrationOptions& options) {
    const DictionaryAssets assets = prepare_dictionary(dictionary, tmpl, options);
    return register_with_assets(observed, assets, tmpl, options);
}

}  // namespace partreg
