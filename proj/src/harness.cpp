#include "partreg/harness.hpp"

#include "partreg/errors.hpp"
#include "partreg/parallel.hpp"
#include "partreg/registration.hpp"
#include "partreg/sampling.hpp"
#include "partreg/scan.hpp"
#include "partreg/version.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace partreg {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

RegistrationOptions make_options(const RunConfig& config, const PointCloud& tmpl,
                                 const Eigen::Matrix3d& observed_rotation) {
    RegistrationOptions opts;
    opts.keypoint_count = config.keypoint_count;
    opts.descriptor = config.resolve_descriptor(tmpl.bbox_diagonal());
    opts.optimizer = config.resolve_optimizer();
    opts.selection = config.resolve_selection();
    opts.template_ground.normal = config.ground_normal();
    opts.observed_ground.normal = (observed_rotation * config.ground_normal()).normalized();
    opts.normal_neighbors = config.normal_neighbors;
    return opts;
}

TrialRecord failed_trial(int trial, const RigidTransform& gt) {
    TrialRecord row;
    row.trial = trial;
    row.rot_err_deg = 180.0;
    row.trans_err = gt.translation.norm();
    row.loss = std::numeric_limits<double>::infinity();
    row.chamfer = std::numeric_limits<double>::infinity();
    row.candidate = -1;
    return row;
}

}  // namespace

PointCloud prepare_template(const PointCloud& tmpl, const RunConfig& config) {
    tmpl.validate("prepare_template");
    if (tmpl.has_normals()) return tmpl;
    // Orient outward: estimate toward the centroid, then flip.
    const int k = std::min<int>(config.normal_neighbors, static_cast<int>(tmpl.size()) - 1);
    if (k < 3) throw InvalidCount("prepare_template: template too small for normal estimation");
    PointCloud out = estimate_normals(tmpl, k, tmpl.centroid());
    for (auto& n : out.normals) n = -n;
    return out;
}

std::vector<MethodEvaluation> run_evaluation(const PointCloud& tmpl_in, const RunConfig& config,
                                             const EvaluateRequest& request) {
    if (request.trials < 1) throw InvalidCount("run_evaluation: trials must be >= 1");
    config.validate();
    const PointCloud tmpl = prepare_template(tmpl_in, config);
    const double diagonal = tmpl.bbox_diagonal();
    const double bounding = tmpl.bounding_radius();
    const Eigen::Vector3d centroid = tmpl.centroid();

    std::vector<MethodEvaluation> evaluations;
    DictionaryAssets ours_assets;
    DictionaryAssets direct_assets;
    const RegistrationOptions base_opts = make_options(config, tmpl, Eigen::Matrix3d::Identity());

    const bool run_ours = request.method == "ours";
    const bool run_icp = request.method == "icp";
    if (!run_ours && !run_icp) throw ParseError("run_evaluation: method must be 'ours' or 'icp'");
    const bool run_direct = request.baseline_compare;

    if (run_ours) {
        const PartitionDictionary dict =
            partition_template(tmpl, config.partition_count, config.view_radius_scale,
                               config.hpr_radius_exponent);
        ours_assets = prepare_dictionary(dict, tmpl, base_opts);
        evaluations.push_back({"ours", {}, {}});
    }
    if (run_direct) {
        PartitionDictionary single;
        single.partials.push_back(tmpl);
        single.viewpoints.push_back(centroid +
                                    Eigen::Vector3d(0, 0, config.view_radius_scale * bounding));
        direct_assets = prepare_dictionary(single, tmpl, base_opts);
        evaluations.push_back({"direct", {}, {}});
    }
    if (run_icp) evaluations.push_back({"icp", {}, {}});

    for (MethodEvaluation& method : evaluations) method.rows.resize(request.trials);

    parallel_for(request.trials, max_threads(), [&](int trial) {
        std::mt19937_64 rng(mix_seed(request.seed, static_cast<std::uint64_t>(trial)));
        ScanSpec spec;
        spec.camera_pose.rotation = sample_rotation_uniform(rng);
        std::uniform_real_distribution<double> box(-config.scan.translation_box_fraction * diagonal,
                                                   config.scan.translation_box_fraction * diagonal);
        spec.camera_pose.translation = Eigen::Vector3d(box(rng), box(rng), box(rng));
        spec.viewpoint =
            centroid + config.view_radius_scale * bounding * sample_direction_uniform(rng);
        spec.noise_sigma = config.scan.noise_sigma_fraction * diagonal;
        spec.dropout_fraction = config.scan.dropout;

        const auto [scan, gt] = generate_scan(
            tmpl, spec, mix_seed(request.seed, 0x5CA90000ULL + trial), config.hpr_radius_exponent);

        RegistrationOptions opts = make_options(config, tmpl, spec.camera_pose.rotation);

        for (MethodEvaluation& method : evaluations) {
            TrialRecord row;
            row.trial = trial;
            if (method.method == "icp") {
                const RigidTransform pose = icp_multistart(scan, tmpl, 20);
                row.rot_err_deg =
                    rotation_error(gt.rotation, pose.rotation) * 180.0 / std::numbers::pi;
                row.trans_err = translation_error(gt.translation, pose.translation);
                row.chamfer = one_directional_chamfer(apply_transform(pose, scan), tmpl);
                row.loss = row.chamfer;
                row.candidate = -1;
            } else {
                const DictionaryAssets& assets =
                    method.method == "ours" ? ours_assets : direct_assets;
                try {
                    const RegistrationResult result =
                        register_with_assets(scan, assets, tmpl, opts);
                    row.rot_err_deg = rotation_error(gt.rotation, result.pose.rotation) * 180.0 /
                                      std::numbers::pi;
                    row.trans_err = translation_error(gt.translation, result.pose.translation);
                    row.loss = result.final_loss;
                    row.chamfer = result.chamfer_to_template;
                    row.candidate = result.candidate_index;
                } catch (const AllCandidatesFailed&) {
                    row = failed_trial(trial, gt);
                }
            }
            method.rows[trial] = row;
        }
    });

    for (MethodEvaluation& method : evaluations) {
        std::vector<std::pair<double, double>> errors;
        errors.reserve(method.rows.size());
        for (const TrialRecord& row : method.rows)
            errors.emplace_back(row.rot_err_deg * std::numbers::pi / 180.0, row.trans_err);
        method.summary = summarize(errors);
    }
    return evaluations;
}

std::string evaluation_csv(const RunConfig& config,
                           const std::vector<MethodEvaluation>& evaluations) {
    std::ostringstream out;
    out << "# " << kVersionString << "\n";
    out << "# config " << nlohmann::json::parse(config.to_json_string()).dump() << "\n";
    out << "method,trial,rot_err_deg,trans_err,loss,chamfer,candidate\n";
    for (const MethodEvaluation& method : evaluations) {
        for (const TrialRecord& row : method.rows) {
            out << method.method << "," << row.trial << "," << fmt_double(row.rot_err_deg) << ","
                << fmt_double(row.trans_err) << "," << fmt_double(row.loss) << ","
                << fmt_double(row.chamfer) << "," << row.candidate << "\n";
        }
        out << method.method << ",summary," << method.summary.csv_row() << "\n";
    }
    return out.str();
}

}  // namespace partreg
