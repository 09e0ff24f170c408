// partreg: category-level partial point cloud registration against a
// partitioned template dictionary.
//
// Subcommands: register, partition, evaluate, generate-scan, correspondences.
// Exit codes: 0 success, 2 parse/config error, 3 when every dictionary
// candidate failed, 1 for unexpected errors.

#include "partreg/config.hpp"
#include "partreg/errors.hpp"
#include "partreg/harness.hpp"
#include "partreg/io.hpp"
#include "partreg/metrics.hpp"
#include "partreg/parallel.hpp"
#include "partreg/registration.hpp"
#include "partreg/sampling.hpp"
#include "partreg/scan.hpp"
#include "partreg/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

// atomic_write is shared with the library internals
#include "../src/atomic_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace partreg;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

RunConfig load_config(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return RunConfig::load(path);
}

Eigen::Vector3d parse_vec3(const std::vector<double>& v, const char* flag) {
    if (v.size() != 3) throw ParseError(std::string(flag) + " needs exactly 3 values");
    return {v[0], v[1], v[2]};
}

PointCloud load_observed(const RunConfig& config, const std::string& path) {
    PointCloud observed = read_point_cloud(path);
    if (config.downsample > 0 && config.downsample < static_cast<int>(observed.size())) {
        const KeypointSet keys = farthest_point_sampling(observed, config.downsample);
        PointCloud reduced;
        reduced.frame_label = observed.frame_label;
        for (int idx : keys.source_indices) {
            reduced.points.push_back(observed.points[idx]);
            if (observed.has_normals()) reduced.normals.push_back(observed.normals[idx]);
        }
        observed = std::move(reduced);
    }
    return observed;
}

RegistrationOptions options_from_config(const RunConfig& config, const PointCloud& tmpl,
                                        const Eigen::Vector3d& observed_ground) {
    RegistrationOptions opts;
    opts.keypoint_count = config.keypoint_count;
    opts.descriptor = config.resolve_descriptor(tmpl.bbox_diagonal());
    opts.optimizer = config.resolve_optimizer();
    opts.selection = config.resolve_selection();
    opts.template_ground.normal = config.ground_normal();
    opts.observed_ground.normal = observed_ground.normalized();
    opts.normal_neighbors = config.normal_neighbors;
    opts.threads = max_threads();
    return opts;
}

int cmd_register(const std::string& observed_path, const std::string& template_path,
                 const std::string& config_path, const std::string& out_path,
                 const std::string& gt_path, const std::string& selection,
                 const std::string& descriptor, const std::vector<double>& ground,
                 const std::string& dump_aligned) {
    RunConfig config = load_config(config_path);
    if (!selection.empty()) config.selection = selection;
    if (!descriptor.empty()) config.descriptor = descriptor;
    config.validate();

    const PointCloud observed = load_observed(config, observed_path);
    const PointCloud tmpl = prepare_template(read_point_cloud(template_path), config);

    Eigen::Vector3d observed_ground = config.ground_normal();
    if (!ground.empty()) observed_ground = parse_vec3(ground, "--ground").normalized();

    const PartitionDictionary dict = partition_template(
        tmpl, config.partition_count, config.view_radius_scale, config.hpr_radius_exponent);
    const RegistrationOptions opts = options_from_config(config, tmpl, observed_ground);
    const RegistrationResult result = register_dictionary(observed, dict, tmpl, opts);

    std::string extra = std::string("\"selection\": \"") + config.selection + "\"";
    if (!gt_path.empty()) {
        const RigidTransform gt = read_pose(gt_path);
        const double rot_deg =
            rotation_error(gt.rotation, result.pose.rotation) * 180.0 / std::numbers::pi;
        const double trans = translation_error(gt.translation, result.pose.translation);
        std::cout << "gt_rotation_error_deg=" << fmt_double(rot_deg) << "\n";
        std::cout << "gt_translation_error=" << fmt_double(trans) << "\n";
        extra += ",\n  \"gt_rotation_error_deg\": " + fmt_double(rot_deg) +
                 ",\n  \"gt_translation_error\": " + fmt_double(trans);
    }
    write_pose(result, config.to_json_string(), out_path, extra);

    if (!dump_aligned.empty())
        write_point_cloud(apply_transform(result.pose, observed), dump_aligned);

    std::cout << "selected candidate " << result.candidate_index << " of "
              << result.all_candidates.size() << " (loss " << result.final_loss << ", chamfer "
              << result.chamfer_to_template << ")\n";
    return 0;
}

int cmd_partition(const std::string& template_path, const std::string& config_path,
                  const std::string& out_dir) {
    const RunConfig config = load_config(config_path);
    config.validate();
    const PointCloud tmpl = prepare_template(read_point_cloud(template_path), config);
    const PartitionDictionary dict = partition_template(
        tmpl, config.partition_count, config.view_radius_scale, config.hpr_radius_exponent);

    fs::create_directories(out_dir);
    nlohmann::json views = nlohmann::json::array();
    for (std::size_t i = 0; i < dict.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "partial_%02zu.ply", i);
        write_point_cloud(dict.partials[i], fs::path(out_dir) / name);
        views.push_back({dict.viewpoints[i].x(), dict.viewpoints[i].y(), dict.viewpoints[i].z()});
    }
    nlohmann::json meta;
    meta["version"] = kVersionString;
    meta["viewpoints"] = views;
    meta["dropped_viewpoints"] = dict.dropped_viewpoints;
    partreg::detail::atomic_write(fs::path(out_dir) / "viewpoints.json", meta.dump(2) + "\n");

    std::cout << "wrote " << dict.size() << " partials to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& template_path, const std::string& config_path, int trials,
                 std::uint64_t seed, const std::string& method, bool baseline_compare,
                 const std::string& out_path) {
    RunConfig config = load_config(config_path);
    config.seed = seed;
    config.validate();
    const PointCloud tmpl = read_point_cloud(template_path);

    EvaluateRequest request;
    request.trials = trials;
    request.seed = seed;
    request.method = method;
    request.baseline_compare = baseline_compare;

    const std::vector<MethodEvaluation> evals = run_evaluation(tmpl, config, request);
    partreg::detail::atomic_write(out_path, evaluation_csv(config, evals));

    for (const MethodEvaluation& e : evals)
        std::cout << e.method << ": mean_rot=" << e.summary.mean_rotation_deg
                  << " deg, median_rot=" << e.summary.median_rotation_deg
                  << " deg, acc10=" << e.summary.acc_at_10deg
                  << ", acc30=" << e.summary.acc_at_30deg
                  << ", mean_trans=" << e.summary.mean_translation << "\n";
    return 0;
}

int cmd_generate_scan(const std::string& template_path, const std::string& config_path,
                      std::uint64_t seed, const std::string& out_path, const std::string& gt_out,
                      std::optional<double> noise_sigma, std::optional<double> dropout,
                      const std::vector<double>& viewpoint) {
    const RunConfig config = load_config(config_path);
    config.validate();
    const PointCloud tmpl = prepare_template(read_point_cloud(template_path), config);
    const double diagonal = tmpl.bbox_diagonal();

    std::mt19937_64 rng(mix_seed(seed, 0));
    ScanSpec spec;
    spec.camera_pose.rotation = sample_rotation_uniform(rng);
    std::uniform_real_distribution<double> box(-config.scan.translation_box_fraction * diagonal,
                                               config.scan.translation_box_fraction * diagonal);
    spec.camera_pose.translation = Eigen::Vector3d(box(rng), box(rng), box(rng));
    spec.viewpoint = viewpoint.empty()
                         ? Eigen::Vector3d(tmpl.centroid() + config.view_radius_scale *
                                                                 tmpl.bounding_radius() *
                                                                 sample_direction_uniform(rng))
                         : parse_vec3(viewpoint, "--viewpoint");
    spec.noise_sigma = noise_sigma.value_or(config.scan.noise_sigma_fraction * diagonal);
    spec.dropout_fraction = dropout.value_or(config.scan.dropout);

    const auto [scan, gt] =
        generate_scan(tmpl, spec, mix_seed(seed, 1), config.hpr_radius_exponent);
    write_point_cloud(scan, out_path);

    if (!gt_out.empty()) {
        std::string doc = "{\n";
        doc += std::string("  \"version\": \"") + kVersionString + "\",\n  \"rotation\": [";
        for (int r = 0; r < 3; ++r) {
            doc += "[";
            for (int c = 0; c < 3; ++c) {
                doc += fmt_double(gt.rotation(r, c));
                if (c < 2) doc += ", ";
            }
            doc += r < 2 ? "], " : "]";
        }
        doc += "],\n  \"translation\": [" + fmt_double(gt.translation.x()) + ", " +
               fmt_double(gt.translation.y()) + ", " + fmt_double(gt.translation.z()) + "]\n}\n";
        partreg::detail::atomic_write(gt_out, doc);
    }
    std::cout << "wrote scan with " << scan.size() << " points to " << out_path << "\n";
    return 0;
}

int cmd_correspondences(const std::string& observed_path, const std::string& template_path,
                        const std::string& config_path, const std::string& out_path,
                        int partial_index, const std::vector<double>& ground) {
    const RunConfig config = load_config(config_path);
    config.validate();
    const PointCloud observed_raw = load_observed(config, observed_path);
    const PointCloud tmpl = prepare_template(read_point_cloud(template_path), config);

    PointCloud target = tmpl;
    if (partial_index >= 0) {
        const PartitionDictionary dict = partition_template(
            tmpl, config.partition_count, config.view_radius_scale, config.hpr_radius_exponent);
        if (partial_index >= static_cast<int>(dict.size()))
            throw ParseError("--partial index out of range");
        target = dict.partials[partial_index];
    }

    Eigen::Vector3d observed_ground = config.ground_normal();
    if (!ground.empty()) observed_ground = parse_vec3(ground, "--ground").normalized();

    PointCloud observed = observed_raw;
    if (!observed.has_normals()) {
        const int k =
            std::min<int>(config.normal_neighbors, static_cast<int>(observed.size()) - 1);
        observed = estimate_normals(observed, k, Eigen::Vector3d::Zero());
    }

    const int n = std::min<int>(config.keypoint_count, static_cast<int>(observed.size()));
    const int k2 = std::min<int>(2 * config.keypoint_count, static_cast<int>(target.size()));
    const KeypointSet src_keys = farthest_point_sampling(observed, n);
    const KeypointSet tgt_keys = farthest_point_sampling(target, k2);

    const DescriptorConfig desc = config.resolve_descriptor(tmpl.bbox_diagonal());
    GroundFrame src_ground;
    src_ground.normal = observed_ground;
    GroundFrame tgt_ground;
    tgt_ground.normal = config.ground_normal();

    const AffinityMatrix affinity =
        build_affinity(observed, src_keys, src_ground, target, tgt_keys, tgt_ground, desc);
    save_correspondences(extract_hard_correspondences(affinity), out_path);
    std::cout << "wrote " << affinity.rows() << " correspondences to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("partreg ") + kVersion +
                 " - partial point cloud registration against partitioned templates"};
    app.require_subcommand(1);

    auto* reg = app.add_subcommand("register", "Register an observed scan to a template");
    std::string reg_observed, reg_template, reg_config, reg_out, reg_gt, reg_selection,
        reg_descriptor, reg_dump;
    std::vector<double> reg_ground;
    reg->add_option("--observed", reg_observed, "Observed cloud (PLY/OBJ)")->required();
    reg->add_option("--template", reg_template, "Template cloud (PLY/OBJ)")->required();
    reg->add_option("--config", reg_config, "Run configuration (JSON)");
    reg->add_option("--out", reg_out, "Output pose document (JSON)")->required();
    reg->add_option("--gt", reg_gt, "Ground-truth pose JSON for error reporting");
    reg->add_option("--selection", reg_selection, "Candidate selection: loss|chamfer")
        ->check(CLI::IsMember({"loss", "chamfer"}));
    reg->add_option("--descriptor", reg_descriptor, "Descriptor: pfh|lps")
        ->check(CLI::IsMember({"pfh", "lps"}));
    reg->add_option("--ground", reg_ground, "Observed-frame ground normal (x y z)")->expected(3);
    reg->add_option("--dump-aligned", reg_dump, "Write the transformed observed cloud (PLY)");

    auto* part = app.add_subcommand("partition", "Dump the m partial templates as PLY files");
    std::string part_template, part_config, part_dir;
    part->add_option("--template", part_template, "Template cloud (PLY/OBJ)")->required();
    part->add_option("--config", part_config, "Run configuration (JSON)");
    part->add_option("--out-dir", part_dir, "Output directory")->required();

    auto* eval = app.add_subcommand("evaluate", "Synthetic evaluation harness");
    std::string eval_template, eval_config, eval_out, eval_method = "ours";
    int eval_trials = 10;
    std::uint64_t eval_seed = 0;
    bool eval_baseline = false;
    eval->add_option("--template", eval_template, "Template cloud (PLY/OBJ)")->required();
    eval->add_option("--config", eval_config, "Run configuration (JSON)");
    eval->add_option("--trials", eval_trials, "Number of trials")->required();
    eval->add_option("--seed", eval_seed, "RNG seed")->required();
    eval->add_option("--out", eval_out, "Output CSV")->required();
    eval->add_option("--method", eval_method, "ours|icp")->check(CLI::IsMember({"ours", "icp"}));
    eval->add_flag("--baseline-compare", eval_baseline,
                   "Also run single-candidate complete-template matching");

    auto* gen = app.add_subcommand("generate-scan", "Generate a synthetic partial scan");
    std::string gen_template, gen_config, gen_out, gen_gt;
    std::uint64_t gen_seed = 0;
    double gen_noise = -1.0, gen_dropout = -1.0;
    std::vector<double> gen_viewpoint;
    gen->add_option("--template", gen_template, "Template cloud (PLY/OBJ)")->required();
    gen->add_option("--config", gen_config, "Run configuration (JSON)");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "Output scan (PLY)")->required();
    gen->add_option("--gt-out", gen_gt, "Ground-truth pose output (JSON)");
    gen->add_option("--noise-sigma", gen_noise, "Absolute noise sigma (overrides config)");
    gen->add_option("--dropout", gen_dropout, "Dropout fraction (overrides config)");
    gen->add_option("--viewpoint", gen_viewpoint, "Template-frame viewpoint (x y z)")->expected(3);

    auto* corr = app.add_subcommand("correspondences",
                                    "Dump hard keypoint correspondences for external solvers");
    std::string corr_observed, corr_template, corr_config, corr_out;
    int corr_partial = -1;
    std::vector<double> corr_ground;
    corr->add_option("--observed", corr_observed, "Observed cloud (PLY/OBJ)")->required();
    corr->add_option("--template", corr_template, "Template cloud (PLY/OBJ)")->required();
    corr->add_option("--config", corr_config, "Run configuration (JSON)");
    corr->add_option("--out", corr_out, "Output text file")->required();
    corr->add_option("--partial", corr_partial,
                     "Match against dictionary entry i instead of the complete template");
    corr->add_option("--ground", corr_ground, "Observed-frame ground normal (x y z)")->expected(3);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (reg->parsed())
            return cmd_register(reg_observed, reg_template, reg_config, reg_out, reg_gt,
                                reg_selection, reg_descriptor, reg_ground, reg_dump);
        if (part->parsed()) return cmd_partition(part_template, part_config, part_dir);
        if (eval->parsed())
            return cmd_evaluate(eval_template, eval_config, eval_trials, eval_seed, eval_method,
                                eval_baseline, eval_out);
        if (gen->parsed())
            return cmd_generate_scan(
                gen_template, gen_config, gen_seed, gen_out, gen_gt,
                gen_noise >= 0.0 ? std::optional<double>(gen_noise) : std::nullopt,
                gen_dropout >= 0.0 ? std::optional<double>(gen_dropout) : std::nullopt,
                gen_viewpoint);
        if (corr->parsed())
            return cmd_correspondences(corr_observed, corr_template, corr_config, corr_out,
                                       corr_partial, corr_ground);
    } catch (const AllCandidatesFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
