#include "partreg/config.hpp"

#include "atomic_io.hpp"
#include "partreg/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace partreg {

using nlohmann::json;

std::string RunConfig::to_json_string() const {
    json j;
    j["descriptor"] = descriptor;
    j["partition_count"] = partition_count;
    j["keypoint_count"] = keypoint_count;
    j["feature_radius"] = feature_radius;
    j["feature_radius_is_fraction"] = feature_radius_is_fraction;
    j["pfh_bins"] = pfh_bins;
    j["epsilon"] = epsilon;
    j["fscore_threshold_factor"] = fscore_threshold_factor;
    j["chamfer_weight"] = chamfer_weight;
    j["learning_rate"] = learning_rate;
    j["steps_per_stage"] = steps_per_stage;
    j["adam_beta1"] = adam_beta1;
    j["adam_beta2"] = adam_beta2;
    j["adam_epsilon"] = adam_epsilon;
    j["selection"] = selection;
    j["seed"] = seed;
    j["view_radius_scale"] = view_radius_scale;
    j["hpr_radius_exponent"] = hpr_radius_exponent;
    j["normal_neighbors"] = normal_neighbors;
    j["template_ground_normal"] = template_ground_normal;
    j["scan"] = {{"noise_sigma_fraction", scan.noise_sigma_fraction},
                 {"dropout", scan.dropout},
                 {"translation_box_fraction", scan.translation_box_fraction}};
    j["downsample"] = downsample;
    j["observed_path"] = observed_path;
    j["template_path"] = template_path;
    j["output_path"] = output_path;
    return j.dump(2);
}

RunConfig RunConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config: expected a JSON object");

    static const std::set<std::string> known = {
        "descriptor",       "partition_count",  "keypoint_count",
        "feature_radius",   "feature_radius_is_fraction", "pfh_bins",
        "epsilon",          "fscore_threshold_factor",    "chamfer_weight",
        "learning_rate",    "steps_per_stage",  "adam_beta1",
        "adam_beta2",       "adam_epsilon",     "selection",
        "seed",             "view_radius_scale", "hpr_radius_exponent",
        "normal_neighbors", "template_ground_normal",     "scan",
        "downsample",       "observed_path",    "template_path",
        "output_path"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key)) throw ParseError("config: unknown key '" + key + "'");
    }

    RunConfig cfg;
    try {
        auto get = [&j](const char* key, auto& field) {
            if (j.contains(key)) field = j[key].template get<std::decay_t<decltype(field)>>();
        };
        get("descriptor", cfg.descriptor);
        get("partition_count", cfg.partition_count);
        get("keypoint_count", cfg.keypoint_count);
        get("feature_radius", cfg.feature_radius);
        get("feature_radius_is_fraction", cfg.feature_radius_is_fraction);
        get("pfh_bins", cfg.pfh_bins);
        get("epsilon", cfg.epsilon);
        get("fscore_threshold_factor", cfg.fscore_threshold_factor);
        get("chamfer_weight", cfg.chamfer_weight);
        get("learning_rate", cfg.learning_rate);
        get("steps_per_stage", cfg.steps_per_stage);
        get("adam_beta1", cfg.adam_beta1);
        get("adam_beta2", cfg.adam_beta2);
        get("adam_epsilon", cfg.adam_epsilon);
        get("selection", cfg.selection);
        get("seed", cfg.seed);
        get("view_radius_scale", cfg.view_radius_scale);
        get("hpr_radius_exponent", cfg.hpr_radius_exponent);
        get("normal_neighbors", cfg.normal_neighbors);
        get("template_ground_normal", cfg.template_ground_normal);
        if (j.contains("scan")) {
            const json& s = j["scan"];
            static const std::set<std::string> scan_known = {
                "noise_sigma_fraction", "dropout", "translation_box_fraction"};
            for (const auto& [key, value] : s.items()) {
                (void)value;
                if (!scan_known.count(key))
                    throw ParseError("config: unknown key 'scan." + key + "'");
            }
            if (s.contains("noise_sigma_fraction"))
                cfg.scan.noise_sigma_fraction = s["noise_sigma_fraction"].get<double>();
            if (s.contains("dropout")) cfg.scan.dropout = s["dropout"].get<double>();
            if (s.contains("translation_box_fraction"))
                cfg.scan.translation_box_fraction = s["translation_box_fraction"].get<double>();
        }
        get("downsample", cfg.downsample);
        get("observed_path", cfg.observed_path);
        get("template_path", cfg.template_path);
        get("output_path", cfg.output_path);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

void RunConfig::save(const std::filesystem::path& path) const {
    detail::atomic_write(path, to_json_string() + "\n");
}

void RunConfig::validate() const {
    if (descriptor != "pfh" && descriptor != "lps")
        throw ParseError("config: descriptor must be 'pfh' or 'lps'");
    if (selection != "loss" && selection != "chamfer")
        throw ParseError("config: selection must be 'loss' or 'chamfer'");
    if (partition_count < 1) throw ParseError("config: partition_count must be >= 1");
    if (keypoint_count < 1) throw ParseError("config: keypoint_count must be >= 1");
    if (!(feature_radius > 0.0)) throw ParseError("config: feature_radius must be > 0");
    if (pfh_bins < 1) throw ParseError("config: pfh_bins must be >= 1");
    if (!(epsilon > 0.0)) throw ParseError("config: epsilon must be > 0");
    if (!(fscore_threshold_factor > 0.0))
        throw ParseError("config: fscore_threshold_factor must be > 0");
    if (chamfer_weight < 0.0) throw ParseError("config: chamfer_weight must be >= 0");
    if (!(learning_rate > 0.0)) throw ParseError("config: learning_rate must be > 0");
    if (steps_per_stage < 1) throw ParseError("config: steps_per_stage must be >= 1");
    if (normal_neighbors < 3) throw ParseError("config: normal_neighbors must be >= 3");
    if (scan.noise_sigma_fraction < 0.0) throw ParseError("config: scan noise must be >= 0");
    if (scan.dropout < 0.0 || scan.dropout >= 1.0)
        throw ParseError("config: scan dropout must be in [0, 1)");
    if (downsample < 0) throw ParseError("config: downsample must be >= 0");
    const Eigen::Vector3d g(template_ground_normal[0], template_ground_normal[1],
                            template_ground_normal[2]);
    if (g.norm() <= 1e-12) throw ParseError("config: template_ground_normal must be nonzero");
}

DescriptorConfig RunConfig::resolve_descriptor(double template_diagonal) const {
    DescriptorConfig out;
    out.kind = resolve_kind();
    out.radius = feature_radius_is_fraction ? feature_radius * template_diagonal : feature_radius;
    out.bins = pfh_bins;
    out.epsilon = epsilon;
    out.fscore_threshold = fscore_threshold_factor * out.radius;
    return out;
}

OptimizerConfig RunConfig::resolve_optimizer() const {
    OptimizerConfig out;
    out.learning_rate = learning_rate;
    out.steps_per_stage = steps_per_stage;
    out.adam_beta1 = adam_beta1;
    out.adam_beta2 = adam_beta2;
    out.adam_epsilon = adam_epsilon;
    out.chamfer_weight = chamfer_weight;
    return out;
}

SelectionCriterion RunConfig::resolve_selection() const {
    return selection == "chamfer" ? SelectionCriterion::MinChamfer : SelectionCriterion::MinLoss;
}

DescriptorKind RunConfig::resolve_kind() const {
    return descriptor == "pfh" ? DescriptorKind::Pfh : DescriptorKind::Lps;
}

Eigen::Vector3d RunConfig::ground_normal() const {
    return Eigen::Vector3d(template_ground_normal[0], template_ground_normal[1],
                           template_ground_normal[2])
        .normalized();
}

}  // namespace partreg
