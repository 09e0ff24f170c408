#pragma once

#include "partreg/core.hpp"
#include "partreg/registration.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace partreg {

struct ScanConfig {
    double noise_sigma_fraction = 0.005;      // of the template bbox diagonal
    double dropout = 0.1;
    double translation_box_fraction = 0.5;    // of the template bbox diagonal
};

/// The full run configuration; serializes to JSON with exact round-trip
/// equality. Unknown keys are a ParseError so config typos fail loudly.
struct RunConfig {
    std::string descriptor = "lps";  // "pfh" | "lps"
    int partition_count = 18;        // m
    int keypoint_count = 128;        // n
    double feature_radius = 0.15;
    bool feature_radius_is_fraction = true;  // fraction of the template bbox diagonal
    int pfh_bins = 5;
    double epsilon = 1e-3;
    double fscore_threshold_factor = 0.05;  // times the feature radius
    double chamfer_weight = 0.0;
    double learning_rate = 0.001;
    int steps_per_stage = 300;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::string selection = "loss";  // "loss" | "chamfer"
    std::uint64_t seed = 0;
    double view_radius_scale = 3.0;
    double hpr_radius_exponent = 2.5;
    int normal_neighbors = 30;
    std::array<double, 3> template_ground_normal = {0.0, 0.0, 1.0};
    ScanConfig scan;
    int downsample = 0;  // FPS the observed cloud to this count; 0 = off
    std::string observed_path;
    std::string template_path;
    std::string output_path;

    std::string to_json_string() const;
    static RunConfig from_json_string(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    void validate() const;

    DescriptorConfig resolve_descriptor(double template_diagonal) const;
    OptimizerConfig resolve_optimizer() const;
    SelectionCriterion resolve_selection() const;
    DescriptorKind resolve_kind() const;
    Eigen::Vector3d ground_normal() const;
};

}  // namespace partreg
