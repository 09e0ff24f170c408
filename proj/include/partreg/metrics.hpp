#pragma once

#include "partreg/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace partreg {

struct PoseErrorSummary {
    double mean_rotation_deg = 0.0;
    double median_rotation_deg = 0.0;
    double acc_at_10deg = 0.0;
    double acc_at_30deg = 0.0;
    double mean_translation = 0.0;

    static std::string csv_header();
    std::string csv_row() const;
};

/// arccos((tr(R_gt^-1 R_pred) - 1) / 2), trace argument clamped to [-1, 1].
double rotation_error(const Eigen::Matrix3d& r_gt, const Eigen::Matrix3d& r_pred);

double translation_error(const Eigen::Vector3d& t_gt, const Eigen::Vector3d& t_pred);

/// Sign-free axis angle: arccos(|a.b|), in [0, pi/2].
double axis_alignment_error(const Eigen::Vector3d& axis_gt, const Eigen::Vector3d& axis_pred);

/// errors: (rotation in radians, translation). Accuracies use <=; the
/// median of an even count takes the lower middle value.
PoseErrorSummary summarize(const std::vector<std::pair<double, double>>& errors);

/// F-score between whole clouds at distance threshold tau.
double fscore_clouds(const PointCloud& x, const PointCloud& y, double tau);

}  // namespace partreg
