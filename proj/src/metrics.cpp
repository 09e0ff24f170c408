#include "partreg/metrics.hpp"

#include "partreg/errors.hpp"
#include "partreg/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace partreg {

double rotation_error(const Eigen::Matrix3d& r_gt, const Eigen::Matrix3d& r_pred) {
    const double trace = (r_gt.transpose() * r_pred).trace();
    return std::acos(std::clamp((trace - 1.0) / 2.0, -1.0, 1.0));
}

double translation_error(const Eigen::Vector3d& t_gt, const Eigen::Vector3d& t_pred) {
    return (t_gt - t_pred).norm();
}

double axis_alignment_error(const Eigen::Vector3d& axis_gt, const Eigen::Vector3d& axis_pred) {
    return std::acos(std::clamp(std::abs(axis_gt.dot(axis_pred)), 0.0, 1.0));
}

PoseErrorSummary summarize(const std::vector<std::pair<double, double>>& errors) {
    if (errors.empty()) throw EmptyInput("summarize: empty error list");
    const double to_deg = 180.0 / std::numbers::pi;

    std::vector<double> rot_deg;
    rot_deg.reserve(errors.size());
    PoseErrorSummary out;
    for (const auto& [rot, trans] : errors) {
        rot_deg.push_back(rot * to_deg);
        out.mean_translation += trans;
    }
    out.mean_translation /= static_cast<double>(errors.size());

    std::sort(rot_deg.begin(), rot_deg.end());
    out.median_rotation_deg = rot_deg[(rot_deg.size() - 1) / 2];

    double sum = 0.0;
    int acc10 = 0;
    int acc30 = 0;
    for (double r : rot_deg) {
        sum += r;
        if (r <= 10.0) ++acc10;
        if (r <= 30.0) ++acc30;
    }
    out.mean_rotation_deg = sum / static_cast<double>(rot_deg.size());
    out.acc_at_10deg = static_cast<double>(acc10) / static_cast<double>(rot_deg.size());
    out.acc_at_30deg = static_cast<double>(acc30) / static_cast<double>(rot_deg.size());
    return out;
}

std::string PoseErrorSummary::csv_header() {
    return "mean_rot_deg,median_rot_deg,acc_10deg,acc_30deg,mean_translation";
}

std::string PoseErrorSummary::csv_row() const {
    char buf[192];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g", mean_rotation_deg,
                  median_rotation_deg, acc_at_10deg, acc_at_30deg, mean_translation);
    return buf;
}

double fscore_clouds(const PointCloud& x, const PointCloud& y, double tau) {
    x.validate("fscore_clouds");
    y.validate("fscore_clouds");
    const KdTree3 tree_x(x.points);
    const KdTree3 tree_y(y.points);

    int hit_x = 0;
    for (const auto& p : x.points)
        if (tree_y.any_within(p, tau)) ++hit_x;
    int hit_y = 0;
    for (const auto& p : y.points)
        if (tree_x.any_within(p, tau)) ++hit_y;

    const double precision = static_cast<double>(hit_x) / static_cast<double>(x.size());
    const double recall = static_cast<double>(hit_y) / static_cast<double>(y.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace partreg
