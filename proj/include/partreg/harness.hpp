#pragma once

#include "partreg/config.hpp"
#include "partreg/core.hpp"
#include "partreg/metrics.hpp"

#include <string>
#include <vector>

namespace partreg {

struct TrialRecord {
    int trial = 0;
    double rot_err_deg = 0.0;
    double trans_err = 0.0;
    double loss = 0.0;
    double chamfer = 0.0;
    int candidate = -1;
};

struct MethodEvaluation {
    std::string method;  // "ours" | "direct" | "icp"
    std::vector<TrialRecord> rows;
    PoseErrorSummary summary;
};

struct EvaluateRequest {
    int trials = 10;
    std::uint64_t seed = 0;
    std::string method = "ours";   // "ours" | "icp"
    bool baseline_compare = false;  // also run single-candidate complete-template matching
};

/// Ensures outward-oriented normals on the template when absent; partials
/// and scans inherit them.
PointCloud prepare_template(const PointCloud& tmpl, const RunConfig& config);

/// Generates `trials` scans at uniformly random poses and registers each
/// with the requested method(s). Rows are ordered by trial index and fully
/// determined by the seed.
std::vector<MethodEvaluation> run_evaluation(const PointCloud& tmpl, const RunConfig& config,
                                             const EvaluateRequest& request);

/// CSV with a '#' comment header (version + resolved config), one row per
/// trial and a summary row per method.
std::string evaluation_csv(const RunConfig& config,
                           const std::vector<MethodEvaluation>& evaluations);

}  // namespace partreg
