#pragma once

#include <string>
#include <vector>

#include "poseadapt/data.hpp"
#include "poseadapt/heatmap.hpp"
#include "poseadapt/posenet.hpp"

namespace poseadapt {

struct PCKReport {
    double alpha = 0.05;
    double threshold_px = 0;  // alpha * max(image_w, image_h)
    std::vector<std::string> keypoint_names;
    std::vector<long> correct;  // per keypoint
    std::vector<long> total;
    std::vector<std::pair<std::string, double>> group_ratios;  // percent
    double overall = 0;  // percent, pooled over visible keypoints
};

/// A keypoint counts as correct iff its Euclidean distance to ground truth is
/// <= alpha * max(image_w, image_h); invisible ground-truth keypoints are
/// excluded from numerator and denominator.
PCKReport pck(const std::vector<KeypointAnnotation>& preds,
              const std::vector<KeypointAnnotation>& gts,
              double alpha, int image_w, int image_h,
              const KeypointSchema& schema);

/// Eval-mode forward -> decode -> pck over the given sample indices, with
/// ground truth supplied separately (held-out annotations for target data).
PCKReport evaluate_model(PoseNet& model, const PoseDataset& ds,
                         const std::vector<size_t>& indices,
                         const std::vector<KeypointAnnotation>& gts,
                         double alpha, int batch_size = 16);

/// Per-group columns plus All, one decimal place; plain table or CSV.
std::string render_report(const PCKReport& report, bool csv);

}  // namespace poseadapt
