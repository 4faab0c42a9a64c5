#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "poseadapt/core/tensor.hpp"

namespace poseadapt {

/// K 2D keypoints in pixel units of the input image, with visibility flags.
struct KeypointAnnotation {
    std::vector<std::pair<double, double>> coords;  // (x, y)
    std::vector<uint8_t> visible;

    int num_keypoints() const { return static_cast<int>(coords.size()); }
};

/// Gaussian rendering parameters, in heatmap-grid pixels.
struct GaussianSpec {
    real sigma = 2.0;
    int truncation_radius = 6;

    void validate() const;
};

/// Heatmaps are [K, H', W'] tensors; ground-truth and normalized maps carry a
/// unit-amplitude Gaussian per visible keypoint.
using Heatmap = Tensor;

struct GeneratedHeatmap {
    Heatmap map;
    // visible and in-bounds after scaling; channels failing either are
    // all-zero and excluded from losses
    std::vector<uint8_t> channel_mask;
};

struct NormalizedHeatmap {
    Heatmap map;
    std::vector<real> confidences;  // per-channel max activation of the input
};

/// Renders one unit-amplitude Gaussian per visible keypoint. Keypoint
/// coordinates are in image pixels and are scaled by heatmap/image size onto
/// the grid. Keypoints mapping outside the grid give an all-zero channel and
/// a cleared mask entry.
GeneratedHeatmap generate_heatmap(const KeypointAnnotation& ann,
                                  int image_w, int image_h,
                                  int heatmap_w, int heatmap_h,
                                  const GaussianSpec& spec);

/// Per-channel argmax, ties broken by smallest row-major index, rescaled back
/// to image pixel units. Returned visibility is all-true.
KeypointAnnotation decode_heatmap(const Heatmap& h, int image_w, int image_h);

/// Per-channel grid argmax (x, y), same tie rule as decode_heatmap.
std::vector<std::pair<int, int>> heatmap_argmax(const Heatmap& h);

/// Regenerates a canonical unit Gaussian at each channel's argmax and reports
/// the input's max activation per channel as the confidence.
NormalizedHeatmap normalize_heatmap(const Heatmap& h, const GaussianSpec& spec);

/// Mean of squared differences over unmasked channels' cells. All channels
/// masked returns 0 and bumps diagnostics().all_channels_masked.
real mse_heatmap_loss(const Heatmap& pred, const Heatmap& target,
                      const std::vector<uint8_t>& channel_mask);

/// Mass of a full (unclipped) Gaussian stamp divided by the grid cell count:
/// the constant that every in-interior normalized channel's mean activation
/// equals.
real gaussian_channel_mean(const GaussianSpec& spec, int heatmap_w, int heatmap_h);

}  // namespace poseadapt
