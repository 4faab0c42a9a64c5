#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "poseadapt/core/rng.hpp"
#include "poseadapt/core/tensor.hpp"
#include "poseadapt/heatmap.hpp"

namespace poseadapt {

/// Invertible affine map about the image centre: rotation, shear and scale
/// composed linearly, plus translation in image-size fractions. Acts forward
/// on coordinates/images and backward on heatmaps.
struct GeometricTransform {
    double rotation_deg = 0.0;
    double translate_x = 0.0;  // fraction of width
    double translate_y = 0.0;  // fraction of height
    double scale = 1.0;
    double shear_deg = 0.0;
    int width = 0, height = 0;

    // row-major [a b c; d e f]: maps (x, y) -> (a x + b y + c, d x + e y + f)
    std::array<double, 6> matrix() const;
    std::array<double, 6> inverse_matrix() const;

    std::pair<double, double> apply(double x, double y) const;
    std::pair<double, double> apply_inverse(double x, double y) const;

    bool is_identity() const {
        return rotation_deg == 0 && translate_x == 0 && translate_y == 0 &&
               scale == 1.0 && shear_deg == 0;
    }
};

/// Conjugates an affine map from image coordinates onto a grid scaled by
/// (gx, gy) = (grid_w/image_w, grid_h/image_h).
std::array<double, 6> affine_to_grid(const std::array<double, 6>& m,
                                     double gx, double gy);

std::array<double, 6> affine_invert(const std::array<double, 6>& m);

/// Per-channel gain plus brightness offset; never touches heatmaps or
/// keypoint coordinates.
struct PhotometricParams {
    std::array<double, 3> gain{1.0, 1.0, 1.0};
    double brightness = 0.0;

    bool is_identity() const {
        return gain[0] == 1 && gain[1] == 1 && gain[2] == 1 && brightness == 0;
    }
};

struct AugmentConfig {
    bool rotation = false, translation = false, scale = false, color = false, shear = false;
    std::array<double, 2> rotation_range{-30.0, 30.0};      // degrees
    std::array<double, 2> translation_range{-0.05, 0.05};   // fraction of size
    std::array<double, 2> scale_range{0.8, 1.2};
    std::array<double, 2> shear_range{-10.0, 10.0};
    double color_strength = 0.25;

    void validate() const;
    static AugmentConfig all_enabled();
};

struct OcclusionPolicy {
    double tau_occ = 0.9;
    int patch_h = 20, patch_w = 20;
    double occlude_prob = 0.5;

    void validate(int image_w, int image_h) const;
};

/// Draws transform parameters uniformly from the enabled ranges; disabled
/// components stay at identity.
std::pair<GeometricTransform, PhotometricParams>
sample_augmentation(Rng& rng, const AugmentConfig& cfg, int image_w, int image_h);

/// Affine warp with bilinear sampling and zero fill, then photometric jitter.
Tensor apply_to_image(const GeometricTransform& t, const PhotometricParams& p,
                      const Tensor& img);

/// Warps each channel by the inverse affine (scaled onto the heatmap grid).
/// The photometric component never applies to heatmaps.
Heatmap apply_inverse_to_heatmap(const GeometricTransform& t, const Heatmap& h);

/// Forward warp on a heatmap; test helper for round trips.
Heatmap apply_forward_to_heatmap(const GeometricTransform& t, const Heatmap& h);

struct OcclusionResult {
    Tensor image;
    std::vector<uint8_t> occluded;
};

/// Keypoints whose raw teacher max activation exceeds tau_occ are occluded
/// with probability occlude_prob by a patch copied from a random position in
/// the same image, pasted centred on the keypoint's image-space location.
/// coord_map (optional) remaps decoded image coordinates into the frame of
/// `img` (used when teacher and student branches carry different transforms).
OcclusionResult adaptive_occlusion(const Tensor& img, const Heatmap& teacher_heatmap,
                                   const OcclusionPolicy& policy, Rng& rng,
                                   const std::array<double, 6>* coord_map = nullptr);

}  // namespace poseadapt
