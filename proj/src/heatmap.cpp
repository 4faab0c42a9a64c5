#include "poseadapt/heatmap.hpp"

#include <cmath>
#include <stdexcept>

#include "poseadapt/core/diagnostics.hpp"
#include "poseadapt/core/parallel.hpp"
#include "poseadapt/kernels/kernels.hpp"

namespace poseadapt {

void GaussianSpec::validate() const {
    if (sigma <= 0) throw std::invalid_argument("GaussianSpec: sigma must be positive");
    if (truncation_radius < 3 * sigma)
        throw std::invalid_argument("GaussianSpec: truncation_radius must be >= 3*sigma");
}

GeneratedHeatmap generate_heatmap(const KeypointAnnotation& ann,
                                  int image_w, int image_h,
                                  int heatmap_w, int heatmap_h,
                                  const GaussianSpec& spec) {
    spec.validate();
    const int K = ann.num_keypoints();
    if (K < 1) throw std::invalid_argument("generate_heatmap: K must be >= 1");
    if (static_cast<int>(ann.visible.size()) != K)
        throw std::invalid_argument("generate_heatmap: visibility size mismatch");

    GeneratedHeatmap out;
    out.map = Tensor({K, heatmap_h, heatmap_w});
    out.channel_mask.assign(static_cast<size_t>(K), 0);

    const double sx = static_cast<double>(heatmap_w) / image_w;
    const double sy = static_cast<double>(heatmap_h) / image_h;
    const long cells = static_cast<long>(heatmap_h) * heatmap_w;

    for (int k = 0; k < K; ++k) {
        if (!ann.visible[static_cast<size_t>(k)]) continue;
        const int cx = static_cast<int>(std::floor(ann.coords[static_cast<size_t>(k)].first * sx + 0.5));
        const int cy = static_cast<int>(std::floor(ann.coords[static_cast<size_t>(k)].second * sy + 0.5));
        if (cx < 0 || cx >= heatmap_w || cy < 0 || cy >= heatmap_h) {
            diagnostics().keypoint_out_of_bounds++;
            continue;  // all-zero channel, mask stays cleared
        }
        kern::gaussian_stamp(out.map.data() + static_cast<long>(k) * cells,
                             heatmap_h, heatmap_w, cx, cy,
                             spec.sigma, spec.truncation_radius);
        out.channel_mask[static_cast<size_t>(k)] = 1;
    }
    return out;
}

std::vector<std::pair<int, int>> heatmap_argmax(const Heatmap& h) {
    const int K = h.dim(0), H = h.dim(1), W = h.dim(2);
    const long cells = static_cast<long>(H) * W;
    std::vector<std::pair<int, int>> peaks(static_cast<size_t>(K));
    parallel_for(K, [&](long k) {
        const real* src = h.data() + k * cells;
        long best = 0;
        for (long i = 1; i < cells; ++i)
            if (src[i] > src[best]) best = i;
        peaks[static_cast<size_t>(k)] = {static_cast<int>(best % W),
                                         static_cast<int>(best / W)};
    });
    return peaks;
}

KeypointAnnotation decode_heatmap(const Heatmap& h, int image_w, int image_h) {
    const int K = h.dim(0), H = h.dim(1), W = h.dim(2);
    const double sx = static_cast<double>(image_w) / W;
    const double sy = static_cast<double>(image_h) / H;
    const auto peaks = heatmap_argmax(h);
    KeypointAnnotation ann;
    ann.coords.resize(static_cast<size_t>(K));
    ann.visible.assign(static_cast<size_t>(K), 1);
    for (int k = 0; k < K; ++k) {
        ann.coords[static_cast<size_t>(k)] = {peaks[static_cast<size_t>(k)].first * sx,
                                              peaks[static_cast<size_t>(k)].second * sy};
    }
    return ann;
}

NormalizedHeatmap normalize_heatmap(const Heatmap& h, const GaussianSpec& spec) {
    spec.validate();
    const int K = h.dim(0), H = h.dim(1), W = h.dim(2);
    const long cells = static_cast<long>(H) * W;
    const auto peaks = heatmap_argmax(h);

    NormalizedHeatmap out;
    out.map = Tensor({K, H, W});
    out.confidences.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        const auto [cx, cy] = peaks[static_cast<size_t>(k)];
        out.confidences[static_cast<size_t>(k)] =
            h.data()[k * cells + static_cast<long>(cy) * W + cx];
        kern::gaussian_stamp(out.map.data() + static_cast<long>(k) * cells,
                             H, W, cx, cy, spec.sigma, spec.truncation_radius);
    }
    return out;
}

real mse_heatmap_loss(const Heatmap& pred, const Heatmap& target,
                      const std::vector<uint8_t>& channel_mask) {
    check_same_shape(pred, target, "mse_heatmap_loss");
    const int K = pred.dim(0);
    if (static_cast<int>(channel_mask.size()) != K)
        throw std::invalid_argument("mse_heatmap_loss: mask size mismatch");
    const long cells = static_cast<long>(pred.dim(1)) * pred.dim(2);
    long kept = 0;
    const real sum = kern::masked_sq_sum(pred.data(), target.data(),
                                         channel_mask.data(), K, cells, &kept);
    if (kept == 0) {
        diagnostics().all_channels_masked++;
        return real(0);
    }
    return sum / (static_cast<real>(kept) * static_cast<real>(cells));
}

real gaussian_channel_mean(const GaussianSpec& spec, int heatmap_w, int heatmap_h) {
    spec.validate();
    const int R = spec.truncation_radius;
    const real inv2s2 = real(1) / (2 * spec.sigma * spec.sigma);
    real mass = 0;
    for (int r = -R; r <= R; ++r)
        for (int c = -R; c <= R; ++c)
            mass += std::exp(-static_cast<real>(c * c + r * r) * inv2s2);
    return mass / (static_cast<real>(heatmap_w) * static_cast<real>(heatmap_h));
}

}  // namespace poseadapt
