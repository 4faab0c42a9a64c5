#pragma once

#include <string>
#include <vector>

#include "poseadapt/core/rng.hpp"
#include "poseadapt/nn/layers.hpp"

namespace poseadapt {

/// Encoder-deconvolution pose network configuration. Every entry of
/// encoder_channels is one stride-2 conv/BN/ReLU block; every entry of
/// deconv_channels is one stride-2 transposed-conv/BN/ReLU block; a 1x1 head
/// maps to K heatmap channels with no output activation.
struct PoseNetConfig {
    int input_size = 256;
    int heatmap_size = 64;
    int num_keypoints = 18;
    std::string preset = "desk";  // desk | paper-shape | custom
    std::vector<int> encoder_channels = {32, 64, 128, 256, 256};
    std::vector<int> deconv_channels = {128, 64, 32};

    void validate() const;
    static PoseNetConfig desk(int num_keypoints);
    static PoseNetConfig paper_shape(int num_keypoints);
    /// Applies the channel lists of a named preset, leaving sizes alone.
    void apply_preset(const std::string& name);
};

/// The pose model h. Holds the named-parameter state; student and teacher
/// are two instances sharing the same closed, ordered parameter set.
class PoseNet {
public:
    PoseNet(const PoseNetConfig& cfg, Rng& rng);

    /// [B,3,S,S] -> [B,K,H',W'] raw heatmaps (no output activation).
    /// Train mode updates normalization batch statistics and caches for
    /// backward; eval mode is read-only.
    Tensor forward(const Tensor& batch, bool train);

    /// Accumulates parameter gradients from the last train forward.
    Tensor backward(const Tensor& gheat);

    PoseNet clone() const { return *this; }

    std::vector<nn::ParamRef> params() { return net_.params(); }
    std::vector<nn::BufferRef> buffers() { return net_.buffers(); }
    void zero_grad() { net_.zero_grad(); }
    const PoseNetConfig& config() const { return cfg_; }

private:
    PoseNetConfig cfg_;
    nn::Net net_;
};

}  // namespace poseadapt
