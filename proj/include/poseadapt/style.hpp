#pragma once

#include <functional>
#include <string>
#include <vector>

#include "poseadapt/core/rng.hpp"
#include "poseadapt/core/tensor.hpp"
#include "poseadapt/nn/layers.hpp"

namespace poseadapt {

struct StyleModelConfig {
    int image_size = 256;
    std::vector<int> encoder_channels = {16, 32, 64, 128};  // stride-2 conv+relu stages
    std::vector<int> decoder_channels = {64, 32, 16, 16};   // conv+relu+up2 blocks
    real eps = 1e-5;
    // pretraining schedule
    int autoencoder_steps = 300;  // joint f+g reconstruction warmup
    int steps = 500;              // generator training against AdaIN targets
    int batch_size = 8;
    real lr = 1e-4;
    real style_weight = 0.1;
    uint64_t seed = 0;

    void validate() const;
};

/// Per-channel statistic matching: out = sigma_s * (c - mu_c)/sigma_c + mu_s,
/// with eps-stabilised sigma. Inputs [B,C,H,W]; style spatial size may differ.
Tensor adain(const Tensor& content, const Tensor& style, real eps = 1e-5);

/// AdaIN style-transfer model: frozen encoder f after pretraining, trained
/// generator g.
class StyleModel {
public:
    StyleModel(const StyleModelConfig& cfg, Rng& rng);

    /// Deepest encoder features, eval mode.
    Tensor encode(const Tensor& batch) const;

    /// alpha-interpolated decoder input of Eq-style transfer:
    /// alpha * adain(f(c), f(s)) + (1 - alpha) * f(c).
    Tensor stylize_features(const Tensor& content, const Tensor& style, real alpha) const;

    /// Full transfer: decodes the interpolated feature, clamped to [0,1].
    /// Single images [3,H,W] at the model resolution.
    Tensor stylize(const Tensor& content_img, const Tensor& style_img, real alpha) const;

    const StyleModelConfig& config() const { return cfg_; }

    void save(const std::string& path) const;
    static StyleModel load(const std::string& path);

    // pretraining internals / tests
    nn::Net& encoder() { return enc_; }
    nn::Net& decoder() { return dec_; }
    const nn::Net& encoder() const { return enc_; }
    std::vector<std::string> tap_names() const;

private:
    StyleModelConfig cfg_;
    nn::Net enc_, dec_;
};

struct ImagePool {
    std::function<Tensor(size_t)> get;
    size_t size = 0;
};

struct StylePretrainRecord {
    real content = 0, style = 0, total = 0;
};

/// Trains the style model bidirectionally: each batch draws content and style
/// roles uniformly from either domain. Stage one trains encoder and generator
/// jointly on pixel reconstruction; stage two freezes the encoder and trains
/// the generator on the content loss plus style_weight times the style loss
/// (per-stage mean/std matching). loss_log receives one record per stage-two
/// step.
StyleModel style_pretrain(const ImagePool& source, const ImagePool& target,
                          const StyleModelConfig& cfg,
                          std::vector<StylePretrainRecord>* loss_log = nullptr);

/// With probability prob, stylizes img against a random pool image with
/// alpha ~ U(0,1). Empty pool returns img unchanged and bumps
/// diagnostics().empty_style_pool.
Tensor maybe_stylize(const Tensor& img, const ImagePool& style_pool, Rng& rng,
                     real prob, const StyleModel& model, bool* stylized = nullptr);

}  // namespace poseadapt
