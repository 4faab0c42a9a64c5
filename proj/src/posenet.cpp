#include "poseadapt/posenet.hpp"

#include <stdexcept>

namespace poseadapt {

void PoseNetConfig::validate() const {
    if (input_size < 4 || heatmap_size < 1)
        throw std::invalid_argument("PoseNetConfig: bad sizes");
    if (num_keypoints < 1)
        throw std::invalid_argument("PoseNetConfig: num_keypoints must be >= 1");
    if (encoder_channels.empty())
        throw std::invalid_argument("PoseNetConfig: encoder_channels empty");
    long s = input_size;
    for (size_t i = 0; i < encoder_channels.size(); ++i) {
        if (s % 2) throw std::invalid_argument("PoseNetConfig: input_size not divisible by encoder strides");
        s /= 2;
    }
    for (size_t i = 0; i < deconv_channels.size(); ++i) s *= 2;
    if (s != heatmap_size)
        throw std::invalid_argument(
            "PoseNetConfig: input_size / 2^encoder * 2^deconv != heatmap_size (got " +
            std::to_string(s) + ", want " + std::to_string(heatmap_size) + ")");
}

PoseNetConfig PoseNetConfig::desk(int num_keypoints) {
    PoseNetConfig c;
    c.num_keypoints = num_keypoints;
    return c;
}

PoseNetConfig PoseNetConfig::paper_shape(int num_keypoints) {
    PoseNetConfig c;
    c.preset = "paper-shape";
    c.num_keypoints = num_keypoints;
    c.encoder_channels = {64, 128, 256, 512, 512};
    c.deconv_channels = {256, 256, 256};
    return c;
}

void PoseNetConfig::apply_preset(const std::string& name) {
    if (name == "desk") {
        encoder_channels = {32, 64, 128, 256, 256};
        deconv_channels = {128, 64, 32};
    } else if (name == "paper-shape") {
        encoder_channels = {64, 128, 256, 512, 512};
        deconv_channels = {256, 256, 256};
    } else if (name != "custom") {
        throw std::invalid_argument("PoseNetConfig: unknown preset '" + name + "'");
    }
    preset = name;
}

PoseNet::PoseNet(const PoseNetConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    int in_ch = 3;
    for (size_t i = 0; i < cfg_.encoder_channels.size(); ++i) {
        const int oc = cfg_.encoder_channels[i];
        const std::string base = "enc" + std::to_string(i);
        net_.add(base + ".conv", std::make_unique<nn::Conv2d>(in_ch, oc, 3, 2, 1, false, rng));
        net_.add(base + ".bn", std::make_unique<nn::BatchNorm2d>(oc));
        net_.add(base + ".relu", std::make_unique<nn::ReLU>());
        in_ch = oc;
    }
    for (size_t i = 0; i < cfg_.deconv_channels.size(); ++i) {
        const int oc = cfg_.deconv_channels[i];
        const std::string base = "dec" + std::to_string(i);
        net_.add(base + ".deconv", std::make_unique<nn::ConvTranspose2d>(in_ch, oc, 4, 2, 1, false, rng));
        net_.add(base + ".bn", std::make_unique<nn::BatchNorm2d>(oc));
        net_.add(base + ".relu", std::make_unique<nn::ReLU>());
        in_ch = oc;
    }
    net_.add("head", std::make_unique<nn::Conv2d>(in_ch, cfg_.num_keypoints, 1, 1, 0, true, rng));
}

Tensor PoseNet::forward(const Tensor& batch, bool train) {
    if (batch.rank() != 4 || batch.dim(1) != 3 ||
        batch.dim(2) != cfg_.input_size || batch.dim(3) != cfg_.input_size)
        throw std::invalid_argument("PoseNet::forward: expected [B,3," +
                                    std::to_string(cfg_.input_size) + "," +
                                    std::to_string(cfg_.input_size) + "], got " +
                                    batch.shape_str());
    return net_.forward(batch, train);
}

Tensor PoseNet::backward(const Tensor& gheat) { return net_.backward(gheat); }

}  // namespace poseadapt
