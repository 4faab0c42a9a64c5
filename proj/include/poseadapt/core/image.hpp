#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poseadapt/core/tensor.hpp"

namespace poseadapt {

/// 8-bit RGB image, row-major HWC.
struct Image8 {
    int w = 0, h = 0;
    std::vector<uint8_t> rgb;
};

Image8 read_png(const std::string& path);
void write_png(const std::string& path, const Image8& img);

/// [3,H,W] tensor in [0,1].
Tensor image_to_tensor(const Image8& img);

/// Clamps to [0,1] and quantizes.
Image8 tensor_to_image(const Tensor& t);

Tensor resize_bilinear(const Tensor& img, int out_w, int out_h);

void clamp01(Tensor& t);

}  // namespace poseadapt
