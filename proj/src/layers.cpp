#include "poseadapt/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "poseadapt/kernels/kernels.hpp"

namespace poseadapt::nn {

void he_init(Tensor& w, int fan_in, Rng& rng) {
    const real sd = std::sqrt(real(2) / static_cast<real>(fan_in));
    for (long i = 0; i < w.size(); ++i) w[i] = static_cast<real>(rng.normal(0.0, sd));
}

// ---- Conv2d ----

Conv2d::Conv2d(int in_ch_, int out_ch_, int ksize_, int stride_, int pad_, bool bias_, Rng& rng)
    : w({out_ch_, in_ch_, ksize_, ksize_}),
      gw({out_ch_, in_ch_, ksize_, ksize_}),
      in_ch(in_ch_), out_ch(out_ch_), ksize(ksize_), stride(stride_), pad(pad_),
      has_bias(bias_) {
    he_init(w, in_ch * ksize * ksize, rng);
    if (has_bias) {
        b = Tensor({out_ch});
        gb = Tensor({out_ch});
    }
}

Tensor Conv2d::forward(const Tensor& x, bool train) {
    if (x.rank() != 4 || x.dim(1) != in_ch)
        throw std::invalid_argument("Conv2d: bad input shape " + x.shape_str());
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int OH = (H + 2 * pad - ksize) / stride + 1;
    const int OW = (W + 2 * pad - ksize) / stride + 1;
    Tensor y({B, out_ch, OH, OW});
    kern::conv2d_forward(x.data(), B, in_ch, H, W, w.data(), out_ch, ksize, ksize,
                         has_bias ? b.data() : nullptr, stride, pad, y.data());
    if (train) cache_in_ = x;
    return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
    const Tensor& x = cache_in_;
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    kern::conv2d_backward_weights(gy.data(), x.data(), B, in_ch, H, W,
                                  out_ch, ksize, ksize, stride, pad,
                                  gw.data(), has_bias ? gb.data() : nullptr);
    Tensor gx({B, in_ch, H, W});
    kern::conv2d_backward_input(gy.data(), B, in_ch, H, W, w.data(),
                                out_ch, ksize, ksize, stride, pad, gx.data());
    return gx;
}

void Conv2d::collect(const std::string& prefix, std::vector<ParamRef>* params,
                     std::vector<BufferRef>* buffers) {
    (void)buffers;
    if (!params) return;
    params->push_back({prefix + ".w", &w, &gw});
    if (has_bias) params->push_back({prefix + ".b", &b, &gb});
}

// ---- ConvTranspose2d ----

ConvTranspose2d::ConvTranspose2d(int in_ch_, int out_ch_, int ksize_, int stride_, int pad_,
                                 bool bias_, Rng& rng)
    : w({in_ch_, out_ch_, ksize_, ksize_}),
      gw({in_ch_, out_ch_, ksize_, ksize_}),
      in_ch(in_ch_), out_ch(out_ch_), ksize(ksize_), stride(stride_), pad(pad_),
      has_bias(bias_) {
    he_init(w, in_ch * ksize * ksize, rng);
    if (has_bias) {
        b = Tensor({out_ch});
        gb = Tensor({out_ch});
    }
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool train) {
    if (x.rank() != 4 || x.dim(1) != in_ch)
        throw std::invalid_argument("ConvTranspose2d: bad input shape " + x.shape_str());
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int OH = (H - 1) * stride - 2 * pad + ksize;
    const int OW = (W - 1) * stride - 2 * pad + ksize;
    Tensor y({B, out_ch, OH, OW});
    kern::convt2d_forward(x.data(), B, in_ch, H, W, w.data(), out_ch, ksize, ksize,
                          has_bias ? b.data() : nullptr, stride, pad, y.data());
    if (train) cache_in_ = x;
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& gy) {
    const Tensor& x = cache_in_;
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    kern::convt2d_backward_weights(gy.data(), x.data(), B, in_ch, H, W,
                                   out_ch, ksize, ksize, stride, pad,
                                   gw.data(), has_bias ? gb.data() : nullptr);
    Tensor gx({B, in_ch, H, W});
    kern::convt2d_backward_input(gy.data(), B, in_ch, H, W, w.data(),
                                 out_ch, ksize, ksize, stride, pad, gx.data());
    return gx;
}

void ConvTranspose2d::collect(const std::string& prefix, std::vector<ParamRef>* params,
                              std::vector<BufferRef>* buffers) {
    (void)buffers;
    if (!params) return;
    params->push_back({prefix + ".w", &w, &gw});
    if (has_bias) params->push_back({prefix + ".b", &b, &gb});
}

// ---- BatchNorm2d ----

BatchNorm2d::BatchNorm2d(int channels_, real eps_, real momentum_)
    : gamma({channels_}), beta({channels_}), ggamma({channels_}), gbeta({channels_}),
      running_mean({channels_}), running_var({channels_}),
      channels(channels_), eps(eps_), momentum(momentum_) {
    gamma.fill(1);
    running_var.fill(1);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
    if (x.rank() != 4 || x.dim(1) != channels)
        throw std::invalid_argument("BatchNorm2d: bad input shape " + x.shape_str());
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    Tensor y({B, channels, H, W});
    if (train) {
        save_mean_ = Tensor({channels});
        save_invstd_ = Tensor({channels});
        kern::bn2d_forward_train(x.data(), B, channels, H, W, gamma.data(), beta.data(),
                                 eps, momentum, running_mean.data(), running_var.data(),
                                 save_mean_.data(), save_invstd_.data(), y.data());
        cache_in_ = x;
    } else {
        kern::bn2d_forward_eval(x.data(), B, channels, H, W, gamma.data(), beta.data(),
                                eps, running_mean.data(), running_var.data(), y.data());
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& gy) {
    const Tensor& x = cache_in_;
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    Tensor gx({B, channels, H, W});
    kern::bn2d_backward(gy.data(), x.data(), B, channels, H, W, gamma.data(),
                        save_mean_.data(), save_invstd_.data(),
                        gx.data(), ggamma.data(), gbeta.data());
    return gx;
}

void BatchNorm2d::collect(const std::string& prefix, std::vector<ParamRef>* params,
                          std::vector<BufferRef>* buffers) {
    if (params) {
        params->push_back({prefix + ".gamma", &gamma, &ggamma});
        params->push_back({prefix + ".beta", &beta, &gbeta});
    }
    if (buffers) {
        buffers->push_back({prefix + ".running_mean", &running_mean});
        buffers->push_back({prefix + ".running_var", &running_var});
    }
}

// ---- ReLU ----

Tensor ReLU::forward(const Tensor& x, bool train) {
    Tensor y = Tensor::zeros_like(x);
    kern::relu_forward(x.data(), x.size(), y.data());
    if (train) cache_in_ = x;
    return y;
}

Tensor ReLU::backward(const Tensor& gy) {
    Tensor gx = Tensor::zeros_like(gy);
    kern::relu_backward(gy.data(), cache_in_.data(), gy.size(), gx.data());
    return gx;
}

// ---- Upsample2x ----

Tensor Upsample2x::forward(const Tensor& x, bool train) {
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    Tensor y({B, C, 2 * H, 2 * W});
    kern::upsample2x_forward(x.data(), B, C, H, W, y.data());
    if (train) {
        in_h_ = H;
        in_w_ = W;
    }
    return y;
}

Tensor Upsample2x::backward(const Tensor& gy) {
    const int B = gy.dim(0), C = gy.dim(1);
    Tensor gx({B, C, in_h_, in_w_});
    kern::upsample2x_backward(gy.data(), B, C, in_h_, in_w_, gx.data());
    return gx;
}

// ---- Net ----

Net::Net(const Net& o) {
    layers_.reserve(o.layers_.size());
    for (const auto& [name, layer] : o.layers_)
        layers_.emplace_back(name, layer->clone());
}

Net& Net::operator=(const Net& o) {
    if (this == &o) return *this;
    layers_.clear();
    layers_.reserve(o.layers_.size());
    for (const auto& [name, layer] : o.layers_)
        layers_.emplace_back(name, layer->clone());
    return *this;
}

void Net::add(std::string name, std::unique_ptr<Layer> layer) {
    layers_.emplace_back(std::move(name), std::move(layer));
}

Tensor Net::forward(const Tensor& x, bool train) {
    Tensor h = x;
    for (auto& [name, layer] : layers_) h = layer->forward(h, train);
    return h;
}

Tensor Net::forward_taps(const Tensor& x, bool train,
                         const std::vector<std::string>& tap_names,
                         std::vector<Tensor>* taps) {
    if (taps) taps->assign(tap_names.size(), Tensor());
    Tensor h = x;
    for (auto& [name, layer] : layers_) {
        h = layer->forward(h, train);
        if (!taps) continue;
        for (size_t i = 0; i < tap_names.size(); ++i)
            if (tap_names[i] == name) (*taps)[i] = h;
    }
    return h;
}

Tensor Net::backward(Tensor gy) {
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
        gy = it->second->backward(gy);
    return gy;
}

Tensor Net::backward_with_taps(Tensor gy, const std::vector<std::string>& tap_names,
                               const std::vector<Tensor>& tap_grads) {
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        for (size_t i = 0; i < tap_names.size(); ++i) {
            if (tap_names[i] != it->first) continue;
            const Tensor& extra = tap_grads[i];
            if (extra.empty()) continue;
            check_same_shape(gy, extra, "Net::backward_with_taps");
            for (long j = 0; j < gy.size(); ++j) gy[j] += extra[j];
        }
        gy = it->second->backward(gy);
    }
    return gy;
}

std::vector<ParamRef> Net::params() {
    std::vector<ParamRef> out;
    for (auto& [name, layer] : layers_) layer->collect(name, &out, nullptr);
    return out;
}

std::vector<BufferRef> Net::buffers() {
    std::vector<BufferRef> out;
    std::vector<ParamRef> ignore;
    for (auto& [name, layer] : layers_) layer->collect(name, nullptr, &out);
    return out;
}

void Net::zero_grad() {
    for (auto& p : params()) p.grad->zero();
}

}  // namespace poseadapt::nn
