#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "poseadapt/core/rng.hpp"
#include "poseadapt/core/tensor.hpp"

namespace poseadapt::nn {

struct ParamRef {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

struct BufferRef {
    std::string name;
    Tensor* value;
};

/// Layers cache what backward needs only on train-mode forwards; eval-mode
/// forward is const over the layer state (batch-norm running statistics
/// excepted in train mode) and safe to run concurrently.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool train) = 0;
    /// Consumes the cache of the last train-mode forward; accumulates into
    /// parameter grads and returns the input gradient.
    virtual Tensor backward(const Tensor& gy) = 0;
    virtual void collect(const std::string& prefix, std::vector<ParamRef>* params,
                         std::vector<BufferRef>* buffers) {
        (void)prefix;
        (void)params;
        (void)buffers;
    }
    virtual std::unique_ptr<Layer> clone() const = 0;
};

class Conv2d final : public Layer {
public:
    Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad, bool bias, Rng& rng);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix, std::vector<ParamRef>* params,
                 std::vector<BufferRef>* buffers) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

    Tensor w, b, gw, gb;
    int in_ch, out_ch, ksize, stride, pad;
    bool has_bias;

private:
    Tensor cache_in_;
};

class ConvTranspose2d final : public Layer {
public:
    ConvTranspose2d(int in_ch, int out_ch, int ksize, int stride, int pad, bool bias, Rng& rng);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix, std::vector<ParamRef>* params,
                 std::vector<BufferRef>* buffers) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ConvTranspose2d>(*this); }

    Tensor w, b, gw, gb;
    int in_ch, out_ch, ksize, stride, pad;
    bool has_bias;

private:
    Tensor cache_in_;
};

class BatchNorm2d final : public Layer {
public:
    explicit BatchNorm2d(int channels, real eps = 1e-5, real momentum = 0.1);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix, std::vector<ParamRef>* params,
                 std::vector<BufferRef>* buffers) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm2d>(*this); }

    Tensor gamma, beta, ggamma, gbeta;
    Tensor running_mean, running_var;
    int channels;
    real eps, momentum;

private:
    Tensor cache_in_, save_mean_, save_invstd_;
};

class ReLU final : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(*this); }

private:
    Tensor cache_in_;
};

class Upsample2x final : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Upsample2x>(*this); }

private:
    int in_h_ = 0, in_w_ = 0;
};

/// Named sequential container. Taps name layers whose *outputs* are exposed
/// to auxiliary losses; backward_with_taps folds the extra gradients in at
/// the matching points.
class Net {
public:
    Net() = default;
    Net(const Net& o);
    Net& operator=(const Net& o);
    Net(Net&&) = default;
    Net& operator=(Net&&) = default;

    void add(std::string name, std::unique_ptr<Layer> layer);

    Tensor forward(const Tensor& x, bool train);
    Tensor forward_taps(const Tensor& x, bool train,
                        const std::vector<std::string>& tap_names,
                        std::vector<Tensor>* taps);
    Tensor backward(Tensor gy);
    Tensor backward_with_taps(Tensor gy, const std::vector<std::string>& tap_names,
                              const std::vector<Tensor>& tap_grads);

    std::vector<ParamRef> params();
    std::vector<BufferRef> buffers();
    void zero_grad();
    size_t num_layers() const { return layers_.size(); }

private:
    std::vector<std::pair<std::string, std::unique_ptr<Layer>>> layers_;
};

/// He-normal initialisation helper.
void he_init(Tensor& w, int fan_in, Rng& rng);

}  // namespace poseadapt::nn
