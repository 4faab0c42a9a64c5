#pragma once

#include <vector>

#include "poseadapt/nn/layers.hpp"

namespace poseadapt::nn {

/// Adaptive-moment optimizer, weight decay 0.
class Adam {
public:
    Adam(const std::vector<ParamRef>& params, real lr,
         real beta1 = 0.9, real beta2 = 0.999, real eps = 1e-8);

    void step(const std::vector<ParamRef>& params);

    void set_lr(real lr) { lr_ = lr; }
    real lr() const { return lr_; }
    long steps_taken() const { return t_; }

    // checkpoint access
    std::vector<Tensor>& moment1() { return m_; }
    std::vector<Tensor>& moment2() { return v_; }
    void set_steps_taken(long t) { t_ = t; }

private:
    real lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace poseadapt::nn
