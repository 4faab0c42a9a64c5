#include "poseadapt/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "poseadapt/core/parallel.hpp"

namespace poseadapt::nn {

Adam::Adam(const std::vector<ParamRef>& params, real lr,
           real beta1, real beta2, real eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
        m_.push_back(Tensor::zeros_like(*p.value));
        v_.push_back(Tensor::zeros_like(*p.value));
    }
}

void Adam::step(const std::vector<ParamRef>& params) {
    if (params.size() != m_.size())
        throw std::invalid_argument("Adam: parameter set changed size");
    ++t_;
    const real bc1 = real(1) - std::pow(beta1_, static_cast<real>(t_));
    const real bc2 = real(1) - std::pow(beta2_, static_cast<real>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& th = *params[i].value;
        const Tensor& g = *params[i].grad;
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        const real lr = lr_, b1 = beta1_, b2 = beta2_, eps = eps_;
        parallel_for(th.size(), [&](long j) {
            m[j] = b1 * m[j] + (real(1) - b1) * g[j];
            v[j] = b2 * v[j] + (real(1) - b2) * g[j] * g[j];
            const real mhat = m[j] / bc1;
            const real vhat = v[j] / bc2;
            th[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        });
    }
}

}  // namespace poseadapt::nn
