#pragma once

#include "poseadapt/core/tensor.hpp"

// Serial reference implementations of the hot kernels. Loop nests follow the
// same per-element accumulation order as the OpenMP versions, so the two must
// agree bitwise; the unit tests and tools/bench_kernels rely on that.

namespace poseadapt::ref {

void conv2d_forward(const real* in, int B, int IC, int H, int W,
                    const real* w, int OC, int KH, int KW,
                    const real* bias, int stride, int pad, real* out);

void conv2d_backward_input(const real* gout, int B, int IC, int H, int W,
                           const real* w, int OC, int KH, int KW,
                           int stride, int pad, real* gin);

void conv2d_backward_weights(const real* gout, const real* in,
                             int B, int IC, int H, int W,
                             int OC, int KH, int KW, int stride, int pad,
                             real* gw, real* gbias);

void convt2d_forward(const real* in, int B, int IC, int H, int W,
                     const real* w, int OC, int KH, int KW,
                     const real* bias, int stride, int pad, real* out);

void bn2d_forward_train(const real* in, int B, int C, int H, int W,
                        const real* gamma, const real* beta, real eps,
                        real momentum, real* running_mean, real* running_var,
                        real* save_mean, real* save_invstd, real* out);

void bn2d_backward(const real* gout, const real* in, int B, int C, int H, int W,
                   const real* gamma, const real* save_mean,
                   const real* save_invstd, real* gin, real* ggamma, real* gbeta);

void warp_bilinear_forward(const real* in, int C, int H, int W,
                           const double m[6], real* out);

real masked_sq_sum(const real* pred, const real* target, const unsigned char* mask,
                   int K, long cells, long* kept_channels);

void channel_stats(const real* in, int B, int C, long cells, real eps,
                   real* mean, real* stdv);

}  // namespace poseadapt::ref
