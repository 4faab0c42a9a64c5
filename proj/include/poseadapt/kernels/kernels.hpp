#pragma once

#include "poseadapt/core/tensor.hpp"

// OpenMP-parallel numeric kernels. Parallelism is always over independent
// output elements (or whole channels), with a fixed serial accumulation
// order per element, so every kernel is bit-deterministic regardless of
// OMP_NUM_THREADS. Serial twins with identical accumulation order live in
// reference.hpp and are compared bitwise by the tests and the benchmark.

namespace poseadapt::kern {

// in [B,IC,H,W], w [OC,IC,KH,KW], bias [OC] or null, out [B,OC,OH,OW]
// OH = (H + 2*pad - KH)/stride + 1
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

// Transposed convolution. in [B,IC,H,W], w [IC,OC,KH,KW], out [B,OC,OH,OW]
// OH = (H - 1)*stride - 2*pad + KH
void convt2d_forward(const real* in, int B, int IC, int H, int W,
                     const real* w, int OC, int KH, int KW,
                     const real* bias, int stride, int pad, real* out);

void convt2d_backward_input(const real* gout, int B, int IC, int H, int W,
                            const real* w, int OC, int KH, int KW,
                            int stride, int pad, real* gin);

void convt2d_backward_weights(const real* gout, const real* in,
                              int B, int IC, int H, int W,
                              int OC, int KH, int KW, int stride, int pad,
                              real* gw, real* gbias);

void relu_forward(const real* in, long n, real* out);
void relu_backward(const real* gout, const real* in, long n, real* gin);

// Batch statistics over (B,H,W) per channel; biased variance.
// save_mean/save_invstd [C] are filled for the backward pass; running stats
// are updated in place with the given momentum.
void bn2d_forward_train(const real* in, int B, int C, int H, int W,
                        const real* gamma, const real* beta, real eps,
                        real momentum, real* running_mean, real* running_var,
                        real* save_mean, real* save_invstd, real* out);

void bn2d_forward_eval(const real* in, int B, int C, int H, int W,
                       const real* gamma, const real* beta, real eps,
                       const real* running_mean, const real* running_var,
                       real* out);

void bn2d_backward(const real* gout, const real* in, int B, int C, int H, int W,
                   const real* gamma, const real* save_mean,
                   const real* save_invstd, real* gin, real* ggamma, real* gbeta);

// Nearest-neighbour 2x upsampling.
void upsample2x_forward(const real* in, int B, int C, int H, int W, real* out);
void upsample2x_backward(const real* gout, int B, int C, int H, int W, real* gin);

// Affine bilinear warp of C channels of size HxW. m maps output (x,y) to
// input coordinates: xs = m[0]*x + m[1]*y + m[2], ys = m[3]*x + m[4]*y + m[5].
// Samples outside the input are zero.
void warp_bilinear_forward(const real* in, int C, int H, int W,
                           const double m[6], real* out);

void warp_bilinear_backward(const real* gout, int C, int H, int W,
                            const double m[6], real* gin);

// Unit-amplitude Gaussian stamp centred on integer grid cell (cx, cy),
// written over a square window of Chebyshev radius trunc; the channel is
// zeroed first.
void gaussian_stamp(real* channel, int H, int W, int cx, int cy,
                    real sigma, int trunc);

// Sum of squared differences over unmasked channels. pred/target [K,HW]
// flattened per channel; mask[k] != 0 keeps channel k. Returns the raw sum;
// kept_channels receives the number of unmasked channels.
real masked_sq_sum(const real* pred, const real* target, const unsigned char* mask,
                   int K, long cells, long* kept_channels);

// gpred += scale * 2 * (pred - target) on unmasked channels.
void masked_mse_backward(const real* pred, const real* target,
                         const unsigned char* mask, int K, long cells,
                         real scale, real* gpred);

// Per-(batch, channel) spatial mean and eps-stabilised std (biased variance).
void channel_stats(const real* in, int B, int C, long cells, real eps,
                   real* mean, real* stdv);

// dmean/dstd [B,C] -> gin += gradient contribution through channel_stats.
void channel_stats_backward(const real* in, int B, int C, long cells,
                            const real* mean, const real* stdv,
                            const real* dmean, const real* dstd, real* gin);

// out = style_std * (content - cmean)/cstd + style_mean, per (b, c).
void adain_forward(const real* content, int B, int C, long cells,
                   const real* cmean, const real* cstd,
                   const real* smean, const real* sstd, real* out);

}  // namespace poseadapt::kern
