#include "poseadapt/kernels/reference.hpp"

#include <cmath>
#include <vector>

namespace poseadapt::ref {

void conv2d_forward(const real* in, int B, int IC, int H, int W,
                    const real* w, int OC, int KH, int KW,
                    const real* bias, int stride, int pad, real* out) {
    const int OH = (H + 2 * pad - KH) / stride + 1;
    const int OW = (W + 2 * pad - KW) / stride + 1;
    for (int b = 0; b < B; ++b) {
        for (int oc = 0; oc < OC; ++oc) {
            real* dst = out + ((static_cast<long>(b) * OC + oc) * OH) * OW;
            const real bval = bias ? bias[oc] : real(0);
            for (int oh = 0; oh < OH; ++oh) {
                for (int ow = 0; ow < OW; ++ow) {
                    real acc = bval;
                    for (int ic = 0; ic < IC; ++ic) {
                        const real* src = in + ((static_cast<long>(b) * IC + ic) * H) * W;
                        const real* ker = w + ((static_cast<long>(oc) * IC + ic) * KH) * KW;
                        for (int kh = 0; kh < KH; ++kh) {
                            const int ih = oh * stride - pad + kh;
                            if (ih < 0 || ih >= H) continue;
                            for (int kw = 0; kw < KW; ++kw) {
                                const int iw = ow * stride - pad + kw;
                                if (iw < 0 || iw >= W) continue;
                                acc += ker[kh * KW + kw] * src[ih * W + iw];
                            }
                        }
                    }
                    dst[oh * OW + ow] = acc;
                }
            }
        }
    }
}

void conv2d_backward_input(const real* gout, int B, int IC, int H, int W,
                           const real* w, int OC, int KH, int KW,
                           int stride, int pad, real* gin) {
    const int OH = (H + 2 * pad - KH) / stride + 1;
    const int OW = (W + 2 * pad - KW) / stride + 1;
    for (int b = 0; b < B; ++b) {
        for (int ic = 0; ic < IC; ++ic) {
            real* dst = gin + ((static_cast<long>(b) * IC + ic) * H) * W;
            for (int ih = 0; ih < H; ++ih) {
                for (int iw = 0; iw < W; ++iw) {
                    real acc = 0;
                    for (int oc = 0; oc < OC; ++oc) {
                        const real* gsrc = gout + ((static_cast<long>(b) * OC + oc) * OH) * OW;
                        const real* ker = w + ((static_cast<long>(oc) * IC + ic) * KH) * KW;
                        for (int kh = 0; kh < KH; ++kh) {
                            const int num = ih + pad - kh;
                            if (num < 0 || num % stride) continue;
                            const int oh = num / stride;
                            if (oh >= OH) continue;
                            for (int kw = 0; kw < KW; ++kw) {
                                const int numw = iw + pad - kw;
                                if (numw < 0 || numw % stride) continue;
                                const int ow = numw / stride;
                                if (ow >= OW) continue;
                                acc += ker[kh * KW + kw] * gsrc[oh * OW + ow];
                            }
                        }
                    }
                    dst[ih * W + iw] = acc;
                }
            }
        }
    }
}

void conv2d_backward_weights(const real* gout, const real* in,
                             int B, int IC, int H, int W,
                             int OC, int KH, int KW, int stride, int pad,
                             real* gw, real* gbias) {
    const int OH = (H + 2 * pad - KH) / stride + 1;
    const int OW = (W + 2 * pad - KW) / stride + 1;
    for (int oc = 0; oc < OC; ++oc) {
        for (int ic = 0; ic < IC; ++ic) {
            for (int kh = 0; kh < KH; ++kh) {
                for (int kw = 0; kw < KW; ++kw) {
                    real acc = 0;
                    for (int b = 0; b < B; ++b) {
                        const real* gsrc = gout + ((static_cast<long>(b) * OC + oc) * OH) * OW;
                        const real* src = in + ((static_cast<long>(b) * IC + ic) * H) * W;
                        for (int oh = 0; oh < OH; ++oh) {
                            const int ih = oh * stride - pad + kh;
                            if (ih < 0 || ih >= H) continue;
                            for (int ow = 0; ow < OW; ++ow) {
                                const int iw = ow * stride - pad + kw;
                                if (iw < 0 || iw >= W) continue;
                                acc += gsrc[oh * OW + ow] * src[ih * W + iw];
                            }
                        }
                    }
                    gw[((static_cast<long>(oc) * IC + ic) * KH + kh) * KW + kw] += acc;
                }
            }
        }
    }
    if (gbias) {
        for (int oc = 0; oc < OC; ++oc) {
            real acc = 0;
            for (int b = 0; b < B; ++b) {
                const real* gsrc = gout + ((static_cast<long>(b) * OC + oc) * OH) * OW;
                for (long i = 0; i < static_cast<long>(OH) * OW; ++i) acc += gsrc[i];
            }
            gbias[oc] += acc;
        }
    }
}

void convt2d_forward(const real* in, int B, int IC, int H, int W,
                     const real* w, int OC, int KH, int KW,
                     const real* bias, int stride, int pad, real* out) {
    const int OH = (H - 1) * stride - 2 * pad + KH;
    const int OW = (W - 1) * stride - 2 * pad + KW;
    for (int b = 0; b < B; ++b) {
        for (int oc = 0; oc < OC; ++oc) {
            real* dst = out + ((static_cast<long>(b) * OC + oc) * OH) * OW;
            const real bval = bias ? bias[oc] : real(0);
            for (int oh = 0; oh < OH; ++oh) {
                for (int ow = 0; ow < OW; ++ow) {
                    real acc = bval;
                    for (int ic = 0; ic < IC; ++ic) {
                        const real* src = in + ((static_cast<long>(b) * IC + ic) * H) * W;
                        const real* ker = w + ((static_cast<long>(ic) * OC + oc) * KH) * KW;
                        for (int kh = 0; kh < KH; ++kh) {
                            const int num = oh + pad - kh;
                            if (num < 0 || num % stride) continue;
                            const int ih = num / stride;
                            if (ih >= H) continue;
                            for (int kw = 0; kw < KW; ++kw) {
                                const int numw = ow + pad - kw;
                                if (numw < 0 || numw % stride) continue;
                                const int iw = numw / stride;
                                if (iw >= W) continue;
                                acc += ker[kh * KW + kw] * src[ih * W + iw];
                            }
                        }
                    }
                    dst[oh * OW + ow] = acc;
                }
            }
        }
    }
}

void bn2d_forward_train(const real* in, int B, int C, int H, int W,
                        const real* gamma, const real* beta, real eps,
                        real momentum, real* running_mean, real* running_var,
                        real* save_mean, real* save_invstd, real* out) {
    const long cells = static_cast<long>(H) * W;
    const long n = static_cast<long>(B) * cells;
    for (int c = 0; c < C; ++c) {
        real sum = 0;
        for (int b = 0; b < B; ++b) {
            const real* src = in + ((static_cast<long>(b) * C + c) * cells);
            for (long i = 0; i < cells; ++i) sum += src[i];
        }
        const real mean = sum / static_cast<real>(n);
        real varsum = 0;
        for (int b = 0; b < B; ++b) {
            const real* src = in + ((static_cast<long>(b) * C + c) * cells);
            for (long i = 0; i < cells; ++i) {
                const real d = src[i] - mean;
                varsum += d * d;
            }
        }
        const real var = varsum / static_cast<real>(n);
        const real invstd = real(1) / std::sqrt(var + eps);
        save_mean[c] = mean;
        save_invstd[c] = invstd;
        running_mean[c] = (real(1) - momentum) * running_mean[c] + momentum * mean;
        running_var[c] = (real(1) - momentum) * running_var[c] + momentum * var;
        const real g = gamma[c], bt = beta[c];
        for (int b = 0; b < B; ++b) {
            const real* src = in + ((static_cast<long>(b) * C + c) * cells);
            real* dst = out + ((static_cast<long>(b) * C + c) * cells);
            for (long i = 0; i < cells; ++i)
                dst[i] = g * (src[i] - mean) * invstd + bt;
        }
    }
}

void bn2d_backward(const real* gout, const real* in, int B, int C, int H, int W,
                   const real* gamma, const real* save_mean,
                   const real* save_invstd, real* gin, real* ggamma, real* gbeta) {
    const long cells = static_cast<long>(H) * W;
    const long n = static_cast<long>(B) * cells;
    for (int c = 0; c < C; ++c) {
        const real mean = save_mean[c], invstd = save_invstd[c];
        real s1 = 0, s2 = 0;
        for (int b = 0; b < B; ++b) {
            const real* g = gout + ((static_cast<long>(b) * C + c) * cells);
            const real* x = in + ((static_cast<long>(b) * C + c) * cells);
            for (long i = 0; i < cells; ++i) {
                s1 += g[i];
                s2 += g[i] * (x[i] - mean) * invstd;
            }
        }
        ggamma[c] += s2;
        gbeta[c] += s1;
        const real k = gamma[c] * invstd;
        const real m1 = s1 / static_cast<real>(n);
        const real m2 = s2 / static_cast<real>(n);
        for (int b = 0; b < B; ++b) {
            const real* g = gout + ((static_cast<long>(b) * C + c) * cells);
            const real* x = in + ((static_cast<long>(b) * C + c) * cells);
            real* d = gin + ((static_cast<long>(b) * C + c) * cells);
            for (long i = 0; i < cells; ++i) {
                const real xhat = (x[i] - mean) * invstd;
                d[i] = k * (g[i] - m1 - xhat * m2);
            }
        }
    }
}

void warp_bilinear_forward(const real* in, int C, int H, int W,
                           const double m[6], real* out) {
    for (int c = 0; c < C; ++c) {
        const real* src = in + static_cast<long>(c) * H * W;
        real* dst = out + static_cast<long>(c) * H * W;
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const double xs = m[0] * x + m[1] * y + m[2];
                const double ys = m[3] * x + m[4] * y + m[5];
                const int x0 = static_cast<int>(std::floor(xs));
                const int y0 = static_cast<int>(std::floor(ys));
                const double fx = xs - x0, fy = ys - y0;
                real acc = 0;
                for (int dy = 0; dy < 2; ++dy) {
                    const int yy = y0 + dy;
                    if (yy < 0 || yy >= H) continue;
                    const double wy = dy ? fy : 1.0 - fy;
                    for (int dx = 0; dx < 2; ++dx) {
                        const int xx = x0 + dx;
                        if (xx < 0 || xx >= W) continue;
                        const double wx = dx ? fx : 1.0 - fx;
                        acc += static_cast<real>(wy * wx) * src[yy * W + xx];
                    }
                }
                dst[y * W + x] = acc;
            }
        }
    }
}

real masked_sq_sum(const real* pred, const real* target, const unsigned char* mask,
                   int K, long cells, long* kept_channels) {
    real total = 0;
    long kept = 0;
    for (int k = 0; k < K; ++k) {
        if (!mask[k]) continue;
        const real* p = pred + static_cast<long>(k) * cells;
        const real* t = target + static_cast<long>(k) * cells;
        real s = 0;
        for (long i = 0; i < cells; ++i) {
            const real d = p[i] - t[i];
            s += d * d;
        }
        total += s;
        ++kept;
    }
    if (kept_channels) *kept_channels = kept;
    return total;
}

void channel_stats(const real* in, int B, int C, long cells, real eps,
                   real* mean, real* stdv) {
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const real* src = in + (static_cast<long>(b) * C + c) * cells;
            real sum = 0;
            for (long i = 0; i < cells; ++i) sum += src[i];
            const real mu = sum / static_cast<real>(cells);
            real varsum = 0;
            for (long i = 0; i < cells; ++i) {
                const real d = src[i] - mu;
                varsum += d * d;
            }
            mean[b * C + c] = mu;
            stdv[b * C + c] = std::sqrt(varsum / static_cast<real>(cells) + eps);
        }
    }
}

}  // namespace poseadapt::ref
