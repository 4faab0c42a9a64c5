#include "poseadapt/kernels/kernels.hpp"

#include <cmath>

namespace poseadapt::kern {

namespace {

// valid output range [lo, hi) such that 0 <= o*stride - pad + k < limit
inline void out_range(int k, int stride, int pad, int limit, int osize, int* lo, int* hi) {
    int l = 0;
    const int num = pad - k;
    if (num > 0) l = (num + stride - 1) / stride;
    int h = (limit - 1 + pad - k) / stride + 1;
    if (h > osize) h = osize;
    *lo = l;
    *hi = h < l ? l : h;
}

}  // namespace

// Kernel contributions are accumulated per output element in (ic, kh, kw)
// order; the loop nests are hoisted for vectorization but keep that order,
// so results stay bitwise identical to the reference implementation.
void conv2d_forward(const real* in, int B, int IC, int H, int W,
                    const real* w, int OC, int KH, int KW,
                    const real* bias, int stride, int pad, real* out) {
    const int OH = (H + 2 * pad - KH) / stride + 1;
    const int OW = (W + 2 * pad - KW) / stride + 1;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int oc = 0; oc < OC; ++oc) {
            real* dst = out + ((static_cast<long>(b) * OC + oc) * OH) * OW;
            const real bval = bias ? bias[oc] : real(0);
            for (long i = 0; i < static_cast<long>(OH) * OW; ++i) dst[i] = bval;
            for (int ic = 0; ic < IC; ++ic) {
                const real* src = in + ((static_cast<long>(b) * IC + ic) * H) * W;
                const real* ker = w + ((static_cast<long>(oc) * IC + ic) * KH) * KW;
                for (int kh = 0; kh < KH; ++kh) {
                    int oh_lo, oh_hi;
                    out_range(kh, stride, pad, H, OH, &oh_lo, &oh_hi);
                    for (int kw = 0; kw < KW; ++kw) {
                        int ow_lo, ow_hi;
                        out_range(kw, stride, pad, W, OW, &ow_lo, &ow_hi);
                        const real wv = ker[kh * KW + kw];
                        const int off = kw - pad;
                        for (int oh = oh_lo; oh < oh_hi; ++oh) {
                            const int ih = oh * stride - pad + kh;
                            real* drow = dst + oh * OW;
                            const real* srow = src + ih * W;
                            if (stride == 1) {
                                for (int ow = ow_lo; ow < ow_hi; ++ow)
                                    drow[ow] += wv * srow[ow + off];
                            } else {
                                for (int ow = ow_lo; ow < ow_hi; ++ow)
                                    drow[ow] += wv * srow[ow * stride + off];
                            }
                        }
                    }
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
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int ic = 0; ic < IC; ++ic) {
            real* dst = gin + ((static_cast<long>(b) * IC + ic) * H) * W;
            for (long i = 0; i < static_cast<long>(H) * W; ++i) dst[i] = 0;
            for (int oc = 0; oc < OC; ++oc) {
                const real* gsrc = gout + ((static_cast<long>(b) * OC + oc) * OH) * OW;
                const real* ker = w + ((static_cast<long>(oc) * IC + ic) * KH) * KW;
                for (int kh = 0; kh < KH; ++kh) {
                    int oh_lo, oh_hi;
                    out_range(kh, stride, pad, H, OH, &oh_lo, &oh_hi);
                    for (int kw = 0; kw < KW; ++kw) {
                        int ow_lo, ow_hi;
                        out_range(kw, stride, pad, W, OW, &ow_lo, &ow_hi);
                        const real wv = ker[kh * KW + kw];
                        const int off = kw - pad;
                        for (int oh = oh_lo; oh < oh_hi; ++oh) {
                            const int ih = oh * stride - pad + kh;
                            real* drow = dst + ih * W;
                            const real* grow = gsrc + oh * OW;
                            if (stride == 1) {
                                for (int ow = ow_lo; ow < ow_hi; ++ow)
                                    drow[ow + off] += wv * grow[ow];
                            } else {
                                for (int ow = ow_lo; ow < ow_hi; ++ow)
                                    drow[ow * stride + off] += wv * grow[ow];
                            }
                        }
                    }
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
#pragma omp parallel for schedule(static) collapse(2)
    for (int oc = 0; oc < OC; ++oc) {
        for (int ic = 0; ic < IC; ++ic) {
            for (int kh = 0; kh < KH; ++kh) {
                int oh_lo, oh_hi;
                out_range(kh, stride, pad, H, OH, &oh_lo, &oh_hi);
                for (int kw = 0; kw < KW; ++kw) {
                    int ow_lo, ow_hi;
                    out_range(kw, stride, pad, W, OW, &ow_lo, &ow_hi);
                    const int off = kw - pad;
                    real acc = 0;
                    for (int b = 0; b < B; ++b) {
                        const real* gsrc = gout + ((static_cast<long>(b) * OC + oc) * OH) * OW;
                        const real* src = in + ((static_cast<long>(b) * IC + ic) * H) * W;
                        for (int oh = oh_lo; oh < oh_hi; ++oh) {
                            const int ih = oh * stride - pad + kh;
                            const real* grow = gsrc + oh * OW;
                            const real* srow = src + ih * W;
                            if (stride == 1) {
                                for (int ow = ow_lo; ow < ow_hi; ++ow)
                                    acc += grow[ow] * srow[ow + off];
                            } else {
                                for (int ow = ow_lo; ow < ow_hi; ++ow)
                                    acc += grow[ow] * srow[ow * stride + off];
                            }
                        }
                    }
                    gw[((static_cast<long>(oc) * IC + ic) * KH + kh) * KW + kw] += acc;
                }
            }
        }
    }
    if (gbias) {
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int oc = 0; oc < OC; ++oc) {
            real* dst = out + ((static_cast<long>(b) * OC + oc) * OH) * OW;
            const real bval = bias ? bias[oc] : real(0);
            for (long i = 0; i < static_cast<long>(OH) * OW; ++i) dst[i] = bval;
            for (int ic = 0; ic < IC; ++ic) {
                const real* src = in + ((static_cast<long>(b) * IC + ic) * H) * W;
                const real* ker = w + ((static_cast<long>(ic) * OC + oc) * KH) * KW;
                for (int kh = 0; kh < KH; ++kh) {
                    int ih_lo, ih_hi;
                    out_range(kh, stride, pad, OH, H, &ih_lo, &ih_hi);
                    for (int kw = 0; kw < KW; ++kw) {
                        int iw_lo, iw_hi;
                        out_range(kw, stride, pad, OW, W, &iw_lo, &iw_hi);
                        const real wv = ker[kh * KW + kw];
                        const int off = kw - pad;
                        for (int ih = ih_lo; ih < ih_hi; ++ih) {
                            const int oh = ih * stride - pad + kh;
                            real* drow = dst + oh * OW;
                            const real* srow = src + ih * W;
                            for (int iw = iw_lo; iw < iw_hi; ++iw)
                                drow[iw * stride + off] += wv * srow[iw];
                        }
                    }
                }
            }
        }
    }
}

void convt2d_backward_input(const real* gout, int B, int IC, int H, int W,
                            const real* w, int OC, int KH, int KW,
                            int stride, int pad, real* gin) {
    const int OH = (H - 1) * stride - 2 * pad + KH;
    const int OW = (W - 1) * stride - 2 * pad + KW;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int ic = 0; ic < IC; ++ic) {
            real* dst = gin + ((static_cast<long>(b) * IC + ic) * H) * W;
            for (long i = 0; i < static_cast<long>(H) * W; ++i) dst[i] = 0;
            for (int oc = 0; oc < OC; ++oc) {
                const real* gsrc = gout + ((static_cast<long>(b) * OC + oc) * OH) * OW;
                const real* ker = w + ((static_cast<long>(ic) * OC + oc) * KH) * KW;
                for (int kh = 0; kh < KH; ++kh) {
                    int ih_lo, ih_hi;
                    out_range(kh, stride, pad, OH, H, &ih_lo, &ih_hi);
                    for (int kw = 0; kw < KW; ++kw) {
                        int iw_lo, iw_hi;
                        out_range(kw, stride, pad, OW, W, &iw_lo, &iw_hi);
                        const real wv = ker[kh * KW + kw];
                        const int off = kw - pad;
                        for (int ih = ih_lo; ih < ih_hi; ++ih) {
                            const int oh = ih * stride - pad + kh;
                            real* drow = dst + ih * W;
                            const real* grow = gsrc + oh * OW;
                            for (int iw = iw_lo; iw < iw_hi; ++iw)
                                drow[iw] += wv * grow[iw * stride + off];
                        }
                    }
                }
            }
        }
    }
}

void convt2d_backward_weights(const real* gout, const real* in,
                              int B, int IC, int H, int W,
                              int OC, int KH, int KW, int stride, int pad,
                              real* gw, real* gbias) {
    const int OH = (H - 1) * stride - 2 * pad + KH;
    const int OW = (W - 1) * stride - 2 * pad + KW;
#pragma omp parallel for schedule(static) collapse(2)
    for (int ic = 0; ic < IC; ++ic) {
        for (int oc = 0; oc < OC; ++oc) {
            for (int kh = 0; kh < KH; ++kh) {
                int ih_lo, ih_hi;
                out_range(kh, stride, pad, OH, H, &ih_lo, &ih_hi);
                for (int kw = 0; kw < KW; ++kw) {
                    int iw_lo, iw_hi;
                    out_range(kw, stride, pad, OW, W, &iw_lo, &iw_hi);
                    const int off = kw - pad;
                    real acc = 0;
                    for (int b = 0; b < B; ++b) {
                        const real* gsrc = gout + ((static_cast<long>(b) * OC + oc) * OH) * OW;
                        const real* src = in + ((static_cast<long>(b) * IC + ic) * H) * W;
                        for (int ih = ih_lo; ih < ih_hi; ++ih) {
                            const int oh = ih * stride - pad + kh;
                            const real* srow = src + ih * W;
                            const real* grow = gsrc + oh * OW;
                            for (int iw = iw_lo; iw < iw_hi; ++iw)
                                acc += srow[iw] * grow[iw * stride + off];
                        }
                    }
                    gw[((static_cast<long>(ic) * OC + oc) * KH + kh) * KW + kw] += acc;
                }
            }
        }
    }
    if (gbias) {
#pragma omp parallel for schedule(static)
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

void relu_forward(const real* in, long n, real* out) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[i] = in[i] > 0 ? in[i] : real(0);
}

void relu_backward(const real* gout, const real* in, long n, real* gin) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) gin[i] = in[i] > 0 ? gout[i] : real(0);
}

void bn2d_forward_train(const real* in, int B, int C, int H, int W,
                        const real* gamma, const real* beta, real eps,
                        real momentum, real* running_mean, real* running_var,
                        real* save_mean, real* save_invstd, real* out) {
    const long cells = static_cast<long>(H) * W;
    const long n = static_cast<long>(B) * cells;
#pragma omp parallel for schedule(static)
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

void bn2d_forward_eval(const real* in, int B, int C, int H, int W,
                       const real* gamma, const real* beta, real eps,
                       const real* running_mean, const real* running_var,
                       real* out) {
    const long cells = static_cast<long>(H) * W;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const real invstd = real(1) / std::sqrt(running_var[c] + eps);
            const real g = gamma[c], bt = beta[c], mean = running_mean[c];
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
#pragma omp parallel for schedule(static)
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

void upsample2x_forward(const real* in, int B, int C, int H, int W, real* out) {
    const int OH = 2 * H, OW = 2 * W;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const real* src = in + ((static_cast<long>(b) * C + c) * H) * W;
            real* dst = out + ((static_cast<long>(b) * C + c) * OH) * OW;
            for (int oh = 0; oh < OH; ++oh)
                for (int ow = 0; ow < OW; ++ow)
                    dst[oh * OW + ow] = src[(oh / 2) * W + (ow / 2)];
        }
    }
}

void upsample2x_backward(const real* gout, int B, int C, int H, int W, real* gin) {
    const int OH = 2 * H, OW = 2 * W;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const real* g = gout + ((static_cast<long>(b) * C + c) * OH) * OW;
            real* d = gin + ((static_cast<long>(b) * C + c) * H) * W;
            for (int ih = 0; ih < H; ++ih) {
                for (int iw = 0; iw < W; ++iw) {
                    d[ih * W + iw] = g[(2 * ih) * OW + 2 * iw] +
                                     g[(2 * ih) * OW + 2 * iw + 1] +
                                     g[(2 * ih + 1) * OW + 2 * iw] +
                                     g[(2 * ih + 1) * OW + 2 * iw + 1];
                }
            }
        }
    }
}

void warp_bilinear_forward(const real* in, int C, int H, int W,
                           const double m[6], real* out) {
#pragma omp parallel for schedule(static)
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

void warp_bilinear_backward(const real* gout, int C, int H, int W,
                            const double m[6], real* gin) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        const real* g = gout + static_cast<long>(c) * H * W;
        real* d = gin + static_cast<long>(c) * H * W;
        for (long i = 0; i < static_cast<long>(H) * W; ++i) d[i] = 0;
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const double xs = m[0] * x + m[1] * y + m[2];
                const double ys = m[3] * x + m[4] * y + m[5];
                const int x0 = static_cast<int>(std::floor(xs));
                const int y0 = static_cast<int>(std::floor(ys));
                const double fx = xs - x0, fy = ys - y0;
                const real gv = g[y * W + x];
                for (int dy = 0; dy < 2; ++dy) {
                    const int yy = y0 + dy;
                    if (yy < 0 || yy >= H) continue;
                    const double wy = dy ? fy : 1.0 - fy;
                    for (int dx = 0; dx < 2; ++dx) {
                        const int xx = x0 + dx;
                        if (xx < 0 || xx >= W) continue;
                        const double wx = dx ? fx : 1.0 - fx;
                        d[yy * W + xx] += static_cast<real>(wy * wx) * gv;
                    }
                }
            }
        }
    }
}

void gaussian_stamp(real* channel, int H, int W, int cx, int cy,
                    real sigma, int trunc) {
    for (long i = 0; i < static_cast<long>(H) * W; ++i) channel[i] = 0;
    if (cx < -trunc || cx >= W + trunc || cy < -trunc || cy >= H + trunc) return;
    const real inv2s2 = real(1) / (2 * sigma * sigma);
    const int r0 = cy - trunc < 0 ? 0 : cy - trunc;
    const int r1 = cy + trunc >= H ? H - 1 : cy + trunc;
    const int c0 = cx - trunc < 0 ? 0 : cx - trunc;
    const int c1 = cx + trunc >= W ? W - 1 : cx + trunc;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const real d2 = static_cast<real>((c - cx) * (c - cx) + (r - cy) * (r - cy));
            channel[r * W + c] = std::exp(-d2 * inv2s2);
        }
    }
}

real masked_sq_sum(const real* pred, const real* target, const unsigned char* mask,
                   int K, long cells, long* kept_channels) {
    real total = 0;
    long kept = 0;
    std::vector<real> partial(static_cast<size_t>(K), real(0));
#pragma omp parallel for schedule(static)
    for (int k = 0; k < K; ++k) {
        if (!mask[k]) continue;
        const real* p = pred + static_cast<long>(k) * cells;
        const real* t = target + static_cast<long>(k) * cells;
        real s = 0;
        for (long i = 0; i < cells; ++i) {
            const real d = p[i] - t[i];
            s += d * d;
        }
        partial[static_cast<size_t>(k)] = s;
    }
    for (int k = 0; k < K; ++k) {
        if (!mask[k]) continue;
        total += partial[static_cast<size_t>(k)];
        ++kept;
    }
    if (kept_channels) *kept_channels = kept;
    return total;
}

void masked_mse_backward(const real* pred, const real* target,
                         const unsigned char* mask, int K, long cells,
                         real scale, real* gpred) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < K; ++k) {
        if (!mask[k]) continue;
        const real* p = pred + static_cast<long>(k) * cells;
        const real* t = target + static_cast<long>(k) * cells;
        real* g = gpred + static_cast<long>(k) * cells;
        for (long i = 0; i < cells; ++i) g[i] += scale * 2 * (p[i] - t[i]);
    }
}

void channel_stats(const real* in, int B, int C, long cells, real eps,
                   real* mean, real* stdv) {
#pragma omp parallel for schedule(static) collapse(2)
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

void channel_stats_backward(const real* in, int B, int C, long cells,
                            const real* mean, const real* stdv,
                            const real* dmean, const real* dstd, real* gin) {
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const real* src = in + (static_cast<long>(b) * C + c) * cells;
            real* g = gin + (static_cast<long>(b) * C + c) * cells;
            const real mu = mean[b * C + c], sd = stdv[b * C + c];
            const real dm = dmean[b * C + c] / static_cast<real>(cells);
            const real ds = dstd[b * C + c] / (sd * static_cast<real>(cells));
            for (long i = 0; i < cells; ++i)
                g[i] += dm + ds * (src[i] - mu);
        }
    }
}

void adain_forward(const real* content, int B, int C, long cells,
                   const real* cmean, const real* cstd,
                   const real* smean, const real* sstd, real* out) {
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const real* src = content + (static_cast<long>(b) * C + c) * cells;
            real* dst = out + (static_cast<long>(b) * C + c) * cells;
            const real cm = cmean[b * C + c], cs = cstd[b * C + c];
            const real sm = smean[b * C + c], ss = sstd[b * C + c];
            for (long i = 0; i < cells; ++i)
                dst[i] = ss * (src[i] - cm) / cs + sm;
        }
    }
}

}  // namespace poseadapt::kern
