#include "poseadapt/augment.hpp"

#include <cmath>
#include <stdexcept>

#include "poseadapt/core/parallel.hpp"
#include "poseadapt/kernels/kernels.hpp"

namespace poseadapt {

namespace {
constexpr double kDegToRad = 0.017453292519943295;

std::array<double, 6> compose(double rot_deg, double shear_deg, double scale,
                              double tx, double ty, double cx, double cy) {
    const double r = rot_deg * kDegToRad;
    const double sh = std::tan(shear_deg * kDegToRad);
    const double cr = std::cos(r), sr = std::sin(r);
    // A = R * Shear * (scale I)
    const double a00 = scale * cr, a01 = scale * (cr * sh - sr);
    const double a10 = scale * sr, a11 = scale * (sr * sh + cr);
    // p' = A (p - c) + c + t
    return {a00, a01, cx + tx - (a00 * cx + a01 * cy),
            a10, a11, cy + ty - (a10 * cx + a11 * cy)};
}
}  // namespace

std::array<double, 6> GeometricTransform::matrix() const {
    const double cx = (width - 1) * 0.5, cy = (height - 1) * 0.5;
    return compose(rotation_deg, shear_deg, scale,
                   translate_x * width, translate_y * height, cx, cy);
}

std::array<double, 6> affine_invert(const std::array<double, 6>& m) {
    const double det = m[0] * m[4] - m[1] * m[3];
    if (std::fabs(det) <= 1e-6)
        throw std::invalid_argument("GeometricTransform: affine map is not invertible");
    const double i00 = m[4] / det, i01 = -m[1] / det;
    const double i10 = -m[3] / det, i11 = m[0] / det;
    return {i00, i01, -(i00 * m[2] + i01 * m[5]),
            i10, i11, -(i10 * m[2] + i11 * m[5])};
}

std::array<double, 6> GeometricTransform::inverse_matrix() const {
    return affine_invert(matrix());
}

std::pair<double, double> GeometricTransform::apply(double x, double y) const {
    const auto m = matrix();
    return {m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]};
}

std::pair<double, double> GeometricTransform::apply_inverse(double x, double y) const {
    const auto m = inverse_matrix();
    return {m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]};
}

std::array<double, 6> affine_to_grid(const std::array<double, 6>& m,
                                     double gx, double gy) {
    // G M G^-1 with G = diag(gx, gy)
    return {m[0], m[1] * gx / gy, m[2] * gx,
            m[3] * gy / gx, m[4], m[5] * gy};
}

void AugmentConfig::validate() const {
    auto check = [](bool enabled, const std::array<double, 2>& r, const char* what) {
        if (enabled && !(r[0] < r[1]))
            throw std::invalid_argument(std::string("AugmentConfig: empty or inverted ") +
                                        what + " range");
    };
    check(rotation, rotation_range, "rotation");
    check(translation, translation_range, "translation");
    check(scale, scale_range, "scale");
    check(shear, shear_range, "shear");
    if (scale && scale_range[0] <= 0)
        throw std::invalid_argument("AugmentConfig: scale range must be positive");
    if (color && !(color_strength > 0))
        throw std::invalid_argument("AugmentConfig: color_strength must be positive");
}

AugmentConfig AugmentConfig::all_enabled() {
    AugmentConfig c;
    c.rotation = c.translation = c.scale = c.color = c.shear = true;
    return c;
}

void OcclusionPolicy::validate(int image_w, int image_h) const {
    if (!(tau_occ > 0 && tau_occ <= 1))
        throw std::invalid_argument("OcclusionPolicy: tau_occ must be in (0, 1]");
    if (patch_h < 1 || patch_w < 1 || patch_h > image_h || patch_w > image_w)
        throw std::invalid_argument("OcclusionPolicy: patch must fit inside the image");
    if (occlude_prob < 0 || occlude_prob > 1)
        throw std::invalid_argument("OcclusionPolicy: occlude_prob must be in [0, 1]");
}

std::pair<GeometricTransform, PhotometricParams>
sample_augmentation(Rng& rng, const AugmentConfig& cfg, int image_w, int image_h) {
    cfg.validate();
    GeometricTransform t;
    t.width = image_w;
    t.height = image_h;
    if (cfg.rotation) t.rotation_deg = rng.uniform(cfg.rotation_range[0], cfg.rotation_range[1]);
    if (cfg.translation) {
        t.translate_x = rng.uniform(cfg.translation_range[0], cfg.translation_range[1]);
        t.translate_y = rng.uniform(cfg.translation_range[0], cfg.translation_range[1]);
    }
    if (cfg.scale) t.scale = rng.uniform(cfg.scale_range[0], cfg.scale_range[1]);
    if (cfg.shear) t.shear_deg = rng.uniform(cfg.shear_range[0], cfg.shear_range[1]);

    PhotometricParams p;
    if (cfg.color) {
        const double c = cfg.color_strength;
        for (int i = 0; i < 3; ++i) {
            const double lo = 1.0 - c < 0.0 ? 0.0 : 1.0 - c;
            p.gain[static_cast<size_t>(i)] = rng.uniform(lo, 1.0 + c);
        }
        p.brightness = rng.uniform(-0.5 * c, 0.5 * c);
    }
    return {t, p};
}

Tensor apply_to_image(const GeometricTransform& t, const PhotometricParams& p,
                      const Tensor& img) {
    const int C = img.dim(0), H = img.dim(1), W = img.dim(2);
    Tensor out({C, H, W});
    if (t.is_identity()) {
        out = img;
    } else {
        const auto inv = t.inverse_matrix();
        kern::warp_bilinear_forward(img.data(), C, H, W, inv.data(), out.data());
    }
    if (!p.is_identity()) {
        const long cells = static_cast<long>(H) * W;
        parallel_for(cells * C, [&](long i) {
            const int c = static_cast<int>(i / cells);
            real v = out[i] * static_cast<real>(p.gain[static_cast<size_t>(c)]) +
                     static_cast<real>(p.brightness);
            out[i] = v < 0 ? 0 : (v > 1 ? 1 : v);
        });
    }
    return out;
}

Heatmap apply_inverse_to_heatmap(const GeometricTransform& t, const Heatmap& h) {
    const int K = h.dim(0), H = h.dim(1), W = h.dim(2);
    if (t.is_identity()) return h;
    const double gx = static_cast<double>(W) / t.width;
    const double gy = static_cast<double>(H) / t.height;
    // sampling with the forward map applies the inverse warp
    const auto m = affine_to_grid(t.matrix(), gx, gy);
    Heatmap out({K, H, W});
    kern::warp_bilinear_forward(h.data(), K, H, W, m.data(), out.data());
    return out;
}

Heatmap apply_forward_to_heatmap(const GeometricTransform& t, const Heatmap& h) {
    const int K = h.dim(0), H = h.dim(1), W = h.dim(2);
    if (t.is_identity()) return h;
    const double gx = static_cast<double>(W) / t.width;
    const double gy = static_cast<double>(H) / t.height;
    const auto m = affine_invert(affine_to_grid(t.matrix(), gx, gy));
    Heatmap out({K, H, W});
    kern::warp_bilinear_forward(h.data(), K, H, W, m.data(), out.data());
    return out;
}

OcclusionResult adaptive_occlusion(const Tensor& img, const Heatmap& teacher_heatmap,
                                   const OcclusionPolicy& policy, Rng& rng,
                                   const std::array<double, 6>* coord_map) {
    const int C = img.dim(0), H = img.dim(1), W = img.dim(2);
    const int K = teacher_heatmap.dim(0);
    const int HH = teacher_heatmap.dim(1), HW = teacher_heatmap.dim(2);
    policy.validate(W, H);

    OcclusionResult res;
    res.image = img;
    res.occluded.assign(static_cast<size_t>(K), 0);

    const long cells = static_cast<long>(HH) * HW;
    const double sx = static_cast<double>(W) / HW;
    const double sy = static_cast<double>(H) / HH;
    const Tensor& src = img;  // patches always read the pre-occlusion pixels
    const long icells = static_cast<long>(H) * W;

    for (int k = 0; k < K; ++k) {
        const real* ch = teacher_heatmap.data() + static_cast<long>(k) * cells;
        long best = 0;
        for (long i = 1; i < cells; ++i)
            if (ch[i] > ch[best]) best = i;
        if (!(ch[best] > policy.tau_occ)) continue;
        if (!rng.bernoulli(policy.occlude_prob)) continue;

        double x = (best % HW) * sx;
        double y = (best / HW) * sy;
        if (coord_map) {
            const auto& m = *coord_map;
            const double xm = m[0] * x + m[1] * y + m[2];
            const double ym = m[3] * x + m[4] * y + m[5];
            x = xm;
            y = ym;
        }
        const int sx0 = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(W - policy.patch_w + 1)));
        const int sy0 = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(H - policy.patch_h + 1)));
        const int dx0 = static_cast<int>(std::lround(x)) - policy.patch_w / 2;
        const int dy0 = static_cast<int>(std::lround(y)) - policy.patch_h / 2;
        for (int r = 0; r < policy.patch_h; ++r) {
            const int dy = dy0 + r;
            if (dy < 0 || dy >= H) continue;
            for (int c = 0; c < policy.patch_w; ++c) {
                const int dx = dx0 + c;
                if (dx < 0 || dx >= W) continue;
                for (int ch2 = 0; ch2 < 3 && ch2 < C; ++ch2)
                    res.image[ch2 * icells + static_cast<long>(dy) * W + dx] =
                        src[ch2 * icells + static_cast<long>(sy0 + r) * W + (sx0 + c)];
            }
        }
        res.occluded[static_cast<size_t>(k)] = 1;
    }
    return res;
}

}  // namespace poseadapt
