#include "poseadapt/core/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "poseadapt/core/parallel.hpp"
#include "poseadapt/kernels/kernels.hpp"

namespace poseadapt {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

Image8 read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("read_png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("read_png: init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("read_png: info alloc failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: decode error in " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    Image8 img;
    img.w = static_cast<int>(w);
    img.h = static_cast<int>(h);
    img.rgb.resize(static_cast<size_t>(w) * h * 3);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 r = 0; r < h; ++r)
        rows[r] = img.rgb.data() + static_cast<size_t>(r) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::string& path, const Image8& img) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("write_png: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("write_png: init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("write_png: info alloc failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png: encode error for " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.w), static_cast<png_uint_32>(img.h),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<size_t>(img.h));
    for (int r = 0; r < img.h; ++r)
        rows[static_cast<size_t>(r)] =
            const_cast<png_bytep>(img.rgb.data() + static_cast<size_t>(r) * img.w * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Tensor image_to_tensor(const Image8& img) {
    Tensor t({3, img.h, img.w});
    const long cells = static_cast<long>(img.h) * img.w;
    parallel_for(cells, [&](long i) {
        for (int c = 0; c < 3; ++c)
            t.data()[c * cells + i] = static_cast<real>(img.rgb[static_cast<size_t>(i) * 3 + c]) / real(255);
    });
    return t;
}

Image8 tensor_to_image(const Tensor& t) {
    Image8 img;
    img.h = t.dim(1);
    img.w = t.dim(2);
    const long cells = static_cast<long>(img.h) * img.w;
    img.rgb.resize(static_cast<size_t>(cells) * 3);
    parallel_for(cells, [&](long i) {
        for (int c = 0; c < 3; ++c) {
            real v = t.data()[c * cells + i];
            v = v < 0 ? 0 : (v > 1 ? 1 : v);
            img.rgb[static_cast<size_t>(i) * 3 + c] =
                static_cast<uint8_t>(std::lround(v * 255.0));
        }
    });
    return img;
}

Tensor resize_bilinear(const Tensor& img, int out_w, int out_h) {
    const int C = img.dim(0), H = img.dim(1), W = img.dim(2);
    if (out_w == W && out_h == H) return img;
    Tensor out({C, out_h, out_w});
    // output -> input mapping as a pure scale
    const double m[6] = {static_cast<double>(W) / out_w, 0.0, 0.0,
                         0.0, static_cast<double>(H) / out_h, 0.0};
    // warp kernel assumes equal in/out sizes, so do a direct loop here
    parallel_for(C, [&](long c) {
        const real* src = img.data() + c * static_cast<long>(H) * W;
        real* dst = out.data() + c * static_cast<long>(out_h) * out_w;
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                const double xs = m[0] * x;
                const double ys = m[4] * y;
                int x0 = static_cast<int>(std::floor(xs));
                int y0 = static_cast<int>(std::floor(ys));
                const double fx = xs - x0, fy = ys - y0;
                const int x1 = x0 + 1 < W ? x0 + 1 : W - 1;
                const int y1 = y0 + 1 < H ? y0 + 1 : H - 1;
                if (x0 >= W) x0 = W - 1;
                if (y0 >= H) y0 = H - 1;
                const real v = static_cast<real>((1 - fy) * ((1 - fx) * src[y0 * W + x0] + fx * src[y0 * W + x1]) +
                                                 fy * ((1 - fx) * src[y1 * W + x0] + fx * src[y1 * W + x1]));
                dst[y * out_w + x] = v;
            }
        }
    });
    return out;
}

void clamp01(Tensor& t) {
    parallel_for(t.size(), [&](long i) {
        real v = t[i];
        t[i] = v < 0 ? 0 : (v > 1 ? 1 : v);
    });
}

}  // namespace poseadapt
