#include "poseadapt/style.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "poseadapt/core/diagnostics.hpp"
#include "poseadapt/core/image.hpp"
#include "poseadapt/core/parallel.hpp"
#include "poseadapt/core/serialize.hpp"
#include "poseadapt/kernels/kernels.hpp"
#include "poseadapt/nn/adam.hpp"

namespace poseadapt {

void StyleModelConfig::validate() const {
    if (encoder_channels.empty() || decoder_channels.size() != encoder_channels.size())
        throw std::invalid_argument(
            "StyleModelConfig: decoder must have one upsampling block per encoder stage");
    int s = image_size;
    for (size_t i = 0; i < encoder_channels.size(); ++i) {
        if (s % 2) throw std::invalid_argument("StyleModelConfig: image_size not divisible");
        s /= 2;
    }
    if (s < 1) throw std::invalid_argument("StyleModelConfig: too many stages for image_size");
    if (eps < 1e-5 * 0.999)
        throw std::invalid_argument("StyleModelConfig: eps must be >= 1e-5");
    if (batch_size < 1 || steps < 0 || autoencoder_steps < 0)
        throw std::invalid_argument("StyleModelConfig: bad schedule");
}

Tensor adain(const Tensor& content, const Tensor& style, real eps) {
    if (content.rank() != 4 || style.rank() != 4)
        throw std::invalid_argument("adain: expected rank-4 inputs");
    if (content.dim(0) != style.dim(0) || content.dim(1) != style.dim(1))
        throw std::invalid_argument("adain: batch/channel mismatch " + content.shape_str() +
                                    " vs " + style.shape_str());
    const int B = content.dim(0), C = content.dim(1);
    const long ccells = static_cast<long>(content.dim(2)) * content.dim(3);
    const long scells = static_cast<long>(style.dim(2)) * style.dim(3);
    std::vector<real> cmean(static_cast<size_t>(B) * C), cstd(static_cast<size_t>(B) * C);
    std::vector<real> smean(static_cast<size_t>(B) * C), sstd(static_cast<size_t>(B) * C);
    kern::channel_stats(content.data(), B, C, ccells, eps, cmean.data(), cstd.data());
    kern::channel_stats(style.data(), B, C, scells, eps, smean.data(), sstd.data());
    Tensor out = Tensor::zeros_like(content);
    kern::adain_forward(content.data(), B, C, ccells, cmean.data(), cstd.data(),
                        smean.data(), sstd.data(), out.data());
    return out;
}

StyleModel::StyleModel(const StyleModelConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    int in_ch = 3;
    for (size_t i = 0; i < cfg_.encoder_channels.size(); ++i) {
        const int oc = cfg_.encoder_channels[i];
        const std::string base = "enc" + std::to_string(i);
        enc_.add(base + ".conv", std::make_unique<nn::Conv2d>(in_ch, oc, 3, 2, 1, true, rng));
        enc_.add(base + ".relu", std::make_unique<nn::ReLU>());
        in_ch = oc;
    }
    for (size_t i = 0; i < cfg_.decoder_channels.size(); ++i) {
        const int oc = cfg_.decoder_channels[i];
        const std::string base = "dec" + std::to_string(i);
        dec_.add(base + ".conv", std::make_unique<nn::Conv2d>(in_ch, oc, 3, 1, 1, true, rng));
        dec_.add(base + ".relu", std::make_unique<nn::ReLU>());
        dec_.add(base + ".up", std::make_unique<nn::Upsample2x>());
        in_ch = oc;
    }
    dec_.add("out.conv", std::make_unique<nn::Conv2d>(in_ch, 3, 3, 1, 1, true, rng));
}

std::vector<std::string> StyleModel::tap_names() const {
    std::vector<std::string> names;
    for (size_t i = 0; i < cfg_.encoder_channels.size(); ++i)
        names.push_back("enc" + std::to_string(i) + ".relu");
    return names;
}

Tensor StyleModel::encode(const Tensor& batch) const {
    return const_cast<nn::Net&>(enc_).forward(batch, false);
}

Tensor StyleModel::stylize_features(const Tensor& content, const Tensor& style,
                                    real alpha) const {
    if (alpha < 0 || alpha > 1)
        throw std::invalid_argument("stylize: alpha must be in [0, 1]");
    const Tensor fc = encode(content);
    if (alpha == 0) return fc;
    const Tensor fs = encode(style);
    Tensor t = adain(fc, fs, cfg_.eps);
    if (alpha == 1) return t;
    Tensor feat = Tensor::zeros_like(fc);
    parallel_for(feat.size(), [&](long i) {
        feat[i] = static_cast<real>(alpha) * t[i] + (real(1) - static_cast<real>(alpha)) * fc[i];
    });
    return feat;
}

namespace {
Tensor as_batch(const Tensor& img) {
    if (img.rank() != 3) throw std::invalid_argument("stylize: expected [3,H,W] image");
    Tensor b({1, img.dim(0), img.dim(1), img.dim(2)});
    for (long i = 0; i < img.size(); ++i) b[i] = img[i];
    return b;
}

Tensor from_batch(const Tensor& b) {
    Tensor img({b.dim(1), b.dim(2), b.dim(3)});
    for (long i = 0; i < img.size(); ++i) img[i] = b[i];
    return img;
}
}  // namespace

Tensor StyleModel::stylize(const Tensor& content_img, const Tensor& style_img,
                           real alpha) const {
    if (content_img.dim(1) != cfg_.image_size || content_img.dim(2) != cfg_.image_size)
        throw std::invalid_argument("stylize: content image not at model resolution");
    if (style_img.dim(1) != cfg_.image_size || style_img.dim(2) != cfg_.image_size)
        throw std::invalid_argument("stylize: style image not at model resolution");
    const Tensor feat = stylize_features(as_batch(content_img), as_batch(style_img), alpha);
    Tensor out = const_cast<nn::Net&>(dec_).forward(feat, false);
    clamp01(out);
    return from_batch(out);
}

void StyleModel::save(const std::string& path) const {
    nlohmann::ordered_json meta;
    meta["kind"] = "style-model";
    meta["config"] = {{"image_size", cfg_.image_size},
                      {"encoder_channels", cfg_.encoder_channels},
                      {"decoder_channels", cfg_.decoder_channels},
                      {"eps", cfg_.eps}};
    std::vector<NamedTensorView> tensors;
    auto& self = const_cast<StyleModel&>(*this);
    for (auto& p : self.enc_.params()) tensors.push_back({"enc." + p.name, p.value});
    for (auto& p : self.dec_.params()) tensors.push_back({"dec." + p.name, p.value});
    write_container(path, meta, tensors);
}

StyleModel StyleModel::load(const std::string& path) {
    Container c = read_container(path);
    if (c.meta.value("kind", "") != "style-model")
        throw std::runtime_error("StyleModel::load: " + path + " is not a style checkpoint");
    StyleModelConfig cfg;
    const auto& j = c.meta.at("config");
    cfg.image_size = j.at("image_size").get<int>();
    cfg.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
    cfg.decoder_channels = j.at("decoder_channels").get<std::vector<int>>();
    cfg.eps = j.at("eps").get<real>();
    Rng rng(0);
    StyleModel m(cfg, rng);
    for (auto& p : m.enc_.params()) {
        const Tensor& t = c.require("enc." + p.name);
        check_same_shape(*p.value, t, "StyleModel::load");
        *p.value = t;
    }
    for (auto& p : m.dec_.params()) {
        const Tensor& t = c.require("dec." + p.name);
        check_same_shape(*p.value, t, "StyleModel::load");
        *p.value = t;
    }
    return m;
}

namespace {

Tensor draw_image(const ImagePool& source, const ImagePool& target, int image_size, Rng& rng) {
    const ImagePool& pool = rng.bernoulli(0.5) ? source : target;
    Tensor img = pool.get(static_cast<size_t>(rng.uniform_int(pool.size)));
    if (img.dim(1) != image_size || img.dim(2) != image_size)
        img = resize_bilinear(img, image_size, image_size);
    return img;
}

Tensor stack_batch(const std::vector<Tensor>& imgs) {
    const int B = static_cast<int>(imgs.size());
    Tensor out({B, imgs[0].dim(0), imgs[0].dim(1), imgs[0].dim(2)});
    const long per = imgs[0].size();
    for (int b = 0; b < B; ++b)
        for (long i = 0; i < per; ++i) out[b * per + i] = imgs[static_cast<size_t>(b)][i];
    return out;
}

}  // namespace

StyleModel style_pretrain(const ImagePool& source, const ImagePool& target,
                          const StyleModelConfig& cfg,
                          std::vector<StylePretrainRecord>* loss_log) {
    cfg.validate();
    if (source.size == 0 || target.size == 0)
        throw std::invalid_argument("style_pretrain: empty dataset");

    Rng master(cfg.seed);
    Rng init_rng = master.derive(1);
    Rng draw_rng = master.derive(2);
    StyleModel model(cfg, init_rng);

    auto& enc = model.encoder();
    auto& dec = model.decoder();
    const auto taps = model.tap_names();

    auto draw_batch = [&](Rng& rng) {
        std::vector<Tensor> imgs;
        imgs.reserve(static_cast<size_t>(cfg.batch_size));
        for (int i = 0; i < cfg.batch_size; ++i)
            imgs.push_back(draw_image(source, target, cfg.image_size, rng));
        return stack_batch(imgs);
    };

    // Stage 1: joint reconstruction warmup.
    {
        auto enc_params = enc.params();
        auto dec_params = dec.params();
        std::vector<nn::ParamRef> all = enc_params;
        all.insert(all.end(), dec_params.begin(), dec_params.end());
        nn::Adam opt(all, cfg.lr);
        for (int step = 0; step < cfg.autoencoder_steps; ++step) {
            const Tensor x = draw_batch(draw_rng);
            enc.zero_grad();
            dec.zero_grad();
            const Tensor f = enc.forward(x, true);
            const Tensor y = dec.forward(f, true);
            Tensor gy = Tensor::zeros_like(y);
            const real inv = real(2) / static_cast<real>(y.size());
            parallel_for(y.size(), [&](long i) { gy[i] = inv * (y[i] - x[i]); });
            const Tensor gf = dec.backward(gy);
            enc.backward(gf);
            opt.step(all);
        }
    }

    // Stage 2: encoder frozen, generator trained on AdaIN targets.
    {
        auto dec_params = dec.params();
        nn::Adam opt(dec_params, cfg.lr);
        for (int step = 0; step < cfg.steps; ++step) {
            const Tensor cbatch = draw_batch(draw_rng);
            const Tensor sbatch = draw_batch(draw_rng);

            const Tensor fc = model.encode(cbatch);
            std::vector<Tensor> staps;
            enc.forward_taps(sbatch, false, taps, &staps);
            const Tensor& fs = staps.back();
            const Tensor t = adain(fc, fs, cfg.eps);

            dec.zero_grad();
            enc.zero_grad();
            const Tensor out = dec.forward(t, true);
            std::vector<Tensor> otaps;
            enc.forward_taps(out, true, taps, &otaps);

            // content loss against the AdaIN target
            const Tensor& fo = otaps.back();
            real closs = 0;
            Tensor gfo = Tensor::zeros_like(fo);
            {
                const real inv = real(1) / static_cast<real>(fo.size());
                closs = parallel_sum(fo.size(), [&](long i) {
                    const real d = fo[i] - t[i];
                    return d * d;
                }) * inv;
                parallel_for(fo.size(), [&](long i) { gfo[i] = 2 * inv * (fo[i] - t[i]); });
            }

            // style loss: per-stage mean/std matching against the style image
            real sloss = 0;
            std::vector<Tensor> tap_grads(taps.size());
            for (size_t si = 0; si < taps.size(); ++si) {
                const Tensor& o = otaps[si];
                const Tensor& s = staps[si];
                const int B = o.dim(0), C = o.dim(1);
                const long ocells = static_cast<long>(o.dim(2)) * o.dim(3);
                const long scells = static_cast<long>(s.dim(2)) * s.dim(3);
                std::vector<real> om(static_cast<size_t>(B) * C), osd(om.size());
                std::vector<real> sm(om.size()), ssd(om.size());
                kern::channel_stats(o.data(), B, C, ocells, cfg.eps, om.data(), osd.data());
                kern::channel_stats(s.data(), B, C, scells, cfg.eps, sm.data(), ssd.data());
                const real inv = real(1) / static_cast<real>(B * C);
                std::vector<real> dm(om.size()), ds(om.size());
                for (size_t i = 0; i < om.size(); ++i) {
                    const real em = om[i] - sm[i];
                    const real es = osd[i] - ssd[i];
                    sloss += (em * em + es * es) * inv;
                    dm[i] = 2 * inv * em * cfg.style_weight;
                    ds[i] = 2 * inv * es * cfg.style_weight;
                }
                tap_grads[si] = Tensor::zeros_like(o);
                kern::channel_stats_backward(o.data(), B, C, ocells, om.data(), osd.data(),
                                             dm.data(), ds.data(), tap_grads[si].data());
            }

            // fold content grad into the deepest tap, back out to the image
            for (long i = 0; i < gfo.size(); ++i) tap_grads.back()[i] += gfo[i];
            Tensor gy = Tensor::zeros_like(fo);
            const Tensor gout = enc.backward_with_taps(gy, taps, tap_grads);
            dec.backward(gout);
            opt.step(dec_params);

            if (loss_log)
                loss_log->push_back({closs, sloss, closs + cfg.style_weight * sloss});
        }
    }
    return model;
}

Tensor maybe_stylize(const Tensor& img, const ImagePool& style_pool, Rng& rng,
                     real prob, const StyleModel& model, bool* stylized) {
    if (stylized) *stylized = false;
    if (!rng.bernoulli(prob)) return img;
    if (style_pool.size == 0) {
        diagnostics().empty_style_pool++;
        return img;
    }
    const size_t idx = static_cast<size_t>(rng.uniform_int(style_pool.size));
    const real alpha = static_cast<real>(rng.uniform());
    Tensor style = style_pool.get(idx);
    if (style.dim(1) != model.config().image_size || style.dim(2) != model.config().image_size)
        style = resize_bilinear(style, model.config().image_size, model.config().image_size);
    if (stylized) *stylized = true;
    return model.stylize(img, style, alpha);
}

}  // namespace poseadapt
