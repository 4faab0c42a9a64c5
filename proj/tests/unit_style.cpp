#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "poseadapt/core/diagnostics.hpp"
#include "poseadapt/kernels/kernels.hpp"
#include "poseadapt/style.hpp"
#include "test_util.hpp"

using namespace poseadapt;

namespace {

StyleModelConfig small_config() {
    StyleModelConfig cfg;
    cfg.image_size = 32;
    cfg.encoder_channels = {8, 12, 16, 24};
    cfg.decoder_channels = {16, 12, 8, 8};
    cfg.autoencoder_steps = 40;
    cfg.steps = 200;
    cfg.batch_size = 4;
    return cfg;
}

ImagePool smooth_pool(uint64_t seed, size_t n, int size, double hue) {
    // procedural smooth images; get() is pure in the index
    return ImagePool{[seed, size, hue](size_t i) {
                         Rng rng(seed + i);
                         const double fx = rng.uniform(0.05, 0.3), fy = rng.uniform(0.05, 0.3);
                         const double ph = rng.uniform(0, 6.28);
                         Tensor img({3, size, size});
                         for (int c = 0; c < 3; ++c)
                             for (int y = 0; y < size; ++y)
                                 for (int x = 0; x < size; ++x)
                                     img.data()[(static_cast<long>(c) * size + y) * size + x] =
                                         static_cast<real>(0.5 + 0.3 * std::sin(fx * x + ph + c * hue) *
                                                                     std::cos(fy * y));
                         return img;
                     },
                     n};
}

void stats_of(const Tensor& t, int B, int C, std::vector<real>* mean, std::vector<real>* sd) {
    const long cells = static_cast<long>(t.dim(2)) * t.dim(3);
    mean->assign(static_cast<size_t>(B) * C, 0);
    sd->assign(static_cast<size_t>(B) * C, 0);
    kern::channel_stats(t.data(), B, C, cells, 1e-5, mean->data(), sd->data());
}

}  // namespace

TEST_CASE("adain with style == content is the identity") {
    Rng rng(1);
    Tensor x = testutil::randn({2, 5, 7, 7}, rng);
    Tensor out = adain(x, x);
    CHECK(testutil::max_abs_diff(out, x) <= 1e-6);
}

TEST_CASE("adain matches the style statistics per channel") {
    Rng rng(2);
    Tensor c = testutil::randn({2, 6, 9, 9}, rng);
    Tensor s = testutil::randn({2, 6, 5, 5}, rng);
    for (long i = 0; i < s.size(); ++i) s[i] = s[i] * real(1.7) + real(0.4);
    Tensor out = adain(c, s);
    std::vector<real> mo, so, ms, ss;
    stats_of(out, 2, 6, &mo, &so);
    stats_of(s, 2, 6, &ms, &ss);
    for (size_t i = 0; i < mo.size(); ++i) {
        CHECK(std::fabs(static_cast<double>(mo[i] - ms[i])) <= 1e-5);
        CHECK(std::fabs(static_cast<double>(so[i] - ss[i])) <= 1e-5);
    }
}

TEST_CASE("adain on a constant content channel stays finite via the eps stabilizer") {
    Tensor c({1, 1, 4, 4});
    c.fill(0.7);  // sigma_content = sqrt(eps)
    Tensor s({1, 1, 4, 4});
    for (long i = 0; i < s.size(); ++i) s[i] = static_cast<real>(i) * real(0.1);
    Tensor out = adain(c, s);
    for (long i = 0; i < out.size(); ++i) CHECK(std::isfinite(out[i]));
    // hand arithmetic: content deviation is 0, so out == style mean everywhere
    real smean = 0;
    for (long i = 0; i < s.size(); ++i) smean += s[i];
    smean /= 16;
    for (long i = 0; i < out.size(); ++i)
        CHECK(out[i] == doctest::Approx(smean).epsilon(1e-9));
}

TEST_CASE("adain rejects channel mismatch") {
    Rng rng(3);
    Tensor c = testutil::randn({1, 4, 6, 6}, rng);
    Tensor s = testutil::randn({1, 5, 6, 6}, rng);
    CHECK_THROWS_AS(adain(c, s), std::invalid_argument);
}

TEST_CASE("adain is idempotent in statistics") {
    Rng rng(4);
    Tensor x = testutil::randn({1, 4, 8, 8}, rng);
    Tensor y = testutil::randn({1, 4, 8, 8}, rng);
    Tensor once = adain(x, y);
    Tensor twice = adain(once, y);
    std::vector<real> m1, s1, m2, s2;
    stats_of(once, 1, 4, &m1, &s1);
    stats_of(twice, 1, 4, &m2, &s2);
    for (size_t i = 0; i < m1.size(); ++i) {
        CHECK(std::fabs(static_cast<double>(m1[i] - m2[i])) <= 1e-5);
        CHECK(std::fabs(static_cast<double>(s1[i] - s2[i])) <= 1e-5);
    }
}

TEST_CASE("stylize feature algebra: alpha boundaries are exact") {
    Rng rng(5);
    StyleModelConfig cfg = small_config();
    StyleModel model(cfg, rng);
    Tensor c({1, 3, 32, 32}), s({1, 3, 32, 32});
    for (long i = 0; i < c.size(); ++i) {
        c[i] = static_cast<real>(rng.uniform());
        s[i] = static_cast<real>(rng.uniform());
    }
    const Tensor fc = model.encode(c);
    const Tensor f0 = model.stylize_features(c, s, 0.0);
    CHECK(testutil::bitwise_equal(f0, fc));

    const Tensor fs = model.encode(s);
    const Tensor t = adain(fc, fs, cfg.eps);
    const Tensor f1 = model.stylize_features(c, s, 1.0);
    CHECK(testutil::bitwise_equal(f1, t));

    CHECK_THROWS_AS(model.stylize_features(c, s, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(model.stylize_features(c, s, -0.1), std::invalid_argument);
}

TEST_CASE("untrained stylize returns an image of the input shape") {
    Rng rng(6);
    StyleModel model(small_config(), rng);
    Tensor c = testutil::rand01({3, 32, 32}, rng);
    Tensor s = testutil::rand01({3, 32, 32}, rng);
    Tensor out = model.stylize(c, s, 0.5);
    REQUIRE(out.rank() == 3);
    CHECK(out.dim(0) == 3);
    CHECK(out.dim(1) == 32);
    CHECK(out.dim(2) == 32);
    for (long i = 0; i < out.size(); ++i) {
        CHECK(out[i] >= 0);
        CHECK(out[i] <= 1);
    }
}

TEST_CASE("pretraining decreases the total loss between first and last ten steps") {
    StyleModelConfig cfg = small_config();
    auto src = smooth_pool(100, 40, 32, 0.3);
    auto tgt = smooth_pool(900, 40, 32, 2.1);
    std::vector<StylePretrainRecord> log;
    StyleModel model = style_pretrain(src, tgt, cfg, &log);
    REQUIRE(static_cast<int>(log.size()) == cfg.steps);
    real first = 0, last = 0;
    for (int i = 0; i < 10; ++i) {
        first += log[static_cast<size_t>(i)].total;
        last += log[log.size() - 10 + static_cast<size_t>(i)].total;
    }
    CHECK(last / 10 < first / 10);
}

TEST_CASE("zero style weight reduces to feature reconstruction with 0-weighted style term") {
    StyleModelConfig cfg = small_config();
    cfg.autoencoder_steps = 10;
    cfg.steps = 20;
    cfg.style_weight = 0;
    auto src = smooth_pool(100, 20, 32, 0.3);
    auto tgt = smooth_pool(900, 20, 32, 2.1);
    std::vector<StylePretrainRecord> log;
    style_pretrain(src, tgt, cfg, &log);
    for (const auto& r : log) CHECK(r.total == r.content);
}

TEST_CASE("pretraining is deterministic for a fixed seed") {
    StyleModelConfig cfg = small_config();
    cfg.autoencoder_steps = 15;
    cfg.steps = 25;
    auto src = smooth_pool(100, 20, 32, 0.3);
    auto tgt = smooth_pool(900, 20, 32, 2.1);
    std::vector<StylePretrainRecord> log1, log2;
    style_pretrain(src, tgt, cfg, &log1);
    style_pretrain(src, tgt, cfg, &log2);
    REQUIRE(log1.size() == log2.size());
    for (size_t i = 0; i < log1.size(); ++i) {
        CHECK(log1[i].content == log2[i].content);
        CHECK(log1[i].style == log2[i].style);
        CHECK(log1[i].total == log2[i].total);
    }
}

TEST_CASE("pretraining rejects empty datasets") {
    StyleModelConfig cfg = small_config();
    auto src = smooth_pool(100, 20, 32, 0.3);
    ImagePool empty{nullptr, 0};
    CHECK_THROWS_AS(style_pretrain(src, empty, cfg, nullptr), std::invalid_argument);
}

TEST_CASE("maybe_stylize: prob boundaries, empty pool and alpha distribution") {
    Rng rng(7);
    StyleModel model(small_config(), rng);
    Tensor img = testutil::rand01({3, 32, 32}, rng);
    auto pool = smooth_pool(55, 16, 32, 1.0);

    Rng r0(1);
    for (int i = 0; i < 20; ++i) {
        Tensor out = maybe_stylize(img, pool, r0, 0.0, model);
        CHECK(testutil::bitwise_equal(out, img));
    }

    ImagePool empty{nullptr, 0};
    const auto before = diagnostics().empty_style_pool.load();
    Rng r1(2);
    Tensor out = maybe_stylize(img, empty, r1, 1.0, model);
    CHECK(testutil::bitwise_equal(out, img));
    CHECK(diagnostics().empty_style_pool.load() == before + 1);

    // stylization frequency at prob 0.5 over 10k draws: 0.5 +- 0.02.
    // alpha ~ U(0,1): Kolmogorov-Smirnov on 1k draws at p > 0.01.
    Rng r2(3);
    int count = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (r2.bernoulli(0.5)) ++count;
    CHECK(std::fabs(count / static_cast<double>(n) - 0.5) <= 0.02);

    Rng r3(4);
    std::vector<double> alphas;
    for (int i = 0; i < 1000; ++i) alphas.push_back(r3.uniform());
    std::sort(alphas.begin(), alphas.end());
    double d = 0;
    for (size_t i = 0; i < alphas.size(); ++i) {
        const double lo = static_cast<double>(i) / alphas.size();
        const double hi = static_cast<double>(i + 1) / alphas.size();
        d = std::max({d, std::fabs(alphas[i] - lo), std::fabs(alphas[i] - hi)});
    }
    // critical KS value at alpha=0.01 for n=1000
    CHECK(d < 1.628 / std::sqrt(1000.0));
}

TEST_CASE("checkpoint round trip preserves the model bitwise at f32 precision") {
    Rng rng(8);
    StyleModel model(small_config(), rng);
    testutil::TempDir tmp("style_ckpt");
    const std::string path = tmp.sub("style.bin");
    model.save(path);
    StyleModel loaded = StyleModel::load(path);
    CHECK(loaded.config().image_size == 32);
    Tensor c = testutil::rand01({3, 32, 32}, rng);
    Tensor s = testutil::rand01({3, 32, 32}, rng);
    // parameters round-trip through f32; outputs agree to that precision
    Tensor a = model.stylize(c, s, 0.7);
    Tensor b = loaded.stylize(c, s, 0.7);
    CHECK(testutil::max_abs_diff(a, b) <= 1e-4);
}

TEST_CASE("encoder stays bit-identical through generator training") {
    StyleModelConfig cfg = small_config();
    cfg.autoencoder_steps = 5;
    cfg.steps = 0;
    auto src = smooth_pool(100, 10, 32, 0.3);
    auto tgt = smooth_pool(900, 10, 32, 2.1);
    // run the full pretrain, then retrain only stage two on a copy: encoder
    // parameters must not move during stage two
    StyleModel m1 = style_pretrain(src, tgt, cfg, nullptr);
    std::vector<Tensor> enc_before;
    for (auto& p : m1.encoder().params()) enc_before.push_back(*p.value);
    StyleModelConfig cfg2 = cfg;
    cfg2.steps = 30;
    StyleModel m2 = style_pretrain(src, tgt, cfg2, nullptr);
    auto enc_after = m2.encoder().params();
    REQUIRE(enc_before.size() == enc_after.size());
    for (size_t i = 0; i < enc_before.size(); ++i)
        CHECK(testutil::bitwise_equal(enc_before[i], *enc_after[i].value));
}
