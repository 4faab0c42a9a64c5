#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "poseadapt/data.hpp"
#include "poseadapt/teacher.hpp"
#include "test_util.hpp"

using namespace poseadapt;

namespace {

PoseNetConfig small_pose() {
    PoseNetConfig cfg;
    cfg.preset = "custom";
    cfg.input_size = 64;
    cfg.heatmap_size = 16;
    cfg.num_keypoints = 10;
    cfg.encoder_channels = {8, 12, 16};
    cfg.deconv_channels = {12};
    return cfg;
}

FitOptions small_fit(const std::string& out_dir) {
    FitOptions o;
    o.pose = small_pose();
    o.train.epochs = 1;
    o.train.iters_per_epoch = 2;
    o.train.batch_size = 4;
    o.train.warmup_supervised_epochs = 0;
    o.train.eta = 0.99;
    o.train.val_fraction = 0.25;
    o.ablation.style = false;
    o.aug.rotation = true;
    o.aug.translation = true;
    o.occlusion.patch_h = o.occlusion.patch_w = 8;
    o.out_dir = out_dir;
    return o;
}

struct Fixture {
    Fixture() : tmp("teacher") {
        SynthConfig cfg;
        cfg.seed = 5;
        cfg.image_size = 64;
        cfg.source_count = 16;
        cfg.target_count = 16;
        cfg.target.texture = "stripes";
        generate_synthetic(cfg, tmp.path());
        source.emplace(PoseDataset::load(tmp.sub("source")));
        target.emplace(PoseDataset::load(tmp.sub("target")));
    }
    testutil::TempDir tmp;
    std::optional<PoseDataset> source, target;
};

std::vector<size_t> iota_idx(size_t n) {
    std::vector<size_t> v(n);
    std::iota(v.begin(), v.end(), size_t{0});
    return v;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("ema boundaries and elementwise formula") {
    Rng rng(1);
    PoseNet teacher(small_pose(), rng);
    PoseNet student(small_pose(), rng);

    SUBCASE("eta = 1 leaves the teacher bitwise unchanged") {
        PoseNet before = teacher.clone();
        ema_update(teacher, student, 1.0);
        auto tb = before.params();
        auto ta = teacher.params();
        for (size_t i = 0; i < ta.size(); ++i)
            CHECK(testutil::bitwise_equal(*tb[i].value, *ta[i].value));
    }
    SUBCASE("eta = 0 copies the student bitwise") {
        ema_update(teacher, student, 0.0);
        auto ta = teacher.params();
        auto sa = student.params();
        for (size_t i = 0; i < ta.size(); ++i)
            CHECK(testutil::bitwise_equal(*ta[i].value, *sa[i].value));
    }
    SUBCASE("elementwise formula holds to 1e-9, in any parameter order") {
        std::vector<Tensor> t_before, s_before;
        for (auto& p : teacher.params()) t_before.push_back(*p.value);
        for (auto& p : student.params()) s_before.push_back(*p.value);
        ema_update(teacher, student, 0.999);
        auto ta = teacher.params();
        // reversed traversal: the update commutes with reindexing
        for (size_t ri = ta.size(); ri-- > 0;) {
            const Tensor& tb = t_before[ri];
            const Tensor& sb = s_before[ri];
            const Tensor& t = *ta[ri].value;
            for (long j = t.size(); j-- > 0;)
                CHECK(std::fabs(static_cast<double>(
                          t[j] - (real(0.999) * tb[j] + real(0.001) * sb[j]))) <= 1e-9);
        }
    }
    SUBCASE("scalar example: 0.999 * 1 + 0.001 * 0") {
        auto tp = teacher.params();
        auto sp = student.params();
        (*tp[0].value)[0] = 1.0;
        (*sp[0].value)[0] = 0.0;
        ema_update(teacher, student, 0.999);
        CHECK(std::fabs(static_cast<double>((*tp[0].value)[0]) - 0.999) <= 1e-9);
    }
}

TEST_CASE("confidence threshold: sort oracle, boundaries and ties") {
    CHECK(compute_confidence_threshold({0.9, 0.7, 0.5, 0.3}, 0.5) == doctest::Approx(0.7));
    CHECK(compute_confidence_threshold({0.9, 0.7, 0.5, 0.3}, 1.0) == doctest::Approx(0.3));
    // all equal: everything passes through ties
    const real tau = compute_confidence_threshold({0.4, 0.4, 0.4, 0.4}, 0.5);
    CHECK(tau == doctest::Approx(0.4));
    int passing = 0;
    for (real c : {0.4, 0.4, 0.4, 0.4})
        if (c >= tau) ++passing;
    CHECK(passing == 4);

    CHECK_THROWS_AS(compute_confidence_threshold({}, 0.5), std::runtime_error);

    // sort-and-index oracle on random lists
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<real> confs;
        const int n = 1 + static_cast<int>(rng.uniform_int(40));
        for (int i = 0; i < n; ++i) confs.push_back(static_cast<real>(rng.uniform()));
        const real p = static_cast<real>(rng.uniform(0.05, 1.0));
        const real t = compute_confidence_threshold(confs, p);
        std::vector<real> sorted = confs;
        std::sort(sorted.rbegin(), sorted.rend());
        const size_t m = std::min<size_t>(
            sorted.size(),
            std::max<size_t>(1, static_cast<size_t>(std::ceil(p * n - 1e-12))));
        CHECK(t == sorted[m - 1]);
    }
}

TEST_CASE("threshold monotonicity: larger p never passes fewer keypoints") {
    Rng rng(3);
    std::vector<real> confs;
    for (int i = 0; i < 64; ++i) confs.push_back(static_cast<real>(rng.uniform()));
    int prev = 0;
    for (double p : {0.1, 0.25, 0.5, 0.75, 1.0}) {
        const real tau = compute_confidence_threshold(confs, static_cast<real>(p));
        int passing = 0;
        for (real c : confs)
            if (c >= tau) ++passing;
        CHECK(passing >= prev);
        prev = passing;
    }
}

TEST_CASE("unsup_loss: confidence gate, identity case, loop oracle") {
    GaussianSpec spec;
    GeometricTransform ident;
    ident.width = ident.height = 64;

    auto mk = [&](double x, double y) {
        KeypointAnnotation a;
        a.coords = {{x, y}};
        a.visible = {1};
        return generate_heatmap(a, 64, 64, 16, 16, spec).map;
    };
    const Heatmap pseudo = mk(32, 32);
    const std::vector<uint8_t> bmask = {1};

    // all confidences below tau -> 0
    CHECK(unsup_loss(mk(20, 20), pseudo, {0.5}, 0.9, ident, ident, bmask) == real(0));
    // identity transforms, student == pseudo -> 0
    CHECK(unsup_loss(pseudo, pseudo, {0.95}, 0.9, ident, ident, bmask) == real(0));

    // hand-built 4x4 grids, one passing channel, scalar loop oracle
    Heatmap s({2, 4, 4}), q({2, 4, 4});
    Rng rng(4);
    for (long i = 0; i < s.size(); ++i) {
        s[i] = static_cast<real>(rng.uniform());
        q[i] = static_cast<real>(rng.uniform());
    }
    GeometricTransform ident4;
    ident4.width = ident4.height = 4;
    real oracle = 0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const real d = s.at3(1, r, c) - q.at3(1, r, c);
            oracle += d * d;
        }
    oracle /= 16;
    const real loss = unsup_loss(s, q, {0.1, 0.95}, 0.9, ident4, ident4, {1, 1});
    CHECK(loss == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("lr schedule: drops at the configured epochs") {
    TrainConfig cfg;
    CHECK(cfg.lr_at(0) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(cfg.lr_at(44) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(cfg.lr_at(45) == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK(cfg.lr_at(60) == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(cfg.lr_at(69) == doctest::Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.warmup_supervised_epochs = 70;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.p = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.eta = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE_FIXTURE(Fixture, "warmup gates the unsupervised branch") {
    testutil::TempDir out("warmup");
    FitOptions o = small_fit(out.sub("run"));
    o.train.epochs = 4;
    o.train.warmup_supervised_epochs = 2;
    Trainer tr(*source, *target, o);
    Rng rng(9);
    BatchRecord r0 = tr.step(iota_idx(4), iota_idx(4), 0, rng);
    CHECK(r0.unsup == real(0));
    CHECK(r0.tau_conf == real(0));
    CHECK_FALSE(tr.teacher_initialized());
    BatchRecord r2 = tr.step(iota_idx(4), iota_idx(4), 2, rng);
    CHECK(tr.teacher_initialized());
    CHECK(std::isfinite(r2.unsup));
    CHECK(r2.total == doctest::Approx(r2.sup + o.train.lambda_unsup * r2.unsup).epsilon(1e-6));
}

TEST_CASE_FIXTURE(Fixture, "lambda 0 gives the same parameter update as supervised-only") {
    testutil::TempDir out("lambda0");
    FitOptions a = small_fit(out.sub("a"));
    a.train.lambda_unsup = 0;
    a.train.warmup_supervised_epochs = 0;
    FitOptions b = small_fit(out.sub("b"));
    b.ablation.mean_teacher = false;
    b.train.warmup_supervised_epochs = 0;

    Trainer ta(*source, *target, a);
    Trainer tb(*source, *target, b);
    Rng ra(7), rb(7);
    ta.step(iota_idx(4), iota_idx(4), 0, ra);
    tb.step(iota_idx(4), iota_idx(4), 0, rb);
    auto pa = ta.student().params();
    auto pb = tb.student().params();
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i)
        CHECK(testutil::bitwise_equal(*pa[i].value, *pb[i].value));
}

TEST_CASE_FIXTURE(Fixture, "teacher never receives gradient: exact EMA of the student") {
    testutil::TempDir out("teachergrad");
    FitOptions o = small_fit(out.sub("run"));
    o.train.warmup_supervised_epochs = 0;
    o.train.eta = 0.95;
    Trainer tr(*source, *target, o);
    Rng rng(11);
    tr.step(iota_idx(4), iota_idx(4), 0, rng);  // initializes the teacher

    std::vector<Tensor> t_pre;
    for (auto& p : tr.teacher().params()) t_pre.push_back(*p.value);
    tr.step(iota_idx(4), iota_idx(4), 0, rng);
    auto t_post = tr.teacher().params();
    auto s_post = tr.student().params();
    const real eta = real(0.95);
    const real one_minus_eta = real(1) - eta;
    for (size_t i = 0; i < t_post.size(); ++i) {
        const Tensor& tp = *t_post[i].value;
        const Tensor& sp = *s_post[i].value;
        for (long j = 0; j < tp.size(); ++j) {
            const real expect = eta * t_pre[i][j] + one_minus_eta * sp[j];
            REQUIRE(tp[j] == expect);  // bitwise: no optimizer contamination
        }
    }
}

TEST_CASE_FIXTURE(Fixture, "pseudo-label mean activation is pinned while normalization is on") {
    testutil::TempDir out("pin");
    FitOptions o = small_fit(out.sub("run"));
    o.train.warmup_supervised_epochs = 0;
    Trainer tr(*source, *target, o);
    Rng rng(13);
    const BatchRecord r1 = tr.step(iota_idx(4), iota_idx(4), 0, rng);
    const BatchRecord r2 = tr.step(iota_idx(4), iota_idx(4), 0, rng);
    CHECK(r1.pseudo_mean_act == doctest::Approx(r1.gt_gauss_mean_act).epsilon(1e-9));
    CHECK(std::fabs(static_cast<double>(r1.pseudo_mean_act - r2.pseudo_mean_act)) <= 1e-6);
}

TEST_CASE_FIXTURE(Fixture, "fit smoke run writes checkpoint, metrics and pck table") {
    testutil::TempDir out("fitsmoke");
    FitOptions o = small_fit(out.sub("run"));
    const FitResult res = fit(*source, *target, o);
    CHECK(res.epochs_run == 1);
    CHECK(std::ifstream(res.checkpoint_path).good());
    const std::string metrics = slurp(res.metrics_path);
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 2);  // 2 iters
    CHECK(metrics.find("val_pck") != std::string::npos);
    CHECK(std::ifstream(out.sub("run/pck.txt")).good());
    CHECK(std::ifstream(out.sub("run/pck.csv")).good());

    // checkpoint round trip
    const PoseCheckpoint ck = load_pose_checkpoint(res.checkpoint_path);
    CHECK(ck.config.num_keypoints == 10);
    CHECK(ck.has_teacher);
    CHECK(ck.epoch == 1);
}

TEST_CASE_FIXTURE(Fixture, "fit is byte-deterministic for a fixed seed") {
    testutil::TempDir out("fitdet");
    FitOptions a = small_fit(out.sub("a"));
    a.train.epochs = 2;
    a.train.warmup_supervised_epochs = 1;
    FitOptions b = small_fit(out.sub("b"));
    b.train.epochs = 2;
    b.train.warmup_supervised_epochs = 1;
    fit(*source, *target, a);
    fit(*source, *target, b);
    const std::string ma = slurp(out.sub("a/metrics.jsonl"));
    CHECK(!ma.empty());
    CHECK(ma == slurp(out.sub("b/metrics.jsonl")));
}

TEST_CASE_FIXTURE(Fixture, "a full step is finite and keeps the loss identity") {
    testutil::TempDir out("identity");
    FitOptions o = small_fit(out.sub("run"));
    o.train.warmup_supervised_epochs = 0;
    o.train.lambda_unsup = 0.7;
    Trainer tr(*source, *target, o);
    Rng rng(17);
    const BatchRecord r = tr.step(iota_idx(4), iota_idx(4), 0, rng);
    CHECK(std::isfinite(r.sup));
    CHECK(std::isfinite(r.unsup));
    CHECK(r.total == doctest::Approx(r.sup + real(0.7) * r.unsup).epsilon(1e-6));
    CHECK(r.pass_fraction >= 0);
    CHECK(r.pass_fraction <= 1);
}
