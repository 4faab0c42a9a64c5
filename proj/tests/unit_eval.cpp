#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "poseadapt/data.hpp"
#include "poseadapt/eval.hpp"
#include "test_util.hpp"

using namespace poseadapt;

namespace {

KeypointSchema two_group_schema() {
    KeypointSchema s;
    s.keypoint_names = {"a", "b", "c"};
    s.groups = {{"AB", {"a", "b"}}, {"C", {"c"}}};
    return s;
}

KeypointAnnotation ann3(double x0, double y0, double x1, double y1, double x2, double y2) {
    KeypointAnnotation a;
    a.coords = {{x0, y0}, {x1, y1}, {x2, y2}};
    a.visible = {1, 1, 1};
    return a;
}

}  // namespace

TEST_CASE("perfect predictions give 100.0 overall") {
    auto schema = two_group_schema();
    std::vector<KeypointAnnotation> gts = {ann3(10, 10, 50, 50, 100, 100)};
    const PCKReport rep = pck(gts, gts, 0.05, 256, 256, schema);
    CHECK(rep.overall == doctest::Approx(100.0));
    CHECK(rep.group_ratios[0].second == doctest::Approx(100.0));
}

TEST_CASE("boundary is inclusive: exactly 12.8 px off counts at alpha 0.05 on 256") {
    auto schema = two_group_schema();
    std::vector<KeypointAnnotation> gts = {ann3(100, 100, 50, 50, 30, 30)};
    std::vector<KeypointAnnotation> preds = {ann3(100 + 12.8, 100, 50, 50 + 12.8001, 30, 30)};
    const PCKReport rep = pck(preds, gts, 0.05, 256, 256, schema);
    CHECK(rep.correct[0] == 1);  // exactly at threshold
    CHECK(rep.correct[1] == 0);  // just beyond
    CHECK(rep.correct[2] == 1);
}

TEST_CASE("invisible ground truth is excluded from both counts") {
    auto schema = two_group_schema();
    KeypointAnnotation gt = ann3(10, 10, 50, 50, 100, 100);
    gt.visible[1] = 0;
    std::vector<KeypointAnnotation> gts = {gt};
    std::vector<KeypointAnnotation> preds = {ann3(10, 10, 999, 999, 100, 100)};
    const PCKReport rep = pck(preds, gts, 0.05, 256, 256, schema);
    CHECK(rep.total[1] == 0);
    CHECK(rep.overall == doctest::Approx(100.0));
}

TEST_CASE("pck equals a brute-force oracle on 50 random instances") {
    Rng rng(21);
    auto schema = two_group_schema();
    std::vector<KeypointAnnotation> preds, gts;
    for (int i = 0; i < 50; ++i) {
        KeypointAnnotation g, p;
        for (int k = 0; k < 3; ++k) {
            g.coords.emplace_back(rng.uniform(0, 256), rng.uniform(0, 256));
            g.visible.push_back(rng.bernoulli(0.85) ? 1 : 0);
            p.coords.emplace_back(g.coords.back().first + rng.uniform(-25, 25),
                                  g.coords.back().second + rng.uniform(-25, 25));
            p.visible.push_back(1);
        }
        gts.push_back(g);
        preds.push_back(p);
    }
    const PCKReport rep = pck(preds, gts, 0.05, 256, 256, schema);

    // scalar double-loop oracle
    const double thr = 0.05 * 256;
    long correct[3] = {0, 0, 0}, total[3] = {0, 0, 0};
    for (size_t i = 0; i < gts.size(); ++i)
        for (int k = 0; k < 3; ++k) {
            if (!gts[i].visible[static_cast<size_t>(k)]) continue;
            total[k]++;
            const double dx = preds[i].coords[static_cast<size_t>(k)].first -
                              gts[i].coords[static_cast<size_t>(k)].first;
            const double dy = preds[i].coords[static_cast<size_t>(k)].second -
                              gts[i].coords[static_cast<size_t>(k)].second;
            if (std::sqrt(dx * dx + dy * dy) <= thr) correct[k]++;
        }
    long tc = 0, tt = 0;
    for (int k = 0; k < 3; ++k) {
        CHECK(rep.correct[static_cast<size_t>(k)] == correct[k]);
        CHECK(rep.total[static_cast<size_t>(k)] == total[k]);
        tc += correct[k];
        tt += total[k];
    }
    CHECK(rep.overall == doctest::Approx(100.0 * tc / tt));
}

TEST_CASE("pck is scale-consistent and monotone in alpha") {
    Rng rng(22);
    auto schema = two_group_schema();
    std::vector<KeypointAnnotation> preds, gts;
    for (int i = 0; i < 20; ++i) {
        KeypointAnnotation g, p;
        for (int k = 0; k < 3; ++k) {
            g.coords.emplace_back(rng.uniform(0, 256), rng.uniform(0, 256));
            g.visible.push_back(1);
            p.coords.emplace_back(g.coords.back().first + rng.uniform(-30, 30),
                                  g.coords.back().second + rng.uniform(-30, 30));
            p.visible.push_back(1);
        }
        gts.push_back(g);
        preds.push_back(p);
    }
    const PCKReport r1 = pck(preds, gts, 0.05, 256, 256, schema);

    auto scaled = [](const std::vector<KeypointAnnotation>& in, double f) {
        std::vector<KeypointAnnotation> out = in;
        for (auto& a : out)
            for (auto& c : a.coords) {
                c.first *= f;
                c.second *= f;
            }
        return out;
    };
    const PCKReport r2 = pck(scaled(preds, 3), scaled(gts, 3), 0.05, 768, 768, schema);
    CHECK(r1.overall == doctest::Approx(r2.overall));

    double prev = -1;
    for (double alpha : {0.01, 0.03, 0.05, 0.1, 0.2}) {
        const PCKReport r = pck(preds, gts, alpha, 256, 256, schema);
        CHECK(r.overall >= prev);
        prev = r.overall;
    }
}

TEST_CASE("render_report formats groups in declared order plus All") {
    auto schema = two_group_schema();
    std::vector<KeypointAnnotation> gts = {ann3(10, 10, 50, 50, 100, 100)};
    const PCKReport rep = pck(gts, gts, 0.05, 256, 256, schema);

    const std::string table = render_report(rep, false);
    CHECK(table.find("AB") != std::string::npos);
    CHECK(table.find("C") != std::string::npos);
    CHECK(table.find("All") != std::string::npos);
    CHECK(table.find("100.0") != std::string::npos);

    const std::string csv = render_report(rep, true);
    CHECK(csv == "AB,C,All\n100.0,100.0,100.0\n");
}

TEST_CASE("unknown group member is rejected") {
    KeypointSchema schema;
    schema.keypoint_names = {"a"};
    schema.groups = {{"G", {"missing"}}};
    std::vector<KeypointAnnotation> one(1);
    one[0].coords = {{1, 1}};
    one[0].visible = {1};
    CHECK_THROWS(pck(one, one, 0.05, 64, 64, schema));
}

TEST_CASE("evaluate_model: oracle-style and constant-centre predictors") {
    Rng rng(23);
    testutil::TempDir tmp("eval_model");
    SynthConfig scfg;
    scfg.seed = 11;
    scfg.image_size = 64;
    scfg.source_count = 12;
    scfg.target_count = 4;
    generate_synthetic(scfg, tmp.path());
    PoseDataset ds = PoseDataset::load(tmp.sub("source"));

    // decode-of-ground-truth-heatmap oracle: quantization loss only
    GaussianSpec gspec;
    std::vector<KeypointAnnotation> preds, gts;
    for (size_t i = 0; i < ds.size(); ++i) {
        const auto& gt = ds.annotation(i);
        gts.push_back(gt);
        auto g = generate_heatmap(gt, 64, 64, 32, 32, gspec);
        preds.push_back(decode_heatmap(g.map, 64, 64));
    }
    const PCKReport oracle = pck(preds, gts, 0.05, 64, 64, ds.schema());
    CHECK(oracle.overall >= 99.0);

    // a real model run end to end: report must be well-formed and repeatable
    PoseNetConfig pcfg;
    pcfg.preset = "custom";
    pcfg.input_size = 64;
    pcfg.heatmap_size = 16;
    pcfg.num_keypoints = 10;
    pcfg.encoder_channels = {8, 12, 16};
    pcfg.deconv_channels = {12};
    PoseNet net(pcfg, rng);
    std::vector<size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    const PCKReport r1 = evaluate_model(net, ds, idx, gts, 0.05);
    const PCKReport r2 = evaluate_model(net, ds, idx, gts, 0.05);
    CHECK(r1.overall == r2.overall);
    CHECK(r1.group_ratios.size() == ds.schema().groups.size());
    for (size_t k = 0; k < r1.correct.size(); ++k) CHECK(r1.correct[k] == r2.correct[k]);
}
