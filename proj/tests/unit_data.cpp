#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "poseadapt/data.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace poseadapt;

namespace {

SynthConfig small_synth(uint64_t seed = 3) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.image_size = 64;
    cfg.source_count = 10;
    cfg.target_count = 8;
    cfg.target.texture = "stripes";
    cfg.target.bone_color = {0.5, 0.15, 0.1};
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("generate + load round trip, schema and labels") {
    testutil::TempDir tmp("data_roundtrip");
    generate_synthetic(small_synth(), tmp.path());

    PoseDataset src = PoseDataset::load(tmp.sub("source"));
    CHECK(src.size() == 10);
    CHECK(src.schema().num_keypoints() == 10);
    CHECK(src.labeled(0));
    CHECK(src.domain(0) == "source");
    const auto& ann = src.annotation(0);
    CHECK(ann.num_keypoints() == 10);

    PoseDataset tgt = PoseDataset::load(tmp.sub("target"));
    CHECK(tgt.size() == 8);
    CHECK_FALSE(tgt.labeled(0));

    Tensor img = src.image(0);
    CHECK(img.dim(0) == 3);
    CHECK(img.dim(1) == 64);
    CHECK(img.dim(2) == 64);
}

TEST_CASE("trainer-facing view never exposes target annotations") {
    testutil::TempDir tmp("data_noleak");
    generate_synthetic(small_synth(), tmp.path());
    PoseDataset tgt = PoseDataset::load(tmp.sub("target"));
    CHECK_THROWS_AS(tgt.annotation(0), std::logic_error);
    // the held-out file is reachable only through the evaluation loader
    const auto gts = load_eval_annotations(tmp.sub("target"));
    CHECK(gts.size() == 8);
    CHECK(gts[0].num_keypoints() == 10);
}

TEST_CASE("same seed gives byte-identical manifests, different seeds differ") {
    testutil::TempDir a("data_det_a"), b("data_det_b"), c("data_det_c");
    generate_synthetic(small_synth(7), a.path());
    generate_synthetic(small_synth(7), b.path());
    generate_synthetic(small_synth(8), c.path());
    CHECK(slurp(a.sub("source/manifest.json")) == slurp(b.sub("source/manifest.json")));
    CHECK(slurp(a.sub("target/annotations_eval.json")) == slurp(b.sub("target/annotations_eval.json")));
    CHECK(slurp(a.sub("source/images/000000.png")) == slurp(b.sub("source/images/000000.png")));
    CHECK(slurp(a.sub("source/manifest.json")) != slurp(c.sub("source/manifest.json")));
}

TEST_CASE("manifest write(load(write)) is byte-idempotent") {
    testutil::TempDir tmp("data_idem");
    generate_synthetic(small_synth(), tmp.path());
    PoseDataset src = PoseDataset::load(tmp.sub("source"));
    const std::string again = tmp.sub("source_again");
    fs::create_directories(fs::path(again) / "images");
    // keep image references valid in the re-written root
    for (const auto& r : src.samples())
        fs::copy_file(fs::path(tmp.sub("source")) / r.image, fs::path(again) / r.image);
    write_manifest(again, src.schema(), src.image_w(), src.image_h(), src.samples());
    CHECK(slurp(tmp.sub("source/manifest.json")) == slurp((fs::path(again) / "manifest.json").string()));
}

TEST_CASE("validation errors name the offending sample") {
    testutil::TempDir tmp("data_badk");
    generate_synthetic(small_synth(), tmp.path());
    // truncate sample 3's keypoints to 7 entries
    const std::string mpath = tmp.sub("source/manifest.json");
    auto j = nlohmann::ordered_json::parse(slurp(mpath));
    auto& kps = j["samples"][3]["keypoints"];
    while (kps.size() > 7) kps.erase(kps.size() - 1);
    {
        std::ofstream os(mpath);
        os << j.dump(2) << "\n";
    }
    try {
        PoseDataset::load(tmp.sub("source"));
        FAIL("expected a validation error");
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sample 3") != std::string::npos);
        CHECK(msg.find("7 keypoints") != std::string::npos);
    }
}

TEST_CASE("missing manifest and missing image files are load errors") {
    testutil::TempDir tmp("data_missing");
    CHECK_THROWS(PoseDataset::load(tmp.path()));

    generate_synthetic(small_synth(), tmp.path());
    fs::remove(fs::path(tmp.sub("source")) / "images/000002.png");
    CHECK_THROWS(PoseDataset::load(tmp.sub("source")));
}

TEST_CASE("rendered joint markers re-detect at the annotated coordinates") {
    // centroid of marker-coloured pixels around each sufficiently isolated
    // joint must sit within 1 px of the manifest coordinate
    Rng rng(42);
    DomainSynthConfig d;  // plain background, default colours
    d.noise_std = 0;
    d.color_jitter = 0;
    int checked = 0;
    for (int trial = 0; trial < 8; ++trial) {
        Rng srng = rng.derive(static_cast<uint64_t>(trial));
        SynthSample s = render_synth_sample(d, 128, srng);
        const int S = 128;
        const long cells = static_cast<long>(S) * S;
        for (size_t k = 0; k < s.ann.coords.size(); ++k) {
            const auto [jx, jy] = s.ann.coords[k];
            // isolation: no other joint within 14 px
            bool isolated = true;
            for (size_t o = 0; o < s.ann.coords.size(); ++o) {
                if (o == k) continue;
                const double dx = s.ann.coords[o].first - jx;
                const double dy = s.ann.coords[o].second - jy;
                if (dx * dx + dy * dy < 14 * 14) isolated = false;
            }
            if (!isolated || jx < 10 || jx > S - 10 || jy < 10 || jy > S - 10) continue;

            double wsum = 0, xsum = 0, ysum = 0;
            for (int y = static_cast<int>(jy) - 8; y <= static_cast<int>(jy) + 8; ++y) {
                for (int x = static_cast<int>(jx) - 8; x <= static_cast<int>(jx) + 8; ++x) {
                    const double r = s.image.data()[0 * cells + y * S + x];
                    const double g = s.image.data()[1 * cells + y * S + x];
                    const double b = s.image.data()[2 * cells + y * S + x];
                    const double dr = r - d.joint_color[0], dg = g - d.joint_color[1],
                                 db = b - d.joint_color[2];
                    if (dr * dr + dg * dg + db * db > 0.02) continue;
                    wsum += 1;
                    xsum += x;
                    ysum += y;
                }
            }
            if (wsum < 4) continue;
            ++checked;
            CHECK(std::fabs(xsum / wsum - jx) <= 1.0);
            CHECK(std::fabs(ysum / wsum - jy) <= 1.0);
        }
    }
    CHECK(checked >= 10);
}

TEST_CASE("degenerate figure scale is a configuration error") {
    SynthConfig cfg = small_synth();
    cfg.source.scale_min = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("split: exact sizes, determinism, disjoint exhaustive partitions") {
    auto parts = split_dataset(100, {0.8, 0.2}, 5);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].size() == 80);
    CHECK(parts[1].size() == 20);

    auto again = split_dataset(100, {0.8, 0.2}, 5);
    CHECK(parts[0] == again[0]);
    CHECK(parts[1] == again[1]);

    std::set<size_t> all;
    for (const auto& p : parts) all.insert(p.begin(), p.end());
    CHECK(all.size() == 100);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 99);

    CHECK_THROWS_AS(split_dataset(10, {0.5, 0.3}, 1), std::invalid_argument);
}
