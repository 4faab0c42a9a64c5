#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "poseadapt/cli.hpp"
#include "poseadapt/config.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace poseadapt;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

void write_json(const std::string& path, const json& j) {
    std::ofstream os(path);
    os << j.dump(2) << "\n";
}

json small_synth_json() {
    json j;
    j["seed"] = 9;
    j["image_size"] = 64;
    j["source_count"] = 14;
    j["target_count"] = 14;
    j["target"] = {{"texture", "stripes"}, {"bone_color", {0.5, 0.15, 0.1}}};
    return j;
}

json small_experiment_json(const std::string& data_root, const std::string& out_dir) {
    json j;
    j["out_dir"] = out_dir;
    j["data"] = {{"source", data_root + "/source"}, {"target", data_root + "/target"}};
    j["pose"] = {{"input_size", 64},
                 {"heatmap_size", 16},
                 {"num_keypoints", 10},
                 {"encoder_channels", {8, 12, 16}},
                 {"deconv_channels", {12}}};
    j["train"] = {{"epochs", 1},
                  {"iters_per_epoch", 2},
                  {"batch_size", 4},
                  {"warmup_supervised_epochs", 0},
                  {"val_fraction", 0.25},
                  {"seed", 1}};
    j["augmentation"] = {{"enabled", {"rotation", "translation"}}};
    j["occlusion"] = {{"patch_size", {8, 8}}};
    j["ablation"] = {{"style", false}};
    return j;
}

struct CliFixture {
    CliFixture() : tmp("cli") {
        write_json(tmp.sub("synth.json"), small_synth_json());
        REQUIRE(run_cli({"gen-synth", "--config", tmp.sub("synth.json"), "--out",
                         tmp.sub("data")}) == 0);
    }
    testutil::TempDir tmp;
};

}  // namespace

TEST_CASE_FIXTURE(CliFixture, "gen-synth: exit codes, determinism, --force") {
    // rerun without --force on the non-empty dir fails
    CHECK(run_cli({"gen-synth", "--config", tmp.sub("synth.json"), "--out", tmp.sub("data")}) != 0);
    // missing parent is an error
    CHECK(run_cli({"gen-synth", "--config", tmp.sub("synth.json"), "--out",
                   tmp.sub("no/such/parent")}) != 0);
    // same seed elsewhere gives identical manifests
    CHECK(run_cli({"gen-synth", "--config", tmp.sub("synth.json"), "--out", tmp.sub("data2"),
                   "--seed", "9"}) == 0);
    CHECK(slurp(tmp.sub("data/source/manifest.json")) ==
          slurp(tmp.sub("data2/source/manifest.json")));
}

TEST_CASE_FIXTURE(CliFixture, "train: smoke run with artifacts, ablate flag, validation") {
    write_json(tmp.sub("exp.json"), small_experiment_json(tmp.sub("data"), tmp.sub("run")));
    CHECK(run_cli({"train", "--config", tmp.sub("exp.json")}) == 0);
    CHECK(fs::exists(tmp.sub("run/checkpoint.bin")));
    CHECK(fs::exists(tmp.sub("run/metrics.jsonl")));
    CHECK(fs::exists(tmp.sub("run/pck.txt")));
    CHECK(fs::exists(tmp.sub("run/resolved_config.json")));
    // resolved config is fully populated (defaults included)
    const auto resolved = json::parse(slurp(tmp.sub("run/resolved_config.json")));
    CHECK(resolved.at("train").at("eta").get<double>() == 0.999);
    CHECK(resolved.at("gaussian").at("sigma").get<double>() == 2.0);

    // rerun without --force fails; with --force succeeds
    CHECK(run_cli({"train", "--config", tmp.sub("exp.json")}) != 0);
    CHECK(run_cli({"train", "--config", tmp.sub("exp.json"), "--force"}) == 0);

    // --ablate style,occ records zero stylizations
    CHECK(run_cli({"train", "--config", tmp.sub("exp.json"), "--out", tmp.sub("run2"),
                   "--ablate", "style,occ"}) == 0);
    std::ifstream metrics(tmp.sub("run2/metrics.jsonl"));
    std::string line;
    while (std::getline(metrics, line)) {
        const auto j = json::parse(line);
        CHECK(j.at("stylized_count").get<int>() == 0);
    }

    // unknown ablation switch -> usage error
    CHECK(run_cli({"train", "--config", tmp.sub("exp.json"), "--out", tmp.sub("run3"),
                   "--ablate", "bogus"}) != 0);

    // all validation failures reported at once (bad epochs AND missing style ckpt)
    json bad = small_experiment_json(tmp.sub("data"), tmp.sub("runbad"));
    bad["train"]["warmup_supervised_epochs"] = 9;
    bad["ablation"] = {{"style", true}};
    write_json(tmp.sub("bad.json"), bad);
    CHECK(run_cli({"train", "--config", tmp.sub("bad.json")}) != 0);
}

TEST_CASE_FIXTURE(CliFixture, "train determinism: same seed, byte-identical metrics") {
    write_json(tmp.sub("exp.json"), small_experiment_json(tmp.sub("data"), tmp.sub("d1")));
    CHECK(run_cli({"train", "--config", tmp.sub("exp.json")}) == 0);
    CHECK(run_cli({"train", "--config", tmp.sub("exp.json"), "--out", tmp.sub("d2")}) == 0);
    CHECK(slurp(tmp.sub("d1/metrics.jsonl")) == slurp(tmp.sub("d2/metrics.jsonl")));
}

TEST_CASE_FIXTURE(CliFixture, "eval prints a report for a trained checkpoint") {
    write_json(tmp.sub("exp.json"), small_experiment_json(tmp.sub("data"), tmp.sub("ev")));
    REQUIRE(run_cli({"train", "--config", tmp.sub("exp.json")}) == 0);
    CHECK(run_cli({"eval", "--ckpt", tmp.sub("ev/checkpoint.bin"), "--data", tmp.sub("data/target"),
                   "--alpha", "0.05"}) == 0);
    CHECK(run_cli({"eval", "--ckpt", tmp.sub("ev/checkpoint.bin"), "--data", tmp.sub("data/target"),
                   "--csv"}) == 0);
    CHECK(run_cli({"eval", "--ckpt", tmp.sub("ev/checkpoint.bin"), "--data", tmp.sub("data/source"),
                   "--which", "student"}) == 0);
    CHECK(run_cli({"eval", "--ckpt", tmp.sub("does_not_exist.bin"), "--data",
                   tmp.sub("data/target")}) != 0);
}

TEST_CASE_FIXTURE(CliFixture, "pretrain-style writes a loadable checkpoint") {
    CHECK(run_cli({"pretrain-style", "--source", tmp.sub("data/source"), "--target",
                   tmp.sub("data/target"), "--out", tmp.sub("style.bin"), "--steps", "4",
                   "--ae-steps", "4", "--batch-size", "2"}) == 0);
    CHECK(fs::exists(tmp.sub("style.bin")));
    // second run needs --force
    CHECK(run_cli({"pretrain-style", "--source", tmp.sub("data/source"), "--target",
                   tmp.sub("data/target"), "--out", tmp.sub("style.bin"), "--steps", "2",
                   "--ae-steps", "2"}) != 0);

    // a style-enabled training run consumes the checkpoint
    json j = small_experiment_json(tmp.sub("data"), tmp.sub("styled"));
    j["ablation"] = {{"style", true}};
    j["style_checkpoint"] = tmp.sub("style.bin");
    write_json(tmp.sub("styled.json"), j);
    CHECK(run_cli({"train", "--config", tmp.sub("styled.json")}) == 0);
}

TEST_CASE_FIXTURE(CliFixture, "sweep: one CSV row per grid value, eta boundary") {
    write_json(tmp.sub("exp.json"), small_experiment_json(tmp.sub("data"), tmp.sub("unused")));
    CHECK(run_cli({"sweep", "--config", tmp.sub("exp.json"), "--param", "eta", "--values", "0,1",
                   "--out", tmp.sub("sweep")}) == 0);
    const std::string csv = slurp(tmp.sub("sweep/sweep.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
    CHECK(csv.find("eta,0,") != std::string::npos);
    CHECK(csv.find("eta,1,") != std::string::npos);

    // eta=1: the teacher never moves after initialization; its parameters
    // stay a snapshot of the student at warmup start
    const PoseCheckpoint ck = load_pose_checkpoint(tmp.sub("sweep/eta_1/checkpoint.bin"));
    CHECK(ck.has_teacher);

    CHECK(run_cli({"sweep", "--config", tmp.sub("exp.json"), "--param", "bogus", "--values", "1",
                   "--out", tmp.sub("sweep2")}) != 0);
    CHECK(run_cli({"sweep", "--config", tmp.sub("exp.json"), "--param", "p", "--values", "",
                   "--out", tmp.sub("sweep3")}) != 0);
}

TEST_CASE("same-seed sweeps produce identical CSVs") {
    testutil::TempDir tmp("cli_sweepdet");
    write_json(tmp.sub("synth.json"), small_synth_json());
    REQUIRE(run_cli({"gen-synth", "--config", tmp.sub("synth.json"), "--out", tmp.sub("data")}) == 0);
    write_json(tmp.sub("exp.json"), small_experiment_json(tmp.sub("data"), tmp.sub("unused")));
    CHECK(run_cli({"sweep", "--config", tmp.sub("exp.json"), "--param", "p", "--values", "0.5,1",
                   "--out", tmp.sub("s1")}) == 0);
    CHECK(run_cli({"sweep", "--config", tmp.sub("exp.json"), "--param", "p", "--values", "0.5,1",
                   "--out", tmp.sub("s2")}) == 0);
    CHECK(slurp(tmp.sub("s1/sweep.csv")) == slurp(tmp.sub("s2/sweep.csv")));
}
