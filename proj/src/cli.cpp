#include "poseadapt/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "poseadapt/config.hpp"
#include "poseadapt/eval.hpp"
#include "poseadapt/style.hpp"
#include "poseadapt/teacher.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace poseadapt {

namespace {

/// POSEADAPT_OUT_ROOT overrides the output root for relative paths.
std::string resolve_out(const std::string& path) {
    const char* root = std::getenv("POSEADAPT_OUT_ROOT");
    if (!root || !*root || path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(root) / path).string();
}

/// Output naming is idempotent: an existing non-empty target needs --force.
void claim_output_dir(const std::string& dir, bool force) {
    const fs::path p(dir);
    if (fs::exists(p)) {
        if (!force && !fs::is_empty(p))
            throw std::runtime_error("output dir exists: " + dir + " (use --force to overwrite)");
        return;
    }
    if (p.has_parent_path() && !fs::exists(p.parent_path()))
        throw std::runtime_error("parent of output dir does not exist: " +
                                 p.parent_path().string());
    fs::create_directory(p);
}

void claim_output_file(const std::string& file, bool force) {
    const fs::path p(file);
    if (fs::exists(p) && !force)
        throw std::runtime_error("output file exists: " + file + " (use --force to overwrite)");
    if (p.has_parent_path() && !fs::exists(p.parent_path()))
        throw std::runtime_error("parent of output path does not exist: " +
                                 p.parent_path().string());
}

void apply_ablate_flag(const std::string& spec, AblationSwitches* ab) {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (tok == "mt" || tok == "mean_teacher") ab->mean_teacher = false;
        else if (tok == "norm" || tok == "normalize") ab->normalize = false;
        else if (tok == "style") ab->style = false;
        else if (tok == "occ" || tok == "occlusion") ab->occlusion = false;
        else throw CLI::ValidationError("--ablate", "unknown switch '" + tok +
                                        "' (expected mt|norm|style|occ)");
    }
}

ImagePool dataset_pool(const PoseDataset& ds) {
    return ImagePool{[&ds](size_t i) { return ds.image(i); }, ds.size()};
}

int cmd_gen_synth(const std::string& config_path, const std::string& out,
                  int64_t seed_override, bool force) {
    SynthConfig cfg = load_synth_config(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
    cfg.validate();
    const std::string out_dir = resolve_out(out);
    claim_output_dir(out_dir, force);
    {
        std::ofstream os(fs::path(out_dir) / "synth_config.json");
        os << synth_config_json(cfg).dump(2) << "\n";
    }
    generate_synthetic(cfg, out_dir);
    std::cout << "wrote " << cfg.source_count << " source and " << cfg.target_count
              << " target samples to " << out_dir << "\n";
    return 0;
}

int cmd_pretrain_style(const std::string& source_dir, const std::string& target_dir,
                       const std::string& out, int image_size, int steps, int ae_steps,
                       int batch_size, double lr, int64_t seed, bool force) {
    const std::string out_path = resolve_out(out);
    claim_output_file(out_path, force);
    const PoseDataset source = PoseDataset::load(source_dir);
    const PoseDataset target = PoseDataset::load(target_dir);

    StyleModelConfig cfg;
    cfg.image_size = image_size > 0 ? image_size : source.image_w();
    cfg.steps = steps;
    cfg.autoencoder_steps = ae_steps;
    cfg.batch_size = batch_size;
    cfg.lr = static_cast<real>(lr);
    if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);

    std::vector<StylePretrainRecord> log;
    StyleModel model = style_pretrain(dataset_pool(source), dataset_pool(target), cfg, &log);
    model.save(out_path);
    if (!log.empty())
        std::cout << "style pretraining: first-step total " << log.front().total
                  << ", last-step total " << log.back().total << "\n";
    std::cout << "wrote style checkpoint " << out_path << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_override,
              int64_t seed_override, const std::string& ablate, bool force) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.train.seed = static_cast<uint64_t>(seed_override);
    if (!ablate.empty()) apply_ablate_flag(ablate, &cfg.ablation);
    cfg.out_dir = resolve_out(cfg.out_dir);
    if (cfg.out_dir.empty()) throw std::runtime_error("out_dir is required");

    const auto errors = validate_experiment_config(cfg);
    if (!errors.empty()) {
        std::cerr << "config validation failed:\n";
        for (const auto& e : errors) std::cerr << "  - " << e << "\n";
        return 1;
    }
    claim_output_dir(cfg.out_dir, force);
    {
        std::ofstream os(fs::path(cfg.out_dir) / "resolved_config.json");
        os << experiment_config_json(cfg).dump(2) << "\n";
    }
    const PoseDataset source = PoseDataset::load(cfg.source_dir);
    const PoseDataset target = PoseDataset::load(cfg.target_dir);
    const FitResult res = fit(source, target, to_fit_options(cfg));
    std::cout << "final validation PCK@" << cfg.pck_alpha << ": " << res.final_val_pck << "\n"
              << "checkpoint: " << res.checkpoint_path << "\n"
              << "metrics:    " << res.metrics_path << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& data_dir, double alpha,
             bool csv, const std::string& which) {
    PoseCheckpoint ck = load_pose_checkpoint(ckpt);
    PoseDataset ds = PoseDataset::load(data_dir);
    const auto gts = load_eval_annotations(data_dir);
    std::vector<size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), size_t{0});

    PoseNet* net = nullptr;
    if (which == "student") net = &ck.student;
    else if (which == "teacher") {
        if (!ck.has_teacher) throw std::runtime_error("checkpoint has no trained teacher");
        net = &ck.teacher;
    } else {
        net = ck.has_teacher ? &ck.teacher : &ck.student;
    }
    const PCKReport rep = evaluate_model(*net, ds, idx, gts, alpha);
    std::cout << render_report(rep, csv);
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::string& values_csv, const std::string& out, bool force) {
    ExperimentConfig base = load_experiment_config(config_path);
    std::vector<double> values;
    {
        std::stringstream ss(values_csv);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) values.push_back(std::stod(tok));
    }
    if (values.empty()) throw std::runtime_error("sweep: empty value grid");
    if (param != "p" && param != "tau_occ" && param != "eta")
        throw std::runtime_error("sweep: param must be one of p|tau_occ|eta");

    const std::string out_dir = resolve_out(out);
    claim_output_dir(out_dir, force);

    std::ostringstream csv;
    csv << "param,value,val_pck\n";
    for (double v : values) {
        ExperimentConfig cfg = base;
        if (param == "p") cfg.train.p = static_cast<real>(v);
        else if (param == "tau_occ") cfg.train.tau_occ = static_cast<real>(v);
        else cfg.train.eta = static_cast<real>(v);
        std::ostringstream sub;
        sub << param << "_" << v;
        cfg.out_dir = (fs::path(out_dir) / sub.str()).string();
        const auto errors = validate_experiment_config(cfg);
        if (!errors.empty()) {
            std::cerr << "config validation failed for " << param << "=" << v << ":\n";
            for (const auto& e : errors) std::cerr << "  - " << e << "\n";
            return 1;
        }
        claim_output_dir(cfg.out_dir, force);
        {
            std::ofstream os(fs::path(cfg.out_dir) / "resolved_config.json");
            os << experiment_config_json(cfg).dump(2) << "\n";
        }
        const PoseDataset source = PoseDataset::load(cfg.source_dir);
        const PoseDataset target = PoseDataset::load(cfg.target_dir);
        const FitResult res = fit(source, target, to_fit_options(cfg));
        csv << param << "," << v << "," << res.final_val_pck << "\n";
    }
    std::ofstream os(fs::path(out_dir) / "sweep.csv");
    os << csv.str();
    std::cout << csv.str();
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"domain-adaptive pose estimation experiments"};
    app.require_subcommand(1);

    // gen-synth
    std::string gs_config, gs_out;
    int64_t gs_seed = -1;
    bool gs_force = false;
    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic source/target dataset pair");
    gen->add_option("--config", gs_config, "synthesis config JSON")->required();
    gen->add_option("--out", gs_out, "output directory")->required();
    gen->add_option("--seed", gs_seed, "override the config seed");
    gen->add_flag("--force", gs_force, "overwrite existing output");

    // pretrain-style
    std::string ps_source, ps_target, ps_out;
    int ps_image_size = 0, ps_steps = 500, ps_ae_steps = 300, ps_batch = 8;
    double ps_lr = 1e-4;
    int64_t ps_seed = -1;
    bool ps_force = false;
    auto* pre = app.add_subcommand("pretrain-style", "pretrain the bidirectional style-transfer model");
    pre->add_option("--source", ps_source, "source dataset dir")->required();
    pre->add_option("--target", ps_target, "target dataset dir")->required();
    pre->add_option("--out", ps_out, "output checkpoint file")->required();
    pre->add_option("--image-size", ps_image_size, "style model resolution (default: dataset size)");
    pre->add_option("--steps", ps_steps, "generator training steps");
    pre->add_option("--ae-steps", ps_ae_steps, "joint reconstruction warmup steps");
    pre->add_option("--batch-size", ps_batch, "batch size");
    pre->add_option("--lr", ps_lr, "learning rate");
    pre->add_option("--seed", ps_seed, "seed");
    pre->add_flag("--force", ps_force, "overwrite existing output");

    // train
    std::string tr_config, tr_out, tr_ablate;
    int64_t tr_seed = -1;
    bool tr_force = false;
    auto* tr = app.add_subcommand("train", "run the adaptation training schedule");
    tr->add_option("--config", tr_config, "experiment config JSON")->required();
    tr->add_option("--out", tr_out, "override out_dir");
    tr->add_option("--seed", tr_seed, "override the config seed");
    tr->add_option("--ablate", tr_ablate, "comma list of switches to turn off (mt,norm,style,occ)");
    tr->add_flag("--force", tr_force, "overwrite existing output");

    // eval
    std::string ev_ckpt, ev_data, ev_which = "auto";
    double ev_alpha = 0.05;
    bool ev_csv = false;
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint with PCK");
    ev->add_option("--ckpt", ev_ckpt, "pose checkpoint")->required();
    ev->add_option("--data", ev_data, "dataset dir")->required();
    ev->add_option("--alpha", ev_alpha, "PCK threshold fraction");
    ev->add_flag("--csv", ev_csv, "CSV output");
    ev->add_option("--which", ev_which, "student|teacher|auto");

    // sweep
    std::string sw_config, sw_param, sw_values, sw_out;
    bool sw_force = false;
    auto* sw = app.add_subcommand("sweep", "grid over one hyperparameter (p, tau_occ or eta)");
    sw->add_option("--config", sw_config, "experiment config JSON")->required();
    sw->add_option("--param", sw_param, "p|tau_occ|eta")->required();
    sw->add_option("--values", sw_values, "comma-separated grid")->required();
    sw->add_option("--out", sw_out, "output directory")->required();
    sw->add_flag("--force", sw_force, "overwrite existing output");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed()) return cmd_gen_synth(gs_config, gs_out, gs_seed, gs_force);
        if (pre->parsed())
            return cmd_pretrain_style(ps_source, ps_target, ps_out, ps_image_size, ps_steps,
                                      ps_ae_steps, ps_batch, ps_lr, ps_seed, ps_force);
        if (tr->parsed()) return cmd_train(tr_config, tr_out, tr_seed, tr_ablate, tr_force);
        if (ev->parsed()) return cmd_eval(ev_ckpt, ev_data, ev_alpha, ev_csv, ev_which);
        if (sw->parsed()) return cmd_sweep(sw_config, sw_param, sw_values, sw_out, sw_force);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace poseadapt
