#include "poseadapt/config.hpp"

#include <fstream>
#include <stdexcept>

using json = nlohmann::ordered_json;

namespace poseadapt {

namespace {

template <class T>
void get_if(const json& j, const char* key, T* out) {
    if (j.contains(key)) *out = j.at(key).get<T>();
}

void get_range(const json& j, const char* key, std::array<double, 2>* out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    (*out)[0] = a.at(0).get<double>();
    (*out)[1] = a.at(1).get<double>();
}

void get_rgb(const json& j, const char* key, std::array<double, 3>* out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    for (int i = 0; i < 3; ++i) (*out)[static_cast<size_t>(i)] = a.at(i).get<double>();
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
    ExperimentConfig c;
    get_if(j, "out_dir", &c.out_dir);
    if (j.contains("data")) {
        const auto& d = j.at("data");
        get_if(d, "source", &c.source_dir);
        get_if(d, "target", &c.target_dir);
    }
    get_if(j, "style_checkpoint", &c.style_checkpoint);
    get_if(j, "pck_alpha", &c.pck_alpha);

    if (j.contains("pose")) {
        const auto& p = j.at("pose");
        get_if(p, "input_size", &c.pose.input_size);
        get_if(p, "heatmap_size", &c.pose.heatmap_size);
        get_if(p, "num_keypoints", &c.pose.num_keypoints);
        if (p.contains("preset")) c.pose.apply_preset(p.at("preset").get<std::string>());
        if (p.contains("encoder_channels")) {
            c.pose.encoder_channels = p.at("encoder_channels").get<std::vector<int>>();
            c.pose.preset = "custom";
        }
        if (p.contains("deconv_channels")) {
            c.pose.deconv_channels = p.at("deconv_channels").get<std::vector<int>>();
            c.pose.preset = "custom";
        }
    }
    if (j.contains("gaussian")) {
        const auto& g = j.at("gaussian");
        get_if(g, "sigma", &c.gaussian.sigma);
        get_if(g, "truncation_radius", &c.gaussian.truncation_radius);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        get_if(t, "epochs", &c.train.epochs);
        get_if(t, "iters_per_epoch", &c.train.iters_per_epoch);
        get_if(t, "batch_size", &c.train.batch_size);
        get_if(t, "base_lr", &c.train.base_lr);
        get_if(t, "lr_drop_epochs", &c.train.lr_drop_epochs);
        get_if(t, "lr_drop_factor", &c.train.lr_drop_factor);
        get_if(t, "warmup_supervised_epochs", &c.train.warmup_supervised_epochs);
        get_if(t, "lambda_unsup", &c.train.lambda_unsup);
        get_if(t, "p", &c.train.p);
        get_if(t, "tau_occ", &c.train.tau_occ);
        get_if(t, "eta", &c.train.eta);
        get_if(t, "stylize_prob", &c.train.stylize_prob);
        get_if(t, "seed", &c.train.seed);
        get_if(t, "val_fraction", &c.train.val_fraction);
        get_if(t, "ema_running_stats", &c.train.ema_running_stats);
    }
    if (j.contains("augmentation")) {
        const auto& a = j.at("augmentation");
        if (a.contains("enabled")) {
            c.augmentation.rotation = c.augmentation.translation = c.augmentation.scale =
                c.augmentation.color = c.augmentation.shear = false;
            for (const auto& e : a.at("enabled")) {
                const std::string name = e.get<std::string>();
                if (name == "rotation") c.augmentation.rotation = true;
                else if (name == "translation") c.augmentation.translation = true;
                else if (name == "scale") c.augmentation.scale = true;
                else if (name == "color") c.augmentation.color = true;
                else if (name == "shear") c.augmentation.shear = true;
                else throw std::invalid_argument("augmentation: unknown component '" + name + "'");
            }
        }
        get_range(a, "rotation_range", &c.augmentation.rotation_range);
        get_range(a, "translation_range", &c.augmentation.translation_range);
        get_range(a, "scale_range", &c.augmentation.scale_range);
        get_range(a, "shear_range", &c.augmentation.shear_range);
        get_if(a, "color_strength", &c.augmentation.color_strength);
    }
    if (j.contains("occlusion")) {
        const auto& o = j.at("occlusion");
        if (o.contains("patch_size")) {
            c.occlusion.patch_h = o.at("patch_size").at(0).get<int>();
            c.occlusion.patch_w = o.at("patch_size").at(1).get<int>();
        }
        get_if(o, "occlude_prob", &c.occlusion.occlude_prob);
    }
    if (j.contains("ablation")) {
        const auto& a = j.at("ablation");
        get_if(a, "mean_teacher", &c.ablation.mean_teacher);
        get_if(a, "normalize", &c.ablation.normalize);
        get_if(a, "style", &c.ablation.style);
        get_if(a, "occlusion", &c.ablation.occlusion);
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const std::exception& e) {
        throw std::runtime_error("malformed config " + path + ": " + e.what());
    }
    return parse_experiment_config(j);
}

json experiment_config_json(const ExperimentConfig& c) {
    json j;
    j["out_dir"] = c.out_dir;
    j["data"] = {{"source", c.source_dir}, {"target", c.target_dir}};
    j["style_checkpoint"] = c.style_checkpoint;
    j["pck_alpha"] = c.pck_alpha;
    j["pose"] = {{"input_size", c.pose.input_size},
                 {"heatmap_size", c.pose.heatmap_size},
                 {"num_keypoints", c.pose.num_keypoints},
                 {"preset", c.pose.preset},
                 {"encoder_channels", c.pose.encoder_channels},
                 {"deconv_channels", c.pose.deconv_channels}};
    j["gaussian"] = {{"sigma", c.gaussian.sigma},
                     {"truncation_radius", c.gaussian.truncation_radius}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"iters_per_epoch", c.train.iters_per_epoch},
                  {"batch_size", c.train.batch_size},
                  {"base_lr", c.train.base_lr},
                  {"lr_drop_epochs", c.train.lr_drop_epochs},
                  {"lr_drop_factor", c.train.lr_drop_factor},
                  {"warmup_supervised_epochs", c.train.warmup_supervised_epochs},
                  {"lambda_unsup", c.train.lambda_unsup},
                  {"p", c.train.p},
                  {"tau_occ", c.train.tau_occ},
                  {"eta", c.train.eta},
                  {"stylize_prob", c.train.stylize_prob},
                  {"seed", c.train.seed},
                  {"val_fraction", c.train.val_fraction},
                  {"ema_running_stats", c.train.ema_running_stats}};
    std::vector<std::string> enabled;
    if (c.augmentation.rotation) enabled.push_back("rotation");
    if (c.augmentation.translation) enabled.push_back("translation");
    if (c.augmentation.scale) enabled.push_back("scale");
    if (c.augmentation.color) enabled.push_back("color");
    if (c.augmentation.shear) enabled.push_back("shear");
    j["augmentation"] = {{"enabled", enabled},
                         {"rotation_range", c.augmentation.rotation_range},
                         {"translation_range", c.augmentation.translation_range},
                         {"scale_range", c.augmentation.scale_range},
                         {"shear_range", c.augmentation.shear_range},
                         {"color_strength", c.augmentation.color_strength}};
    j["occlusion"] = {{"patch_size", {c.occlusion.patch_h, c.occlusion.patch_w}},
                      {"occlude_prob", c.occlusion.occlude_prob}};
    j["ablation"] = {{"mean_teacher", c.ablation.mean_teacher},
                     {"normalize", c.ablation.normalize},
                     {"style", c.ablation.style},
                     {"occlusion", c.ablation.occlusion}};
    return j;
}

std::vector<std::string> validate_experiment_config(const ExperimentConfig& c) {
    std::vector<std::string> errors;
    auto check = [&](auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            errors.emplace_back(e.what());
        }
    };
    check([&] { c.train.validate(); });
    check([&] { c.pose.validate(); });
    check([&] { c.gaussian.validate(); });
    check([&] { c.augmentation.validate(); });
    check([&] { c.occlusion.validate(c.pose.input_size, c.pose.input_size); });
    if (c.source_dir.empty()) errors.emplace_back("data.source is required");
    if (c.target_dir.empty()) errors.emplace_back("data.target is required");
    if (c.ablation.style && c.style_checkpoint.empty())
        errors.emplace_back("style_checkpoint is required while ablation.style is on");
    if (!(c.pck_alpha > 0)) errors.emplace_back("pck_alpha must be positive");
    return errors;
}

FitOptions to_fit_options(const ExperimentConfig& c) {
    FitOptions o;
    o.train = c.train;
    o.ablation = c.ablation;
    o.pose = c.pose;
    o.gauss = c.gaussian;
    o.aug = c.augmentation;
    o.occlusion = c.occlusion;
    o.occlusion.tau_occ = c.train.tau_occ;  // TrainConfig owns tau_occ
    o.style_checkpoint = c.style_checkpoint;
    o.out_dir = c.out_dir;
    o.pck_alpha = c.pck_alpha;
    return o;
}

SynthConfig parse_synth_config(const json& j) {
    SynthConfig c;
    get_if(j, "seed", &c.seed);
    get_if(j, "image_size", &c.image_size);
    get_if(j, "source_count", &c.source_count);
    get_if(j, "target_count", &c.target_count);
    auto domain = [&](const char* key, DomainSynthConfig* d) {
        if (!j.contains(key)) return;
        const auto& dj = j.at(key);
        std::array<double, 2> ba{d->body_angle_min, d->body_angle_max};
        get_range(dj, "body_angle_range", &ba);
        d->body_angle_min = ba[0];
        d->body_angle_max = ba[1];
        get_if(dj, "limb_swing", &d->limb_swing);
        get_if(dj, "root_jitter", &d->root_jitter);
        std::array<double, 2> sr{d->scale_min, d->scale_max};
        get_range(dj, "scale_range", &sr);
        d->scale_min = sr[0];
        d->scale_max = sr[1];
        get_rgb(dj, "background", &d->background);
        get_rgb(dj, "bone_color", &d->bone_color);
        get_rgb(dj, "joint_color", &d->joint_color);
        get_if(dj, "texture", &d->texture);
        get_rgb(dj, "texture_color", &d->texture_color);
        get_if(dj, "texture_period", &d->texture_period);
        get_if(dj, "noise_std", &d->noise_std);
        get_if(dj, "color_jitter", &d->color_jitter);
    };
    domain("source", &c.source);
    domain("target", &c.target);
    return c;
}

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const std::exception& e) {
        throw std::runtime_error("malformed config " + path + ": " + e.what());
    }
    return parse_synth_config(j);
}

json synth_config_json(const SynthConfig& c) {
    auto domain = [](const DomainSynthConfig& d) {
        json j;
        j["body_angle_range"] = {d.body_angle_min, d.body_angle_max};
        j["limb_swing"] = d.limb_swing;
        j["root_jitter"] = d.root_jitter;
        j["scale_range"] = {d.scale_min, d.scale_max};
        j["background"] = d.background;
        j["bone_color"] = d.bone_color;
        j["joint_color"] = d.joint_color;
        j["texture"] = d.texture;
        j["texture_color"] = d.texture_color;
        j["texture_period"] = d.texture_period;
        j["noise_std"] = d.noise_std;
        j["color_jitter"] = d.color_jitter;
        return j;
    };
    json j;
    j["seed"] = c.seed;
    j["image_size"] = c.image_size;
    j["source_count"] = c.source_count;
    j["target_count"] = c.target_count;
    j["source"] = domain(c.source);
    j["target"] = domain(c.target);
    return j;
}

}  // namespace poseadapt
