#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "poseadapt/data.hpp"
#include "poseadapt/teacher.hpp"

namespace poseadapt {

/// One experiment: data paths, model, schedule, augmentation set and the
/// Table-8-style ablation switches. Parsed from a JSON document; every field
/// has a default and the fully resolved document is echoed into the output
/// directory for provenance.
struct ExperimentConfig {
    std::string out_dir;
    std::string source_dir;
    std::string target_dir;
    std::string style_checkpoint;
    PoseNetConfig pose;
    GaussianSpec gaussian;
    TrainConfig train;
    AugmentConfig augmentation;
    OcclusionPolicy occlusion;
    AblationSwitches ablation;
    double pck_alpha = 0.05;
};

ExperimentConfig parse_experiment_config(const nlohmann::ordered_json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::ordered_json experiment_config_json(const ExperimentConfig& cfg);

/// All validation failures at once (empty means valid).
std::vector<std::string> validate_experiment_config(const ExperimentConfig& cfg);

FitOptions to_fit_options(const ExperimentConfig& cfg);

SynthConfig parse_synth_config(const nlohmann::ordered_json& j);
SynthConfig load_synth_config(const std::string& path);
nlohmann::ordered_json synth_config_json(const SynthConfig& cfg);

}  // namespace poseadapt
