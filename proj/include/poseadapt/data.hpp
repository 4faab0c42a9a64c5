#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poseadapt/core/image.hpp"
#include "poseadapt/core/rng.hpp"
#include "poseadapt/heatmap.hpp"

namespace poseadapt {

struct KeypointGroup {
    std::string name;
    std::vector<std::string> members;
};

struct KeypointSchema {
    std::vector<std::string> keypoint_names;
    std::vector<KeypointGroup> groups;

    int num_keypoints() const { return static_cast<int>(keypoint_names.size()); }
    int index_of(const std::string& name) const;
};

struct SampleRecord {
    std::string image;  // relative path
    std::string domain; // "source" | "target"
    std::optional<KeypointAnnotation> keypoints;
};

/// Immutable dataset view backed by manifest.json + images/. Target-tagged
/// samples never expose annotations through this view; evaluation reads them
/// separately via load_eval_annotations.
class PoseDataset {
public:
    static PoseDataset load(const std::string& root);

    size_t size() const { return samples_.size(); }
    const KeypointSchema& schema() const { return schema_; }
    int image_w() const { return image_w_; }
    int image_h() const { return image_h_; }
    const std::string& root() const { return root_; }
    const std::string& domain(size_t i) const { return samples_[i].domain; }
    bool labeled(size_t i) const { return samples_[i].keypoints.has_value(); }

    /// Throws std::logic_error for target-domain samples: training code has
    /// no path to target annotations.
    const KeypointAnnotation& annotation(size_t i) const;

    /// [3,H,W] tensor in [0,1]; reads the PNG on every call (stateless).
    Tensor image(size_t i) const;

    const std::vector<SampleRecord>& samples() const { return samples_; }

private:
    std::string root_;
    KeypointSchema schema_;
    int image_w_ = 0, image_h_ = 0;
    std::vector<SampleRecord> samples_;
};

/// Held-out target annotations (annotations_eval.json), aligned with the
/// manifest sample order. Only evaluation code calls this.
std::vector<KeypointAnnotation> load_eval_annotations(const std::string& root);

/// Writes manifest.json (and annotations_eval.json when eval_annotations is
/// given) in the canonical byte format.
void write_manifest(const std::string& root, const KeypointSchema& schema,
                    int image_w, int image_h, const std::vector<SampleRecord>& samples,
                    const std::vector<KeypointAnnotation>* eval_annotations = nullptr);

// ---- synthetic generation ----

struct DomainSynthConfig {
    // pose distribution
    double body_angle_min = -20, body_angle_max = 20;  // degrees
    double limb_swing = 25;                            // degrees
    double root_jitter = 0.05;                         // fraction of image size
    double scale_min = 0.85, scale_max = 1.0;
    // appearance
    std::array<double, 3> background{0.85, 0.85, 0.88};
    std::array<double, 3> bone_color{0.16, 0.20, 0.45};
    std::array<double, 3> joint_color{0.95, 0.72, 0.20};
    std::string texture = "none";  // none | stripes | checker
    std::array<double, 3> texture_color{0.70, 0.70, 0.75};
    double texture_period = 14;
    double noise_std = 0.01;
    double color_jitter = 0.05;  // per-image global tint
};

struct SynthConfig {
    uint64_t seed = 0;
    int image_size = 256;
    int source_count = 2000;
    int target_count = 2000;
    DomainSynthConfig source;
    DomainSynthConfig target;

    void validate() const;
};

/// 10-joint biped stick figure rendered as capsule bones plus disc joint
/// markers; keypoints are the joint centres, exact by construction.
KeypointSchema biped10_schema();

struct SynthSample {
    Tensor image;  // [3,S,S]
    KeypointAnnotation ann;
};

/// Renders one figure; exposed for render-accuracy tests.
SynthSample render_synth_sample(const DomainSynthConfig& d, int image_size, Rng& rng);

/// Writes out_dir/source and out_dir/target datasets. Target annotations go
/// to annotations_eval.json only; the target manifest carries no keypoints.
void generate_synthetic(const SynthConfig& cfg, const std::string& out_dir);

/// Seed-deterministic disjoint exhaustive index partitions.
std::vector<std::vector<size_t>> split_dataset(size_t n, const std::vector<double>& fractions,
                                               uint64_t seed);

}  // namespace poseadapt
