#pragma once

#include <optional>
#include <string>
#include <vector>

#include "poseadapt/augment.hpp"
#include "poseadapt/data.hpp"
#include "poseadapt/heatmap.hpp"
#include "poseadapt/nn/adam.hpp"
#include "poseadapt/posenet.hpp"
#include "poseadapt/style.hpp"

namespace poseadapt {

struct TrainConfig {
    int epochs = 70;
    int iters_per_epoch = 500;
    int batch_size = 32;
    real base_lr = 1e-4;
    std::vector<int> lr_drop_epochs = {45, 60};  // x0.1 at each
    real lr_drop_factor = 0.1;
    int warmup_supervised_epochs = 40;
    real lambda_unsup = 1.0;
    real p = 0.5;
    real tau_occ = 0.9;
    real eta = 0.999;
    real stylize_prob = 0.5;
    uint64_t seed = 0;
    real val_fraction = 0.1;
    bool ema_running_stats = false;  // false: teacher copies student statistics

    void validate() const;
    real lr_at(int epoch) const;
};

/// Table-8-style component switches. All off degenerates to source-only
/// training with augmentation.
struct AblationSwitches {
    bool mean_teacher = true;
    bool normalize = true;
    bool style = true;
    bool occlusion = true;
};

struct BatchRecord {
    int epoch = 0, iter = 0;
    real sup = 0, unsup = 0, total = 0;
    real tau_conf = 0;
    real pass_fraction = 0;
    real teacher_mean_act = 0;   // mean raw teacher activation over the batch
    real pseudo_mean_act = 0;    // mean activation of interior pseudo channels
    real gt_gauss_mean_act = 0;  // fixed Gaussian-channel reference
    int stylized_count = 0;
};

/// theta_t <- eta * theta_t + (1 - eta) * theta_s elementwise. Running
/// statistics are copied from the student unless ema_running_stats.
void ema_update(PoseNet& teacher, PoseNet& student, real eta,
                bool ema_running_stats = false);

/// tau_conf = the ceil(p*n)-th largest value, so the top fraction p passes
/// under >= comparison (ties admitted).
real compute_confidence_threshold(const std::vector<real>& confidences, real p);

/// Channels usable by the unsupervised loss: the pseudo-label peak must stay
/// inside the grid after undoing t1 and after reapplying t2.
std::vector<uint8_t> unsup_channel_mask(const GeometricTransform& t1,
                                        const GeometricTransform& t2,
                                        const Heatmap& pseudo);

/// Single-sample Eq-3 term: de-augments both sides, gates channels on
/// confidence and boundary, and returns the mean squared difference over
/// surviving channels (0 with a diagnostics bump when none survive).
real unsup_loss(const Heatmap& student_out, const Heatmap& pseudo,
                const std::vector<real>& confidences, real tau_conf,
                const GeometricTransform& t1, const GeometricTransform& t2,
                const std::vector<uint8_t>& boundary_mask);

struct FitOptions {
    TrainConfig train;
    AblationSwitches ablation;
    PoseNetConfig pose;
    GaussianSpec gauss;
    AugmentConfig aug;
    OcclusionPolicy occlusion;
    std::string style_checkpoint;  // required when ablation.style
    std::string out_dir;
    double pck_alpha = 0.05;
};

struct FitResult {
    double final_val_pck = 0;
    std::string checkpoint_path;
    std::string metrics_path;
    int epochs_run = 0;
};

/// The training engine. Owns student and teacher exclusively; one instance
/// per run.
class Trainer {
public:
    Trainer(const PoseDataset& source, const PoseDataset& target, FitOptions opt);

    /// One optimization step on explicit sample indices. Supervised branch
    /// first; the unsupervised branch runs only when mean_teacher is on and
    /// epoch >= warmup. rng draws happen in a fixed documented order.
    BatchRecord step(const std::vector<size_t>& source_idx,
                     const std::vector<size_t>& target_idx, int epoch, Rng& rng);

    /// Full schedule: per-epoch validation PCK, drift monitors, metrics log,
    /// final checkpoint from the last epoch.
    FitResult run();

    PoseNet& student() { return student_; }
    PoseNet& teacher() { return teacher_; }
    bool teacher_initialized() const { return teacher_init_; }
    const FitOptions& options() const { return opt_; }

private:
    Tensor load_source_input(size_t i, KeypointAnnotation* ann) const;
    Tensor load_target_input(size_t i) const;

    const PoseDataset& source_;
    const PoseDataset& target_;
    FitOptions opt_;
    PoseNet student_, teacher_;
    nn::Adam adam_;
    std::optional<StyleModel> style_;
    ImagePool source_pool_, target_pool_;
    bool teacher_init_ = false;
    real last_pseudo_mean_ = 0;
    int grid_w_ = 0, grid_h_ = 0;
};

FitResult fit(const PoseDataset& source, const PoseDataset& target, const FitOptions& opt);

struct PoseCheckpoint {
    PoseNetConfig config;
    PoseNet student;
    PoseNet teacher;
    bool has_teacher = false;
    int epoch = 0;
};

PoseCheckpoint load_pose_checkpoint(const std::string& path);

}  // namespace poseadapt
