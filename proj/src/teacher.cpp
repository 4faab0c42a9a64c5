#include "poseadapt/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "poseadapt/core/diagnostics.hpp"
#include "poseadapt/core/parallel.hpp"
#include "poseadapt/core/serialize.hpp"
#include "poseadapt/eval.hpp"
#include "poseadapt/kernels/kernels.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace poseadapt {

void TrainConfig::validate() const {
    if (epochs < 1 || iters_per_epoch < 1 || batch_size < 1)
        throw std::invalid_argument("TrainConfig: epochs/iters/batch must be positive");
    if (warmup_supervised_epochs < 0 || warmup_supervised_epochs >= epochs)
        throw std::invalid_argument("TrainConfig: warmup_supervised_epochs must be < epochs");
    if (!(p > 0 && p <= 1)) throw std::invalid_argument("TrainConfig: p must be in (0, 1]");
    if (eta < 0 || eta > 1) throw std::invalid_argument("TrainConfig: eta must be in [0, 1]");
    if (base_lr <= 0) throw std::invalid_argument("TrainConfig: base_lr must be positive");
    if (lambda_unsup < 0) throw std::invalid_argument("TrainConfig: lambda_unsup must be >= 0");
    if (stylize_prob < 0 || stylize_prob > 1)
        throw std::invalid_argument("TrainConfig: stylize_prob must be in [0, 1]");
    if (val_fraction <= 0 || val_fraction >= 1)
        throw std::invalid_argument("TrainConfig: val_fraction must be in (0, 1)");
}

real TrainConfig::lr_at(int epoch) const {
    real lr = base_lr;
    for (int e : lr_drop_epochs)
        if (epoch >= e) lr *= lr_drop_factor;
    return lr;
}

void ema_update(PoseNet& teacher, PoseNet& student, real eta, bool ema_running_stats) {
    auto tp = teacher.params();
    auto sp = student.params();
    if (tp.size() != sp.size())
        throw std::runtime_error("ema_update: parameter sets differ in size");
    for (size_t i = 0; i < tp.size(); ++i) {
        if (tp[i].name != sp[i].name || !tp[i].value->same_shape(*sp[i].value))
            throw std::runtime_error("ema_update: parameter mismatch at '" + tp[i].name + "'");
        Tensor& t = *tp[i].value;
        const Tensor& s = *sp[i].value;
        parallel_for(t.size(), [&](long j) { t[j] = eta * t[j] + (real(1) - eta) * s[j]; });
    }
    auto tb = teacher.buffers();
    auto sb = student.buffers();
    for (size_t i = 0; i < tb.size(); ++i) {
        Tensor& t = *tb[i].value;
        const Tensor& s = *sb[i].value;
        if (ema_running_stats) {
            parallel_for(t.size(), [&](long j) { t[j] = eta * t[j] + (real(1) - eta) * s[j]; });
        } else {
            t = s;
        }
    }
}

real compute_confidence_threshold(const std::vector<real>& confidences, real p) {
    if (confidences.empty())
        throw std::runtime_error("compute_confidence_threshold: empty confidence list");
    if (!(p > 0 && p <= 1))
        throw std::invalid_argument("compute_confidence_threshold: p must be in (0, 1]");
    const size_t n = confidences.size();
    size_t m = static_cast<size_t>(std::ceil(p * static_cast<double>(n) - 1e-12));
    if (m < 1) m = 1;
    if (m > n) m = n;
    std::vector<real> sorted(confidences);
    std::sort(sorted.begin(), sorted.end(), std::greater<real>());
    return sorted[m - 1];
}

std::vector<uint8_t> unsup_channel_mask(const GeometricTransform& t1,
                                        const GeometricTransform& t2,
                                        const Heatmap& pseudo) {
    const int K = pseudo.dim(0);
    const int HH = pseudo.dim(1), HW = pseudo.dim(2);
    const double sx = static_cast<double>(t1.width) / HW;
    const double sy = static_cast<double>(t1.height) / HH;
    const auto peaks = heatmap_argmax(pseudo);
    std::vector<uint8_t> mask(static_cast<size_t>(K), 0);
    for (int k = 0; k < K; ++k) {
        const double px = peaks[static_cast<size_t>(k)].first * sx;
        const double py = peaks[static_cast<size_t>(k)].second * sy;
        const auto [ux, uy] = t1.apply_inverse(px, py);
        if (ux < 0 || ux >= t1.width || uy < 0 || uy >= t1.height) continue;
        const auto [vx, vy] = t2.apply(ux, uy);
        if (vx < 0 || vx >= t2.width || vy < 0 || vy >= t2.height) continue;
        mask[static_cast<size_t>(k)] = 1;
    }
    return mask;
}

real unsup_loss(const Heatmap& student_out, const Heatmap& pseudo,
                const std::vector<real>& confidences, real tau_conf,
                const GeometricTransform& t1, const GeometricTransform& t2,
                const std::vector<uint8_t>& boundary_mask) {
    check_same_shape(student_out, pseudo, "unsup_loss");
    const int K = student_out.dim(0);
    const Heatmap sp = apply_inverse_to_heatmap(t2, student_out);
    const Heatmap pp = apply_inverse_to_heatmap(t1, pseudo);
    std::vector<uint8_t> mask(static_cast<size_t>(K), 0);
    for (int k = 0; k < K; ++k)
        mask[static_cast<size_t>(k)] =
            (confidences[static_cast<size_t>(k)] >= tau_conf &&
             boundary_mask[static_cast<size_t>(k)])
                ? 1
                : 0;
    return mse_heatmap_loss(sp, pp, mask);
}

// ---- Trainer ----

namespace {

/// Shuffled wrap-around index stream; reshuffles when exhausted.
class IndexStream {
public:
    IndexStream(std::vector<size_t> pool, Rng rng) : rng_(rng), order_(std::move(pool)) {
        reshuffle();
    }
    std::vector<size_t> next(size_t count) {
        std::vector<size_t> out;
        out.reserve(count);
        while (out.size() < count) {
            if (cursor_ >= order_.size()) reshuffle();
            out.push_back(order_[cursor_++]);
        }
        return out;
    }

private:
    void reshuffle() {
        for (size_t i = order_.size(); i > 1; --i)
            std::swap(order_[i - 1], order_[static_cast<size_t>(rng_.uniform_int(i))]);
        cursor_ = 0;
    }
    Rng rng_;
    std::vector<size_t> order_;
    size_t cursor_ = 0;
};

real channel_max(const real* ch, long cells) {
    real best = ch[0];
    for (long i = 1; i < cells; ++i)
        if (ch[i] > best) best = ch[i];
    return best;
}

PoseNet make_student(const FitOptions& opt) {
    opt.train.validate();
    opt.pose.validate();
    opt.gauss.validate();
    opt.aug.validate();
    opt.occlusion.validate(opt.pose.input_size, opt.pose.input_size);
    Rng rng = Rng(opt.train.seed).derive(0x11);
    return PoseNet(opt.pose, rng);
}

void scale_annotation(KeypointAnnotation& ann, double fx, double fy) {
    for (auto& c : ann.coords) {
        c.first *= fx;
        c.second *= fy;
    }
}

}  // namespace

Trainer::Trainer(const PoseDataset& source, const PoseDataset& target, FitOptions opt)
    : source_(source),
      target_(target),
      opt_(std::move(opt)),
      student_(make_student(opt_)),
      teacher_(student_.clone()),
      adam_(student_.params(), opt_.train.base_lr) {
    if (source_.schema().num_keypoints() != opt_.pose.num_keypoints)
        throw std::invalid_argument("Trainer: source schema K != pose num_keypoints");
    if (target_.schema().num_keypoints() != opt_.pose.num_keypoints)
        throw std::invalid_argument("Trainer: target schema K != pose num_keypoints");
    grid_w_ = opt_.pose.heatmap_size;
    grid_h_ = opt_.pose.heatmap_size;
    last_pseudo_mean_ = gaussian_channel_mean(opt_.gauss, grid_w_, grid_h_);

    if (opt_.ablation.style) {
        if (opt_.style_checkpoint.empty())
            throw std::invalid_argument("Trainer: stylization enabled but no style checkpoint given");
        style_.emplace(StyleModel::load(opt_.style_checkpoint));
        if (style_->config().image_size != opt_.pose.input_size)
            throw std::invalid_argument("Trainer: style model resolution != pose input size");
    }
    const int S = opt_.pose.input_size;
    source_pool_ = ImagePool{[this, S](size_t i) {
                                 Tensor img = source_.image(i);
                                 if (img.dim(1) != S || img.dim(2) != S)
                                     img = resize_bilinear(img, S, S);
                                 return img;
                             },
                             source_.size()};
    target_pool_ = ImagePool{[this, S](size_t i) {
                                 Tensor img = target_.image(i);
                                 if (img.dim(1) != S || img.dim(2) != S)
                                     img = resize_bilinear(img, S, S);
                                 return img;
                             },
                             target_.size()};
}

Tensor Trainer::load_source_input(size_t i, KeypointAnnotation* ann) const {
    const int S = opt_.pose.input_size;
    Tensor img = source_.image(i);
    KeypointAnnotation a = source_.annotation(i);
    if (img.dim(1) != S || img.dim(2) != S) {
        scale_annotation(a, static_cast<double>(S) / img.dim(2),
                         static_cast<double>(S) / img.dim(1));
        img = resize_bilinear(img, S, S);
    }
    *ann = std::move(a);
    return img;
}

Tensor Trainer::load_target_input(size_t i) const {
    const int S = opt_.pose.input_size;
    Tensor img = target_.image(i);
    if (img.dim(1) != S || img.dim(2) != S) img = resize_bilinear(img, S, S);
    return img;
}

BatchRecord Trainer::step(const std::vector<size_t>& source_idx,
                          const std::vector<size_t>& target_idx, int epoch, Rng& rng) {
    const TrainConfig& cfg = opt_.train;
    const int S = opt_.pose.input_size;
    const int K = opt_.pose.num_keypoints;
    const int GH = grid_h_, GW = grid_w_;
    const long gcells = static_cast<long>(GH) * GW;
    const long icells = 3L * S * S;

    BatchRecord rec;
    rec.epoch = epoch;
    rec.gt_gauss_mean_act = gaussian_channel_mean(opt_.gauss, GW, GH);

    student_.zero_grad();

    // ---- supervised branch (Eq. 2) ----
    const int Bs = static_cast<int>(source_idx.size());
    Tensor src_batch({Bs, 3, S, S});
    Tensor src_target({Bs, K, GH, GW});
    std::vector<uint8_t> src_mask(static_cast<size_t>(Bs) * K, 0);
    for (int b = 0; b < Bs; ++b) {
        KeypointAnnotation ann;
        Tensor img = load_source_input(source_idx[static_cast<size_t>(b)], &ann);
        auto [t, photo] = sample_augmentation(rng, opt_.aug, S, S);
        img = apply_to_image(t, photo, img);
        for (size_t k = 0; k < ann.coords.size(); ++k) {
            if (!ann.visible[k]) continue;
            const auto [x, y] = t.apply(ann.coords[k].first, ann.coords[k].second);
            ann.coords[k] = {x, y};
        }
        if (style_) {
            bool st = false;
            img = maybe_stylize(img, target_pool_, rng, cfg.stylize_prob, *style_, &st);
            rec.stylized_count += st ? 1 : 0;
        }
        GeneratedHeatmap gt = generate_heatmap(ann, S, S, GW, GH, opt_.gauss);
        for (long i = 0; i < icells; ++i) src_batch[b * icells + i] = img[i];
        for (long i = 0; i < static_cast<long>(K) * gcells; ++i)
            src_target[b * K * gcells + i] = gt.map[i];
        for (int k = 0; k < K; ++k)
            src_mask[static_cast<size_t>(b) * K + k] = gt.channel_mask[static_cast<size_t>(k)];
    }
    const Tensor pred = student_.forward(src_batch, true);
    long sup_kept = 0;
    const real sup_sum = kern::masked_sq_sum(pred.data(), src_target.data(), src_mask.data(),
                                             Bs * K, gcells, &sup_kept);
    if (sup_kept == 0) {
        diagnostics().all_channels_masked++;
        rec.sup = 0;
    } else {
        rec.sup = sup_sum / (static_cast<real>(sup_kept) * static_cast<real>(gcells));
        Tensor gpred = Tensor::zeros_like(pred);
        const real scale = real(1) / (static_cast<real>(sup_kept) * static_cast<real>(gcells));
        kern::masked_mse_backward(pred.data(), src_target.data(), src_mask.data(),
                                  Bs * K, gcells, scale, gpred.data());
        student_.backward(gpred);
    }

    // ---- unsupervised branch (Eq. 3) ----
    const bool unsup_active = opt_.ablation.mean_teacher && epoch >= cfg.warmup_supervised_epochs;
    if (unsup_active) {
        if (!teacher_init_) {
            teacher_ = student_.clone();
            teacher_init_ = true;
        }
        const int Bt = static_cast<int>(target_idx.size());

        // teacher branch: A1 then optional stylization toward source
        Tensor teacher_batch({Bt, 3, S, S});
        std::vector<GeometricTransform> t1s(static_cast<size_t>(Bt));
        std::vector<Tensor> raw_targets(static_cast<size_t>(Bt));
        for (int b = 0; b < Bt; ++b) {
            Tensor x = load_target_input(target_idx[static_cast<size_t>(b)]);
            auto [t1, p1] = sample_augmentation(rng, opt_.aug, S, S);
            t1s[static_cast<size_t>(b)] = t1;
            Tensor xt = apply_to_image(t1, p1, x);
            if (style_) {
                bool st = false;
                xt = maybe_stylize(xt, source_pool_, rng, cfg.stylize_prob, *style_, &st);
                rec.stylized_count += st ? 1 : 0;
            }
            for (long i = 0; i < icells; ++i) teacher_batch[b * icells + i] = xt[i];
            raw_targets[static_cast<size_t>(b)] = std::move(x);
        }
        const Tensor Ht = teacher_.forward(teacher_batch, false);
        rec.teacher_mean_act = parallel_sum(Ht.size(), [&](long i) { return Ht[i]; }) /
                               static_cast<real>(Ht.size());

        // confidences and pseudo-labels
        std::vector<real> confs(static_cast<size_t>(Bt) * K);
        std::vector<Heatmap> pseudos(static_cast<size_t>(Bt));
        for (int b = 0; b < Bt; ++b) {
            Heatmap raw({K, GH, GW});
            for (long i = 0; i < static_cast<long>(K) * gcells; ++i)
                raw[i] = Ht[b * K * gcells + i];
            if (opt_.ablation.normalize) {
                NormalizedHeatmap nh = normalize_heatmap(raw, opt_.gauss);
                for (int k = 0; k < K; ++k)
                    confs[static_cast<size_t>(b) * K + k] = nh.confidences[static_cast<size_t>(k)];
                pseudos[static_cast<size_t>(b)] = std::move(nh.map);
            } else {
                for (int k = 0; k < K; ++k)
                    confs[static_cast<size_t>(b) * K + k] =
                        channel_max(raw.data() + static_cast<long>(k) * gcells, gcells);
                pseudos[static_cast<size_t>(b)] = std::move(raw);
            }
        }
        rec.tau_conf = compute_confidence_threshold(confs, cfg.p);
        long passing = 0;
        for (real c : confs)
            if (c >= rec.tau_conf) ++passing;
        rec.pass_fraction = static_cast<real>(passing) / static_cast<real>(confs.size());

        // interior pseudo-channel mean activation (drift monitor)
        {
            const int R = opt_.gauss.truncation_radius;
            real sum = 0;
            long count = 0;
            for (int b = 0; b < Bt; ++b) {
                const auto peaks = heatmap_argmax(pseudos[static_cast<size_t>(b)]);
                for (int k = 0; k < K; ++k) {
                    const auto [cx, cy] = peaks[static_cast<size_t>(k)];
                    if (cx < R || cx >= GW - R || cy < R || cy >= GH - R) continue;
                    const real* ch = pseudos[static_cast<size_t>(b)].data() +
                                     static_cast<long>(k) * gcells;
                    real s = 0;
                    for (long i = 0; i < gcells; ++i) s += ch[i];
                    sum += s / static_cast<real>(gcells);
                    ++count;
                }
            }
            if (count > 0) last_pseudo_mean_ = sum / static_cast<real>(count);
            rec.pseudo_mean_act = last_pseudo_mean_;
        }

        // student branch: A2 then adaptive occlusion
        Tensor student_batch({Bt, 3, S, S});
        std::vector<GeometricTransform> t2s(static_cast<size_t>(Bt));
        for (int b = 0; b < Bt; ++b) {
            auto [t2, p2] = sample_augmentation(rng, opt_.aug, S, S);
            t2s[static_cast<size_t>(b)] = t2;
            Tensor xt = apply_to_image(t2, p2, raw_targets[static_cast<size_t>(b)]);
            if (opt_.ablation.occlusion) {
                Heatmap raw({K, GH, GW});
                for (long i = 0; i < static_cast<long>(K) * gcells; ++i)
                    raw[i] = Ht[b * K * gcells + i];
                // teacher coordinates live in the A1 frame; map into A2
                const auto m1inv = t1s[static_cast<size_t>(b)].inverse_matrix();
                const auto m2 = t2s[static_cast<size_t>(b)].matrix();
                const std::array<double, 6> cm = {
                    m2[0] * m1inv[0] + m2[1] * m1inv[3],
                    m2[0] * m1inv[1] + m2[1] * m1inv[4],
                    m2[0] * m1inv[2] + m2[1] * m1inv[5] + m2[2],
                    m2[3] * m1inv[0] + m2[4] * m1inv[3],
                    m2[3] * m1inv[1] + m2[4] * m1inv[4],
                    m2[3] * m1inv[2] + m2[4] * m1inv[5] + m2[5]};
                OcclusionResult occ = adaptive_occlusion(xt, raw, opt_.occlusion, rng, &cm);
                xt = std::move(occ.image);
            }
            for (long i = 0; i < icells; ++i) student_batch[b * icells + i] = xt[i];
        }
        const Tensor sout = student_.forward(student_batch, true);

        // de-augment both sides, gate, and pool the masked MSE
        Tensor warped_s({Bt, K, GH, GW});
        Tensor warped_p({Bt, K, GH, GW});
        std::vector<uint8_t> gate(static_cast<size_t>(Bt) * K, 0);
        const double gsx = static_cast<double>(GW) / S;
        const double gsy = static_cast<double>(GH) / S;
        std::vector<std::array<double, 6>> m2grids(static_cast<size_t>(Bt));
        for (int b = 0; b < Bt; ++b) {
            Heatmap souti({K, GH, GW});
            for (long i = 0; i < static_cast<long>(K) * gcells; ++i)
                souti[i] = sout[b * K * gcells + i];
            const Heatmap ws = apply_inverse_to_heatmap(t2s[static_cast<size_t>(b)], souti);
            const Heatmap wp = apply_inverse_to_heatmap(t1s[static_cast<size_t>(b)],
                                                        pseudos[static_cast<size_t>(b)]);
            for (long i = 0; i < static_cast<long>(K) * gcells; ++i) {
                warped_s[b * K * gcells + i] = ws[i];
                warped_p[b * K * gcells + i] = wp[i];
            }
            const auto bmask = unsup_channel_mask(t1s[static_cast<size_t>(b)],
                                                  t2s[static_cast<size_t>(b)],
                                                  pseudos[static_cast<size_t>(b)]);
            for (int k = 0; k < K; ++k)
                gate[static_cast<size_t>(b) * K + k] =
                    (confs[static_cast<size_t>(b) * K + k] >= rec.tau_conf && bmask[static_cast<size_t>(k)])
                        ? 1
                        : 0;
            m2grids[static_cast<size_t>(b)] =
                affine_to_grid(t2s[static_cast<size_t>(b)].matrix(), gsx, gsy);
        }
        long unsup_kept = 0;
        const real unsup_sum = kern::masked_sq_sum(warped_s.data(), warped_p.data(), gate.data(),
                                                   Bt * K, gcells, &unsup_kept);
        if (unsup_kept == 0) {
            diagnostics().all_channels_masked++;
            rec.unsup = 0;
        } else {
            rec.unsup = unsup_sum / (static_cast<real>(unsup_kept) * static_cast<real>(gcells));
            if (cfg.lambda_unsup != 0) {
                Tensor gwarped = Tensor::zeros_like(warped_s);
                const real scale = cfg.lambda_unsup /
                                   (static_cast<real>(unsup_kept) * static_cast<real>(gcells));
                kern::masked_mse_backward(warped_s.data(), warped_p.data(), gate.data(),
                                          Bt * K, gcells, scale, gwarped.data());
                Tensor gsout = Tensor::zeros_like(sout);
                for (int b = 0; b < Bt; ++b) {
                    const bool ident = t2s[static_cast<size_t>(b)].is_identity();
                    if (ident) {
                        for (long i = 0; i < static_cast<long>(K) * gcells; ++i)
                            gsout[b * K * gcells + i] = gwarped[b * K * gcells + i];
                    } else {
                        kern::warp_bilinear_backward(gwarped.data() + static_cast<long>(b) * K * gcells,
                                                     K, GH, GW,
                                                     m2grids[static_cast<size_t>(b)].data(),
                                                     gsout.data() + static_cast<long>(b) * K * gcells);
                    }
                }
                student_.backward(gsout);
            }
        }
    }

    rec.total = rec.sup + cfg.lambda_unsup * rec.unsup;

    adam_.set_lr(cfg.lr_at(epoch));
    adam_.step(student_.params());
    if (unsup_active) ema_update(teacher_, student_, cfg.eta, cfg.ema_running_stats);
    return rec;
}

FitResult Trainer::run() {
    const TrainConfig& cfg = opt_.train;
    fs::create_directories(opt_.out_dir);
    const std::string metrics_path = (fs::path(opt_.out_dir) / "metrics.jsonl").string();
    const std::string ckpt_path = (fs::path(opt_.out_dir) / "checkpoint.bin").string();
    std::ofstream metrics(metrics_path);
    if (!metrics) throw std::runtime_error("fit: cannot write " + metrics_path);

    Rng master(cfg.seed);

    // target train/val split; annotations for the val part are read through
    // the evaluation path only
    auto parts = split_dataset(target_.size(), {1.0 - cfg.val_fraction, cfg.val_fraction},
                               master.derive(0x41).seed());
    std::vector<size_t> tgt_train = std::move(parts[0]);
    std::vector<size_t> val_idx = std::move(parts[1]);
    std::sort(val_idx.begin(), val_idx.end());
    const auto all_eval_anns = load_eval_annotations(target_.root());
    std::vector<KeypointAnnotation> val_gts;
    val_gts.reserve(val_idx.size());
    for (size_t i : val_idx) val_gts.push_back(all_eval_anns.at(i));

    std::vector<size_t> src_all(source_.size());
    std::iota(src_all.begin(), src_all.end(), size_t{0});
    IndexStream src_stream(src_all, master.derive(0x21));
    IndexStream tgt_stream(tgt_train, master.derive(0x22));
    Rng step_rng = master.derive(0x31);

    double val_pck = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<json> lines;
        lines.reserve(static_cast<size_t>(cfg.iters_per_epoch));
        for (int iter = 0; iter < cfg.iters_per_epoch; ++iter) {
            const auto sidx = src_stream.next(static_cast<size_t>(cfg.batch_size));
            const auto tidx = tgt_stream.next(static_cast<size_t>(cfg.batch_size));
            BatchRecord r = step(sidx, tidx, epoch, step_rng);
            r.iter = iter;
            json j;
            j["epoch"] = r.epoch;
            j["iter"] = r.iter;
            j["sup"] = r.sup;
            j["unsup"] = r.unsup;
            j["total"] = r.total;
            j["tau_conf"] = r.tau_conf;
            j["pass_fraction"] = r.pass_fraction;
            j["teacher_mean_act"] = r.teacher_mean_act;
            j["pseudo_mean_act"] = r.pseudo_mean_act;
            j["gt_gauss_mean_act"] = r.gt_gauss_mean_act;
            j["stylized_count"] = r.stylized_count;
            lines.push_back(std::move(j));
        }
        PoseNet& reported = (opt_.ablation.mean_teacher && teacher_init_) ? teacher_ : student_;
        const PCKReport rep = evaluate_model(reported, target_, val_idx, val_gts, opt_.pck_alpha);
        val_pck = rep.overall;
        lines.back()["val_pck"] = val_pck;
        for (const auto& j : lines) metrics << j.dump() << "\n";
        metrics.flush();
    }

    // final checkpoint and PCK table from the last epoch
    {
        nlohmann::ordered_json meta;
        meta["kind"] = "pose-checkpoint";
        meta["epoch"] = cfg.epochs;
        meta["has_teacher"] = teacher_init_;
        meta["adam_steps"] = adam_.steps_taken();
        meta["config"] = {{"input_size", opt_.pose.input_size},
                          {"heatmap_size", opt_.pose.heatmap_size},
                          {"num_keypoints", opt_.pose.num_keypoints},
                          {"preset", opt_.pose.preset},
                          {"encoder_channels", opt_.pose.encoder_channels},
                          {"deconv_channels", opt_.pose.deconv_channels}};
        std::vector<NamedTensorView> tensors;
        for (auto& p : student_.params()) tensors.push_back({"student." + p.name, p.value});
        for (auto& b : student_.buffers()) tensors.push_back({"student.buf." + b.name, b.value});
        for (auto& p : teacher_.params()) tensors.push_back({"teacher." + p.name, p.value});
        for (auto& b : teacher_.buffers()) tensors.push_back({"teacher.buf." + b.name, b.value});
        auto params = student_.params();
        for (size_t i = 0; i < params.size(); ++i) {
            tensors.push_back({"adam.m." + params[i].name, &adam_.moment1()[i]});
            tensors.push_back({"adam.v." + params[i].name, &adam_.moment2()[i]});
        }
        write_container(ckpt_path, meta, tensors);
    }
    {
        PoseNet& reported = (opt_.ablation.mean_teacher && teacher_init_) ? teacher_ : student_;
        const PCKReport rep = evaluate_model(reported, target_, val_idx, val_gts, opt_.pck_alpha);
        std::ofstream txt(fs::path(opt_.out_dir) / "pck.txt");
        txt << render_report(rep, false);
        std::ofstream csv(fs::path(opt_.out_dir) / "pck.csv");
        csv << render_report(rep, true);
    }

    FitResult res;
    res.final_val_pck = val_pck;
    res.checkpoint_path = ckpt_path;
    res.metrics_path = metrics_path;
    res.epochs_run = cfg.epochs;
    return res;
}

FitResult fit(const PoseDataset& source, const PoseDataset& target, const FitOptions& opt) {
    Trainer t(source, target, opt);
    return t.run();
}

PoseCheckpoint load_pose_checkpoint(const std::string& path) {
    Container c = read_container(path);
    if (c.meta.value("kind", "") != "pose-checkpoint")
        throw std::runtime_error("load_pose_checkpoint: " + path + " is not a pose checkpoint");
    PoseNetConfig cfg;
    const auto& j = c.meta.at("config");
    cfg.input_size = j.at("input_size").get<int>();
    cfg.heatmap_size = j.at("heatmap_size").get<int>();
    cfg.num_keypoints = j.at("num_keypoints").get<int>();
    cfg.preset = j.at("preset").get<std::string>();
    cfg.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
    cfg.deconv_channels = j.at("deconv_channels").get<std::vector<int>>();

    Rng rng(0);
    PoseCheckpoint ck{cfg, PoseNet(cfg, rng), PoseNet(cfg, rng), false,
                      c.meta.value("epoch", 0)};
    ck.has_teacher = c.meta.value("has_teacher", false);
    auto fill = [&](PoseNet& net, const std::string& prefix) {
        for (auto& p : net.params()) {
            const Tensor& t = c.require(prefix + p.name);
            check_same_shape(*p.value, t, "load_pose_checkpoint");
            *p.value = t;
        }
        for (auto& b : net.buffers()) {
            const Tensor& t = c.require(prefix + "buf." + b.name);
            check_same_shape(*b.value, t, "load_pose_checkpoint");
            *b.value = t;
        }
    };
    fill(ck.student, "student.");
    fill(ck.teacher, "teacher.");
    return ck;
}

}  // namespace poseadapt
