#include "poseadapt/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace poseadapt {

int KeypointSchema::index_of(const std::string& name) const {
    for (size_t i = 0; i < keypoint_names.size(); ++i)
        if (keypoint_names[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

json schema_to_json(const KeypointSchema& s, int w, int h) {
    json j;
    j["keypoint_names"] = s.keypoint_names;
    json groups = json::array();
    for (const auto& g : s.groups) {
        json e;
        e["name"] = g.name;
        e["members"] = g.members;
        groups.push_back(e);
    }
    j["groups"] = groups;
    j["image_size"] = {w, h};
    return j;
}

KeypointSchema schema_from_json(const json& j, int* w, int* h) {
    KeypointSchema s;
    s.keypoint_names = j.at("keypoint_names").get<std::vector<std::string>>();
    for (const auto& e : j.at("groups")) {
        KeypointGroup g;
        g.name = e.at("name").get<std::string>();
        g.members = e.at("members").get<std::vector<std::string>>();
        for (const auto& m : g.members)
            if (s.index_of(m) < 0)
                throw std::runtime_error("manifest: group '" + g.name +
                                         "' references unknown keypoint '" + m + "'");
        s.groups.push_back(std::move(g));
    }
    const auto sz = j.at("image_size");
    *w = sz.at(0).get<int>();
    *h = sz.at(1).get<int>();
    return s;
}

json keypoints_to_json(const KeypointAnnotation& a) {
    json arr = json::array();
    for (size_t k = 0; k < a.coords.size(); ++k)
        arr.push_back({a.coords[k].first, a.coords[k].second,
                       static_cast<int>(a.visible[k])});
    return arr;
}

KeypointAnnotation keypoints_from_json(const json& arr) {
    KeypointAnnotation a;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 3)
            throw std::runtime_error("manifest: keypoint entries must be [x, y, visible]");
        a.coords.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
        a.visible.push_back(e.at(2).get<int>() ? 1 : 0);
    }
    return a;
}

}  // namespace

PoseDataset PoseDataset::load(const std::string& root) {
    const fs::path manifest = fs::path(root) / "manifest.json";
    if (!fs::exists(manifest))
        throw std::runtime_error("load_dataset: missing " + manifest.string());
    std::ifstream is(manifest);
    json j;
    try {
        j = json::parse(is);
    } catch (const std::exception& e) {
        throw std::runtime_error("load_dataset: malformed manifest " + manifest.string() +
                                 ": " + e.what());
    }

    PoseDataset ds;
    ds.root_ = root;
    ds.schema_ = schema_from_json(j.at("schema"), &ds.image_w_, &ds.image_h_);
    const int K = ds.schema_.num_keypoints();

    size_t idx = 0;
    for (const auto& e : j.at("samples")) {
        SampleRecord r;
        r.image = e.at("image").get<std::string>();
        r.domain = e.at("domain").get<std::string>();
        if (r.domain != "source" && r.domain != "target")
            throw std::runtime_error("load_dataset: sample " + std::to_string(idx) +
                                     " (" + r.image + ") has unknown domain '" + r.domain + "'");
        if (e.contains("keypoints")) {
            KeypointAnnotation a = keypoints_from_json(e.at("keypoints"));
            if (a.num_keypoints() != K)
                throw std::runtime_error("load_dataset: sample " + std::to_string(idx) +
                                         " (" + r.image + ") has " +
                                         std::to_string(a.num_keypoints()) +
                                         " keypoints, schema expects " + std::to_string(K));
            r.keypoints = std::move(a);
        }
        if (!fs::exists(fs::path(root) / r.image))
            throw std::runtime_error("load_dataset: sample " + std::to_string(idx) +
                                     " image file missing: " + r.image);
        ds.samples_.push_back(std::move(r));
        ++idx;
    }
    return ds;
}

const KeypointAnnotation& PoseDataset::annotation(size_t i) const {
    const SampleRecord& r = samples_.at(i);
    if (r.domain == "target")
        throw std::logic_error("PoseDataset: target annotations are not available to training");
    if (!r.keypoints)
        throw std::logic_error("PoseDataset: sample " + std::to_string(i) + " is unlabeled");
    return *r.keypoints;
}

Tensor PoseDataset::image(size_t i) const {
    const fs::path p = fs::path(root_) / samples_.at(i).image;
    return image_to_tensor(read_png(p.string()));
}

std::vector<KeypointAnnotation> load_eval_annotations(const std::string& root) {
    const fs::path path = fs::path(root) / "annotations_eval.json";
    if (!fs::exists(path)) {
        // labeled datasets keep annotations in the manifest itself
        PoseDataset ds = PoseDataset::load(root);
        std::vector<KeypointAnnotation> out;
        for (size_t i = 0; i < ds.size(); ++i) {
            if (!ds.labeled(i))
                throw std::runtime_error("load_eval_annotations: no annotations_eval.json and "
                                         "unlabeled samples in " + root);
            out.push_back(*ds.samples()[i].keypoints);
        }
        return out;
    }
    std::ifstream is(path);
    json j = json::parse(is);
    std::vector<KeypointAnnotation> out;
    for (const auto& e : j.at("annotations")) out.push_back(keypoints_from_json(e));
    return out;
}

void write_manifest(const std::string& root, const KeypointSchema& schema,
                    int image_w, int image_h, const std::vector<SampleRecord>& samples,
                    const std::vector<KeypointAnnotation>* eval_annotations) {
    fs::create_directories(fs::path(root));
    json j;
    j["schema"] = schema_to_json(schema, image_w, image_h);
    json arr = json::array();
    for (const auto& r : samples) {
        json e;
        e["image"] = r.image;
        e["domain"] = r.domain;
        if (r.keypoints) e["keypoints"] = keypoints_to_json(*r.keypoints);
        arr.push_back(e);
    }
    j["samples"] = arr;
    std::ofstream os(fs::path(root) / "manifest.json");
    os << j.dump(2) << "\n";

    if (eval_annotations) {
        json ev;
        json anns = json::array();
        for (const auto& a : *eval_annotations) anns.push_back(keypoints_to_json(a));
        ev["annotations"] = anns;
        std::ofstream evs(fs::path(root) / "annotations_eval.json");
        evs << ev.dump(2) << "\n";
    }
}

// ---- synthetic generation ----

void SynthConfig::validate() const {
    if (image_size < 16) throw std::invalid_argument("SynthConfig: image_size too small");
    if (source_count < 1 || target_count < 1)
        throw std::invalid_argument("SynthConfig: counts must be positive");
    for (const DomainSynthConfig* d : {&source, &target}) {
        if (d->scale_min <= 0 || d->scale_max < d->scale_min)
            throw std::invalid_argument("SynthConfig: degenerate figure scale range");
        if (!(d->body_angle_min <= d->body_angle_max))
            throw std::invalid_argument("SynthConfig: inverted body angle range");
        if (d->texture != "none" && d->texture != "stripes" && d->texture != "checker")
            throw std::invalid_argument("SynthConfig: unknown texture '" + d->texture + "'");
    }
}

KeypointSchema biped10_schema() {
    KeypointSchema s;
    s.keypoint_names = {"head", "neck", "spine", "pelvis", "l_elbow",
                        "l_hand", "r_elbow", "r_hand", "l_foot", "r_foot"};
    s.groups = {{"Head", {"head", "neck"}},
                {"Torso", {"spine", "pelvis"}},
                {"Arms", {"l_elbow", "l_hand", "r_elbow", "r_hand"}},
                {"Legs", {"l_foot", "r_foot"}}};
    return s;
}

namespace {

struct Vec2 {
    double x, y;
};

double dist_to_segment(double px, double py, Vec2 a, Vec2 b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
    t = t < 0 ? 0 : (t > 1 ? 1 : t);
    const double cx = a.x + t * dx, cy = a.y + t * dy;
    return std::sqrt((px - cx) * (px - cx) + (py - cy) * (py - cy));
}

// coverage ramp over a one-pixel edge
double coverage(double dist, double radius) {
    const double d = dist - radius;
    if (d <= -0.5) return 1.0;
    if (d >= 0.5) return 0.0;
    return 0.5 - d;
}

}  // namespace

SynthSample render_synth_sample(const DomainSynthConfig& d, int image_size, Rng& rng) {
    const double S = image_size;
    const double figure_scale = rng.uniform(d.scale_min, d.scale_max);
    const double body_angle = rng.uniform(d.body_angle_min, d.body_angle_max) * 0.017453292519943295;
    const double swing = d.limb_swing * 0.017453292519943295;

    const double rx = S * 0.5 + rng.uniform(-d.root_jitter, d.root_jitter) * S;
    const double ry = S * 0.58 + rng.uniform(-d.root_jitter, d.root_jitter) * S;

    auto dir = [&](double ang) { return Vec2{std::sin(ang), -std::cos(ang)}; };
    const double L = 0.14 * S * figure_scale;  // base bone length

    const double spine_a = body_angle + rng.uniform(-0.15, 0.15) * swing;
    const double neck_a = body_angle + rng.uniform(-0.15, 0.15) * swing;
    const double head_a = body_angle + rng.uniform(-0.3, 0.3) * swing;
    const double arm_l1 = body_angle + 1.9 + rng.uniform(-1.0, 1.0) * swing;
    const double arm_l2 = arm_l1 + rng.uniform(-1.0, 1.0) * swing;
    const double arm_r1 = body_angle - 1.9 + rng.uniform(-1.0, 1.0) * swing;
    const double arm_r2 = arm_r1 + rng.uniform(-1.0, 1.0) * swing;
    const double leg_l = body_angle + 2.85 + rng.uniform(-0.7, 0.7) * swing;
    const double leg_r = body_angle - 2.85 + rng.uniform(-0.7, 0.7) * swing;

    const Vec2 pelvis{rx, ry};
    const Vec2 spine{pelvis.x + L * dir(spine_a).x, pelvis.y + L * dir(spine_a).y};
    const Vec2 neck{spine.x + L * dir(neck_a).x, spine.y + L * dir(neck_a).y};
    const Vec2 head{neck.x + 0.6 * L * dir(head_a).x, neck.y + 0.6 * L * dir(head_a).y};
    const Vec2 l_elbow{neck.x + 0.8 * L * dir(arm_l1).x, neck.y + 0.8 * L * dir(arm_l1).y};
    const Vec2 l_hand{l_elbow.x + 0.8 * L * dir(arm_l2).x, l_elbow.y + 0.8 * L * dir(arm_l2).y};
    const Vec2 r_elbow{neck.x + 0.8 * L * dir(arm_r1).x, neck.y + 0.8 * L * dir(arm_r1).y};
    const Vec2 r_hand{r_elbow.x + 0.8 * L * dir(arm_r2).x, r_elbow.y + 0.8 * L * dir(arm_r2).y};
    const Vec2 l_foot{pelvis.x + 1.5 * L * dir(leg_l).x, pelvis.y + 1.5 * L * dir(leg_l).y};
    const Vec2 r_foot{pelvis.x + 1.5 * L * dir(leg_r).x, pelvis.y + 1.5 * L * dir(leg_r).y};

    const Vec2 joints[10] = {head, neck, spine, pelvis, l_elbow,
                             l_hand, r_elbow, r_hand, l_foot, r_foot};
    const std::pair<int, int> bones[9] = {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 5},
                                          {1, 6}, {6, 7}, {3, 8}, {3, 9}};

    const double bone_r = std::max(1.2, 0.018 * S) * figure_scale;
    const double joint_r = std::max(1.8, 0.026 * S) * figure_scale;

    // per-image appearance draws
    const double tex_phase = rng.uniform(0.0, 1.0);
    const double tex_angle = rng.uniform(-0.3, 0.3) + 0.7854;
    std::array<double, 3> tint;
    for (auto& t : tint) t = 1.0 + rng.uniform(-d.color_jitter, d.color_jitter);

    Tensor img({3, image_size, image_size});
    const long cells = static_cast<long>(image_size) * image_size;
    const double ca = std::cos(tex_angle), sa = std::sin(tex_angle);

    for (int y = 0; y < image_size; ++y) {
        for (int x = 0; x < image_size; ++x) {
            double r = d.background[0], g = d.background[1], b = d.background[2];
            if (d.texture == "stripes") {
                const double u = (ca * x + sa * y) / d.texture_period + tex_phase;
                if (static_cast<long>(std::floor(u * 2.0)) % 2 == 0) {
                    r = d.texture_color[0];
                    g = d.texture_color[1];
                    b = d.texture_color[2];
                }
            } else if (d.texture == "checker") {
                const long ux = static_cast<long>(std::floor(x / d.texture_period + tex_phase));
                const long uy = static_cast<long>(std::floor(y / d.texture_period + tex_phase));
                if ((ux + uy) % 2 == 0) {
                    r = d.texture_color[0];
                    g = d.texture_color[1];
                    b = d.texture_color[2];
                }
            }
            double bone_cov = 0;
            for (const auto& [i0, i1] : bones)
                bone_cov = std::max(bone_cov, coverage(dist_to_segment(x, y, joints[i0], joints[i1]), bone_r));
            if (bone_cov > 0) {
                r = r + (d.bone_color[0] - r) * bone_cov;
                g = g + (d.bone_color[1] - g) * bone_cov;
                b = b + (d.bone_color[2] - b) * bone_cov;
            }
            double joint_cov = 0;
            for (const auto& j : joints) {
                const double dist = std::sqrt((x - j.x) * (x - j.x) + (y - j.y) * (y - j.y));
                joint_cov = std::max(joint_cov, coverage(dist, joint_r));
            }
            if (joint_cov > 0) {
                r = r + (d.joint_color[0] - r) * joint_cov;
                g = g + (d.joint_color[1] - g) * joint_cov;
                b = b + (d.joint_color[2] - b) * joint_cov;
            }
            img.data()[0 * cells + y * image_size + x] = static_cast<real>(r * tint[0]);
            img.data()[1 * cells + y * image_size + x] = static_cast<real>(g * tint[1]);
            img.data()[2 * cells + y * image_size + x] = static_cast<real>(b * tint[2]);
        }
    }
    if (d.noise_std > 0) {
        for (long i = 0; i < img.size(); ++i)
            img[i] += static_cast<real>(rng.normal(0.0, d.noise_std));
    }
    clamp01(img);

    SynthSample out;
    out.image = std::move(img);
    for (const auto& j : joints) {
        out.ann.coords.emplace_back(j.x, j.y);
        out.ann.visible.push_back(j.x >= 0 && j.x < S && j.y >= 0 && j.y < S ? 1 : 0);
    }
    return out;
}

void generate_synthetic(const SynthConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const KeypointSchema schema = biped10_schema();
    Rng master(cfg.seed);

    auto render_domain = [&](const DomainSynthConfig& d, const std::string& name,
                             int count, uint64_t tag) {
        const fs::path droot = fs::path(out_dir) / name;
        fs::create_directories(droot / "images");
        std::vector<SampleRecord> records;
        std::vector<KeypointAnnotation> anns;
        for (int i = 0; i < count; ++i) {
            Rng srng = master.derive(tag * 1000003ULL + static_cast<uint64_t>(i));
            SynthSample s = render_synth_sample(d, cfg.image_size, srng);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "images/%06d.png", i);
            write_png((droot / buf).string(), tensor_to_image(s.image));
            SampleRecord r;
            r.image = buf;
            r.domain = name;
            if (name == "source") r.keypoints = s.ann;
            records.push_back(std::move(r));
            anns.push_back(std::move(s.ann));
        }
        if (name == "source")
            write_manifest(droot.string(), schema, cfg.image_size, cfg.image_size, records);
        else
            write_manifest(droot.string(), schema, cfg.image_size, cfg.image_size, records, &anns);
    };

    render_domain(cfg.source, "source", cfg.source_count, 1);
    render_domain(cfg.target, "target", cfg.target_count, 2);
}

std::vector<std::vector<size_t>> split_dataset(size_t n, const std::vector<double>& fractions,
                                               uint64_t seed) {
    double sum = 0;
    for (double f : fractions) {
        if (f < 0) throw std::invalid_argument("split_dataset: negative fraction");
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split_dataset: fractions must sum to 1");

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    Rng rng(seed);
    for (size_t i = n; i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.uniform_int(i));
        std::swap(idx[i - 1], idx[j]);
    }

    std::vector<std::vector<size_t>> parts;
    double cum = 0;
    size_t start = 0;
    for (size_t p = 0; p < fractions.size(); ++p) {
        cum += fractions[p];
        const size_t end = p + 1 == fractions.size()
                               ? n
                               : static_cast<size_t>(std::llround(cum * static_cast<double>(n)));
        parts.emplace_back(idx.begin() + static_cast<long>(start), idx.begin() + static_cast<long>(end));
        start = end;
    }
    return parts;
}

}  // namespace poseadapt
