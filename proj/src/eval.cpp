#include "poseadapt/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace poseadapt {

PCKReport pck(const std::vector<KeypointAnnotation>& preds,
              const std::vector<KeypointAnnotation>& gts,
              double alpha, int image_w, int image_h,
              const KeypointSchema& schema) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("pck: prediction/ground-truth count mismatch");
    const int K = schema.num_keypoints();

    PCKReport rep;
    rep.alpha = alpha;
    rep.threshold_px = alpha * static_cast<double>(std::max(image_w, image_h));
    rep.keypoint_names = schema.keypoint_names;
    rep.correct.assign(static_cast<size_t>(K), 0);
    rep.total.assign(static_cast<size_t>(K), 0);

    for (size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i];
        const auto& g = gts[i];
        if (p.num_keypoints() != K || g.num_keypoints() != K)
            throw std::invalid_argument("pck: sample " + std::to_string(i) +
                                        " keypoint count does not match schema");
        for (int k = 0; k < K; ++k) {
            if (!g.visible[static_cast<size_t>(k)]) continue;
            rep.total[static_cast<size_t>(k)]++;
            const double dx = p.coords[static_cast<size_t>(k)].first - g.coords[static_cast<size_t>(k)].first;
            const double dy = p.coords[static_cast<size_t>(k)].second - g.coords[static_cast<size_t>(k)].second;
            if (std::sqrt(dx * dx + dy * dy) <= rep.threshold_px)
                rep.correct[static_cast<size_t>(k)]++;
        }
    }

    auto ratio = [](long c, long t) { return t ? 100.0 * static_cast<double>(c) / static_cast<double>(t) : 0.0; };
    for (const auto& grp : schema.groups) {
        long c = 0, t = 0;
        for (const auto& m : grp.members) {
            const int k = schema.index_of(m);
            if (k < 0) throw std::invalid_argument("pck: unknown group member '" + m + "'");
            c += rep.correct[static_cast<size_t>(k)];
            t += rep.total[static_cast<size_t>(k)];
        }
        rep.group_ratios.emplace_back(grp.name, ratio(c, t));
    }
    long c = 0, t = 0;
    for (int k = 0; k < K; ++k) {
        c += rep.correct[static_cast<size_t>(k)];
        t += rep.total[static_cast<size_t>(k)];
    }
    rep.overall = ratio(c, t);
    return rep;
}

PCKReport evaluate_model(PoseNet& model, const PoseDataset& ds,
                         const std::vector<size_t>& indices,
                         const std::vector<KeypointAnnotation>& gts,
                         double alpha, int batch_size) {
    if (indices.size() != gts.size())
        throw std::invalid_argument("evaluate_model: index/annotation count mismatch");
    if (!gts.empty() && gts[0].num_keypoints() != model.config().num_keypoints)
        throw std::invalid_argument("evaluate_model: model K does not match dataset schema");
    const int S = model.config().input_size;

    std::vector<KeypointAnnotation> preds;
    preds.reserve(indices.size());
    for (size_t off = 0; off < indices.size(); off += static_cast<size_t>(batch_size)) {
        const size_t bsz = std::min(static_cast<size_t>(batch_size), indices.size() - off);
        Tensor batch({static_cast<int>(bsz), 3, S, S});
        const long per = 3L * S * S;
        for (size_t b = 0; b < bsz; ++b) {
            Tensor img = ds.image(indices[off + b]);
            if (img.dim(1) != S || img.dim(2) != S) img = resize_bilinear(img, S, S);
            for (long i = 0; i < per; ++i) batch[static_cast<long>(b) * per + i] = img[i];
        }
        const Tensor heat = model.forward(batch, false);
        const int K = heat.dim(1), HH = heat.dim(2), HW = heat.dim(3);
        const long hper = static_cast<long>(K) * HH * HW;
        for (size_t b = 0; b < bsz; ++b) {
            Tensor one({K, HH, HW});
            for (long i = 0; i < hper; ++i) one[i] = heat[static_cast<long>(b) * hper + i];
            KeypointAnnotation ann = decode_heatmap(one, S, S);
            // decoded coordinates live at model resolution; rescale to dataset pixels
            if (ds.image_w() != S || ds.image_h() != S) {
                const double fx = static_cast<double>(ds.image_w()) / S;
                const double fy = static_cast<double>(ds.image_h()) / S;
                for (auto& c : ann.coords) {
                    c.first *= fx;
                    c.second *= fy;
                }
            }
            preds.push_back(std::move(ann));
        }
    }
    return pck(preds, gts, alpha, ds.image_w(), ds.image_h(), ds.schema());
}

std::string render_report(const PCKReport& rep, bool csv) {
    std::vector<std::pair<std::string, double>> cols = rep.group_ratios;
    cols.emplace_back("All", rep.overall);

    std::ostringstream os;
    char buf[64];
    if (csv) {
        for (size_t i = 0; i < cols.size(); ++i) {
            if (i) os << ",";
            os << cols[i].first;
        }
        os << "\n";
        for (size_t i = 0; i < cols.size(); ++i) {
            if (i) os << ",";
            std::snprintf(buf, sizeof(buf), "%.1f", cols[i].second);
            os << buf;
        }
        os << "\n";
        return os.str();
    }
    std::vector<size_t> widths;
    for (const auto& [name, v] : cols) {
        std::snprintf(buf, sizeof(buf), "%.1f", v);
        widths.push_back(std::max(name.size(), std::string(buf).size()));
    }
    for (size_t i = 0; i < cols.size(); ++i) {
        if (i) os << "  ";
        os << cols[i].first;
        for (size_t p = cols[i].first.size(); p < widths[i]; ++p) os << " ";
    }
    os << "\n";
    for (size_t i = 0; i < cols.size(); ++i) {
        if (i) os << "  ";
        std::snprintf(buf, sizeof(buf), "%.1f", cols[i].second);
        std::string s(buf);
        os << s;
        for (size_t p = s.size(); p < widths[i]; ++p) os << " ";
    }
    os << "\n";
    return os.str();
}

}  // namespace poseadapt
