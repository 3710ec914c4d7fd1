#include "medimg/clusterseg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "medimg/imgcore.hpp"

namespace medimg::cluster {

namespace {

double objective(const FeatureMatrix& x, const FuzzyPartition& p, double m) {
    double j = 0.0;
    for (int i = 0; i < p.c; ++i)
        for (int k = 0; k < p.n; ++k) {
            double d2 = 0.0;
            for (int t = 0; t < p.d; ++t) {
                const double diff = x.at(k, t) - p.v[static_cast<std::size_t>(i) * p.d + t];
                d2 += diff * diff;
            }
            j += std::pow(p.u[static_cast<std::size_t>(i) * p.n + k], m) * d2;
        }
    return j;
}

struct Samples {
    std::vector<int> index;  // raster index per sample
    FeatureMatrix features;
};

// One feature per channel, each min-max normalised over the masked pixels.
Samples masked_samples(const std::vector<const GrayImage*>& channels, const BinaryMask& mask) {
    Samples s;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) s.index.push_back(static_cast<int>(i));
    s.features = FeatureMatrix(static_cast<int>(s.index.size()), static_cast<int>(channels.size()));
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const FloatImage norm = normalize_unit(*channels[c], &mask);
        for (std::size_t k = 0; k < s.index.size(); ++k)
            s.features.at(static_cast<int>(k), static_cast<int>(c)) = norm[s.index[k]];
    }
    return s;
}

bool single_level(const GrayImage& img, const BinaryMask& mask) {
    int first = -1;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        if (first < 0)
            first = img[i];
        else if (img[i] != first)
            return false;
    }
    return true;
}

}  // namespace

FuzzyPartition fcm(const FeatureMatrix& data, const FcmConfig& cfg) {
    if (cfg.clusters < 2) throw ConfigError("fcm: need at least two clusters");
    if (!(cfg.m > 1.0)) throw ConfigError("fcm: fuzzifier m must exceed 1");
    if (cfg.max_iter < 1 || !(cfg.eps >= 0.0)) throw ConfigError("fcm: invalid stopping rule");
    if (data.d < 1 || data.n < cfg.clusters) throw ConfigError("fcm: need at least C samples");
    for (double v : data.values)
        if (!std::isfinite(v)) throw ConfigError("fcm: data contains NaN or infinity");

    FuzzyPartition p;
    p.c = cfg.clusters;
    p.n = data.n;
    p.d = data.d;
    p.u.resize(static_cast<std::size_t>(p.c) * p.n);
    p.v.assign(static_cast<std::size_t>(p.c) * p.d, 0.0);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& u : p.u) u = uni(rng);
    for (int k = 0; k < p.n; ++k) {
        double s = 0.0;
        for (int i = 0; i < p.c; ++i) s += p.u[static_cast<std::size_t>(i) * p.n + k];
        for (int i = 0; i < p.c; ++i) p.u[static_cast<std::size_t>(i) * p.n + k] /= s;
    }

    const double expo = 1.0 / (cfg.m - 1.0);
    std::vector<double> um(p.u.size()), d2(p.c);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        for (std::size_t q = 0; q < p.u.size(); ++q) um[q] = std::pow(p.u[q], cfg.m);
        for (int i = 0; i < p.c; ++i) {
            double den = 0.0;
            std::vector<double> num(p.d, 0.0);
            for (int k = 0; k < p.n; ++k) {
                const double w = um[static_cast<std::size_t>(i) * p.n + k];
                den += w;
                for (int t = 0; t < p.d; ++t) num[t] += w * data.at(k, t);
            }
            if (den > 0.0)
                for (int t = 0; t < p.d; ++t) p.v[static_cast<std::size_t>(i) * p.d + t] = num[t] / den;
        }

        for (int k = 0; k < p.n; ++k) {
            double dmin = std::numeric_limits<double>::infinity();
            for (int i = 0; i < p.c; ++i) {
                double s = 0.0;
                for (int t = 0; t < p.d; ++t) {
                    const double diff = data.at(k, t) - p.v[static_cast<std::size_t>(i) * p.d + t];
                    s += diff * diff;
                }
                d2[i] = s;
                dmin = std::min(dmin, s);
            }
            if (dmin == 0.0) {
                // sample sits on a centroid: crisp assignment, shared among coincident centroids
                int zeros = 0;
                for (int i = 0; i < p.c; ++i) zeros += d2[i] == 0.0;
                for (int i = 0; i < p.c; ++i)
                    p.u[static_cast<std::size_t>(i) * p.n + k] = d2[i] == 0.0 ? 1.0 / zeros : 0.0;
                continue;
            }
            double s = 0.0;
            for (int i = 0; i < p.c; ++i) {
                d2[i] = std::pow(dmin / d2[i], expo);
                s += d2[i];
            }
            for (int i = 0; i < p.c; ++i) p.u[static_cast<std::size_t>(i) * p.n + k] = d2[i] / s;
        }

        p.j_history.push_back(objective(data, p, cfg.m));
        p.iterations = it;
        const std::size_t h = p.j_history.size();
        if (h >= 2 && std::abs(p.j_history[h - 1] - p.j_history[h - 2]) <= cfg.eps) break;
    }
    return p;
}

std::vector<int> hard_labels(const FuzzyPartition& part) {
    std::vector<int> lab(part.n, 0);
    for (int k = 0; k < part.n; ++k) {
        double best = part.membership(0, k);
        for (int i = 1; i < part.c; ++i)
            if (part.membership(i, k) > best) {
                best = part.membership(i, k);
                lab[k] = i;
            }
    }
    return lab;
}

int select_cluster(const FuzzyPartition& part, Select sel, int index) {
    if (sel == Select::Index) {
        if (index < 0 || index >= part.c) throw ConfigError("select_cluster: index out of range");
        return index;
    }
    auto key = [&](int i) {
        double s = 0.0;
        for (int t = 0; t < part.d; ++t) s += part.centroid(i, t);
        return s;
    };
    int best = 0;
    for (int i = 1; i < part.c; ++i) {
        const bool better = sel == Select::Brightest ? key(i) > key(best) : key(i) < key(best);
        if (better) best = i;
    }
    return best;
}

BinaryMask defuzzify(const FuzzyPartition& part, int cluster, const std::vector<int>& pixel_index,
                     int width, int height) {
    if (static_cast<int>(pixel_index.size()) != part.n)
        throw ConfigError("defuzzify: pixel index does not match sample count");
    const auto lab = hard_labels(part);
    BinaryMask out(width, height);
    for (int k = 0; k < part.n; ++k)
        if (lab[k] == cluster) out[pixel_index[k]] = 1;
    return out;
}

GtvResult gtv_pipeline(const GrayImage& img, const BinaryMask& roi, const GtvConfig& cfg) {
    if (!img.same_shape(roi)) throw ConfigError("gtv_pipeline: roi size mismatch");
    if (count_nonzero(roi) == 0) throw ConfigError("gtv_pipeline: empty roi");
    if (single_level(img, roi)) throw AlgorithmError("gtv_pipeline: roi has a single intensity level");
    Samples s = masked_samples({&img}, roi);
    FcmConfig fc = cfg.fcm;
    fc.clusters = 2;
    const FuzzyPartition part = fcm(s.features, fc);
    const int bright = select_cluster(part, Select::Brightest);
    GtvResult res;
    res.pre_hull = remove_small(defuzzify(part, bright, s.index, img.width, img.height), cfg.min_area);
    res.mask = count_nonzero(res.pre_hull) ? convex_hull(res.pre_hull) : res.pre_hull;
    return res;
}

BinaryMask necrosis_inclusion(const GrayImage& img, const BinaryMask& roi, const BinaryMask& pre_hull,
                              const BinaryMask& post_hull, const FcmConfig& cfg) {
    if (!img.same_shape(roi) || !roi.same_shape(pre_hull) || !roi.same_shape(post_hull))
        throw ConfigError("necrosis_inclusion: mask sizes differ");
    if (single_level(img, roi)) return post_hull;
    Samples s = masked_samples({&img}, roi);
    FcmConfig fc = cfg;
    fc.clusters = 3;
    const FuzzyPartition part = fcm(s.features, fc);
    const BinaryMask dark = defuzzify(part, select_cluster(part, Select::Darkest), s.index, img.width, img.height);
    const BinaryMask band = mask_xor(post_hull, pre_hull);
    const LabelMap lm = connected_components(dark, Connectivity::Eight);
    std::vector<std::uint8_t> touches(lm.count + 1, 0);
    for (std::size_t i = 0; i < lm.size(); ++i)
        if (lm[i] && band[i]) touches[lm[i]] = 1;
    BinaryMask out = post_hull;
    for (std::size_t i = 0; i < lm.size(); ++i)
        if (lm[i] && touches[lm[i]]) out[i] = 1;
    return out;
}

int next_erosion_radius(std::size_t gtv_area, int large_area) {
    return gtv_area > static_cast<std::size_t>(large_area) ? 2 : 1;
}

BinaryMask next_pipeline(const GrayImage& img, const BinaryMask& gtv, const NextConfig& cfg) {
    if (!img.same_shape(gtv)) throw ConfigError("next_pipeline: gtv size mismatch");
    const std::size_t area = count_nonzero(gtv);
    if (area == 0) throw ConfigError("next_pipeline: empty gtv");
    const BinaryMask inner = erode(gtv, StructuringElement::disk(next_erosion_radius(area, cfg.large_area)));
    if (count_nonzero(inner) < 2) throw AlgorithmError("next_pipeline: gtv too small after erosion");
    if (single_level(img, inner)) return BinaryMask(img.width, img.height);
    Samples s = masked_samples({&img}, inner);
    FcmConfig fc = cfg.fcm;
    fc.clusters = 2;
    const FuzzyPartition part = fcm(s.features, fc);
    BinaryMask dark = defuzzify(part, select_cluster(part, Select::Darkest), s.index, img.width, img.height);
    dark = remove_small(dark, cfg.min_area, Connectivity::Four);
    return fill_holes(dark);
}

BinaryMask prostate_pipeline(const GrayImage& t2, const GrayImage& t1, const BinaryMask& roi,
                             const ProstateConfig& cfg) {
    if (!t2.same_shape(roi) || !t1.same_shape(roi)) throw ConfigError("prostate_pipeline: image sizes differ");
    if (count_nonzero(roi) == 0) throw ConfigError("prostate_pipeline: empty roi");
    const GrayImage f2 = stick_filter(t2, cfg.stick_length, cfg.stick_thickness);
    const GrayImage f1 = stick_filter(t1, cfg.stick_length, cfg.stick_thickness);
    std::vector<const GrayImage*> channels{&f2};
    if (cfg.use_t1) channels.push_back(&f1);
    Samples s = masked_samples(channels, roi);
    FcmConfig fc = cfg.fcm;
    fc.clusters = 3;
    const FuzzyPartition part = fcm(s.features, fc);
    const auto lab = hard_labels(part);

    // the gland is the cluster that dominates the centre of the ROI box
    const Rect box = bounding_box(roi);
    const double cx = box.x + (box.width - 1) / 2.0, cy = box.y + (box.height - 1) / 2.0;
    const double rc = std::max(1.0, cfg.centre_fraction * std::min(box.width, box.height));
    std::vector<int> votes(part.c, 0);
    for (int k = 0; k < part.n; ++k) {
        const int x = s.index[k] % roi.width, y = s.index[k] / roi.width;
        if (std::hypot(x - cx, y - cy) <= rc) ++votes[lab[k]];
    }
    const int gland = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());

    BinaryMask m = defuzzify(part, gland, s.index, roi.width, roi.height);
    m = remove_small(m, cfg.min_area);
    m = open(m, StructuringElement::square(cfg.open_square));
    const LabelMap lm = connected_components(m, Connectivity::Eight);
    if (lm.count == 0) return m;
    const auto feats = all_features(lm);
    int best = 1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& f : feats) {
        const double d = std::hypot(f.cx - cx, f.cy - cy);
        if (d < best_d) {
            best_d = d;
            best = f.label;
        }
    }
    BinaryMask out = convex_hull(label_mask(lm, best));
    return open(out, StructuringElement::disk(cfg.final_open_disk));
}

}  // namespace medimg::cluster
