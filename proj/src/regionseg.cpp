#include "medimg/regionseg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include "medimg/imgcore.hpp"
#include "medimg/threshold.hpp"

namespace medimg::region {

namespace {

constexpr Point kN8[8] = {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};

struct Grower {
    const FloatImage& img;
    const BinaryMask* roi;
    double theta;
    std::vector<GrowStep>* trace;

    // Grows `region` in place from the listed start pixels. `queued` marks pixels already
    // tested or waiting; rejected pixels are not re-tested.
    void grow(BinaryMask& region, double sum, double count, const std::vector<int>& starts) const {
        const int w = img.width;
        std::vector<std::uint8_t> queued(img.size(), 0);
        std::deque<int> boundary;
        auto push_neighbours = [&](int idx) {
            const int px = idx % w, py = idx / w;
            for (const Point& d : kN8) {
                const int qx = px + d.x, qy = py + d.y;
                if (!img.inside(qx, qy)) continue;
                const int q = qy * w + qx;
                if (region[q] || queued[q]) continue;
                queued[q] = 1;
                boundary.push_back(q);
            }
        };
        for (int s : starts) push_neighbours(s);
        while (!boundary.empty()) {
            const int p = boundary.front();
            boundary.pop_front();
            if (roi && !(*roi)[p]) continue;
            const double mean = sum / count;
            const double limit = theta - mean;
            if (!(std::abs(img[p] - mean) < limit)) continue;
            region[p] = 1;
            sum += img[p];
            count += 1;
            if (trace) trace->push_back({{p % w, p / w}, img[p], mean, limit});
            push_neighbours(p);
        }
    }
};

BinaryMask eroded_seeds(const BinaryMask& seeds, int radius) {
    if (radius <= 0) return seeds;
    BinaryMask er = erode(seeds, StructuringElement::disk(radius));
    // components that erosion would wipe out are kept whole
    LabelMap lm = connected_components(seeds, Connectivity::Eight);
    std::vector<std::uint8_t> survives(lm.count + 1, 0);
    for (std::size_t i = 0; i < er.size(); ++i)
        if (er[i]) survives[lm[i]] = 1;
    for (std::size_t i = 0; i < er.size(); ++i)
        if (lm[i] && !survives[lm[i]]) er[i] = 1;
    return er;
}

}  // namespace

BinaryMask split_and_merge(const FloatImage& img, const SplitMergeConfig& cfg, const BinaryMask* roi) {
    if (!(cfg.mean_lo >= 0.0 && cfg.mean_lo < cfg.mean_hi && cfg.mean_hi <= 1.0))
        throw ConfigError("split_and_merge: need 0 <= mean_lo < mean_hi <= 1");
    if (cfg.rho_min < 1) throw ConfigError("split_and_merge: rho_min must be >= 1");
    if (roi && !roi->same_shape(img)) throw ConfigError("split_and_merge: roi size mismatch");
    int side = 1;
    while (side < std::max({img.width, img.height, cfg.rho_min})) side *= 2;

    // integral images of the sampled values and of the sample count
    const std::size_t stride = side + 1;
    std::vector<double> integ(stride * (side + 1), 0.0), cnt(stride * (side + 1), 0.0);
    for (int y = 0; y < side; ++y) {
        double row = 0.0, nrow = 0.0;
        for (int x = 0; x < side; ++x) {
            const bool in = img.inside(x, y);
            if (!roi) {
                row += in ? img.at(x, y) : 1.0;
                nrow += 1.0;
            } else if (in && roi->at(x, y)) {
                row += img.at(x, y);
                nrow += 1.0;
            }
            integ[(y + 1) * stride + x + 1] = integ[y * stride + x + 1] + row;
            cnt[(y + 1) * stride + x + 1] = cnt[y * stride + x + 1] + nrow;
        }
    }
    auto box = [&](const std::vector<double>& t, int x, int y, int s) {
        return t[(y + s) * stride + x + s] - t[y * stride + x + s] - t[(y + s) * stride + x] + t[y * stride + x];
    };

    BinaryMask out(img.width, img.height);
    std::function<void(int, int, int)> visit = [&](int x, int y, int s) {
        if (x >= img.width || y >= img.height) return;  // pure padding
        const double n = box(cnt, x, y, s);
        if (n == 0.0) return;
        const double m = box(integ, x, y, s) / n;
        if (m > cfg.mean_lo && m < cfg.mean_hi) {
            for (int yy = y; yy < std::min(y + s, img.height); ++yy)
                for (int xx = x; xx < std::min(x + s, img.width); ++xx)
                    if (!roi || roi->at(xx, yy)) out.at(xx, yy) = 1;
            return;
        }
        if (s <= cfg.rho_min || s == 1) return;
        const int h = s / 2;
        visit(x, y, h);
        visit(x + h, y, h);
        visit(x, y + h, h);
        visit(x + h, y + h, h);
    };
    visit(0, 0, side);
    return out;
}

BinaryMask seed_cleanup(const BinaryMask& sm_mask, const BinaryMask& roi, const SeedCleanupConfig& cfg) {
    if (!sm_mask.same_shape(roi)) throw ConfigError("seed_cleanup: mask sizes differ");
    if (cfg.max_edge_fraction < 0.0) throw ConfigError("seed_cleanup: max_edge_fraction must be >= 0");
    BinaryMask opened = open(sm_mask, StructuringElement::diamond(cfg.open_radius));
    BinaryMask edge = mask_and(roi, mask_not(erode(roi, StructuringElement::square(1))));
    if (cfg.edge_dilate > 0) edge = dilate(edge, StructuringElement::square(cfg.edge_dilate));

    LabelMap lm = connected_components(opened, Connectivity::Eight);
    std::vector<int> area(lm.count + 1, 0), hits(lm.count + 1, 0);
    for (std::size_t i = 0; i < lm.size(); ++i) {
        if (!lm[i]) continue;
        ++area[lm[i]];
        if (edge[i]) ++hits[lm[i]];
    }
    BinaryMask out(sm_mask.width, sm_mask.height);
    for (std::size_t i = 0; i < lm.size(); ++i) {
        const int l = lm[i];
        if (l && hits[l] <= cfg.max_edge_fraction * area[l]) out[i] = 1;
    }
    return out;
}

BinaryMask region_growing(const FloatImage& img, const BinaryMask& seeds, double theta_opt,
                          const GrowConfig& cfg, const BinaryMask* roi, std::vector<GrowStep>* trace) {
    if (!img.same_shape(seeds)) throw ConfigError("region_growing: seed mask size mismatch");
    if (roi && !roi->same_shape(img)) throw ConfigError("region_growing: roi size mismatch");
    if (cfg.sample_step < 1) throw ConfigError("region_growing: sample_step must be >= 1");
    if (count_nonzero(seeds) == 0) throw AlgorithmError("region_growing: no seeds");

    const BinaryMask start = eroded_seeds(seeds, cfg.erode_radius);
    const LabelMap lm = connected_components(start, Connectivity::Eight);
    const Grower grower{img, roi, theta_opt, trace};
    BinaryMask out(img.width, img.height);
    const int w = img.width;
    for (int l = 1; l <= lm.count; ++l) {
        BinaryMask region(img.width, img.height);
        double sum = 0.0, count = 0.0;
        for (std::size_t i = 0; i < lm.size(); ++i)
            if (lm[i] == l) {
                region[i] = 1;
                sum += img[i];
                count += 1;
            }
        // seed-points: every sample_step-th contour pixel in raster order
        std::vector<int> starts;
        int edge_index = 0;
        for (int i = 0; i < static_cast<int>(region.size()); ++i) {
            if (!region[i]) continue;
            const int px = i % w, py = i / w;
            bool contour = false;
            for (const Point& d : kN8) {
                const int qx = px + d.x, qy = py + d.y;
                if (!region.inside(qx, qy) || !region.at(qx, qy)) {
                    contour = true;
                    break;
                }
            }
            if (!contour) continue;
            if (edge_index % cfg.sample_step == 0) starts.push_back(i);
            ++edge_index;
        }
        grower.grow(region, sum, count, starts);
        for (std::size_t i = 0; i < out.size(); ++i)
            if (region[i]) out[i] = 1;
    }
    return out;
}

BinaryMask region_growing_single(const FloatImage& img, const BinaryMask& seeds, double theta_opt,
                                 const BinaryMask* roi) {
    if (!img.same_shape(seeds)) throw ConfigError("region_growing_single: seed mask size mismatch");
    const LabelMap lm = connected_components(seeds, Connectivity::Eight);
    if (lm.count == 0) throw AlgorithmError("region_growing_single: no seeds");
    const Grower grower{img, roi, theta_opt, nullptr};
    BinaryMask out(img.width, img.height);
    std::vector<std::uint8_t> done(lm.count + 1, 0);
    for (int i = 0; i < static_cast<int>(lm.size()); ++i) {
        const int l = lm[i];
        if (!l || done[l]) continue;
        done[l] = 1;
        BinaryMask region(img.width, img.height);
        region[i] = 1;
        grower.grow(region, img[i], 1.0, {i});
        for (std::size_t k = 0; k < out.size(); ++k)
            if (region[k]) out[k] = 1;
    }
    return out;
}

BinaryMask fibroid_pipeline(const GrayImage& img, const BinaryMask& uterus_roi, const FibroidConfig& cfg) {
    if (!img.same_shape(uterus_roi)) throw ConfigError("fibroid_pipeline: roi size mismatch");
    if (count_nonzero(uterus_roi) == 0) throw ConfigError("fibroid_pipeline: empty roi");
    FloatImage norm = normalize_unit(img);
    for (std::size_t i = 0; i < norm.size(); ++i)
        if (!uterus_roi[i]) norm[i] = 0.0;
    BinaryMask sm = split_and_merge(norm, cfg.split, &uterus_roi);
    BinaryMask seeds = seed_cleanup(sm, uterus_roi, cfg.cleanup);
    if (count_nonzero(seeds) == 0) return BinaryMask(img.width, img.height);

    const auto hist = threshold::histogram(img, &uterus_roi);
    const double theta = threshold::otsu(hist).theta;
    return region_growing(to_float(img), seeds, theta, cfg.grow, &uterus_roi);
}

}  // namespace medimg::region
