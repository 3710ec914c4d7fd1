#include "medimg/colony.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "medimg/imgcore.hpp"
#include "medimg/threshold.hpp"

namespace medimg::colony {

namespace {

double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

// D65 reference white
constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;

GrayImage lightness8(const LuvImage& luv) {
    GrayImage g(luv.L.width, luv.L.height);
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = static_cast<std::uint16_t>(std::clamp(std::floor(luv.L[i] * 2.55 + 0.5), 0.0, 255.0));
    return g;
}

}  // namespace

LuvImage rgb_to_luv(const ColorImage& img) {
    LuvImage out{FloatImage(img.width, img.height), FloatImage(img.width, img.height),
                 FloatImage(img.width, img.height)};
    const double dn = kXn + 15 * kYn + 3 * kZn;
    const double un = 4 * kXn / dn, vn = 9 * kYn / dn;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const auto* p = img.px(x, y);
            const double r = srgb_to_linear(p[0] / 255.0), g = srgb_to_linear(p[1] / 255.0),
                         b = srgb_to_linear(p[2] / 255.0);
            const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
            const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
            const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
            const double yr = Y / kYn;
            const double L = yr > 216.0 / 24389.0 ? 116.0 * std::cbrt(yr) - 16.0 : 24389.0 / 27.0 * yr;
            const double d = X + 15 * Y + 3 * Z;
            double u = 0.0, v = 0.0;
            if (d > 0) {
                u = 13 * L * (4 * X / d - un);
                v = 13 * L * (9 * Y / d - vn);
            }
            const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            out.L[i] = L;
            out.u[i] = u;
            out.v[i] = v;
        }
    return out;
}

double acceptance_threshold(double sensitivity) { return (1.0 - sensitivity) * 20.0; }

std::vector<WellCircle> find_circles(const GrayImage& lightness, double radius, double sensitivity,
                                     const WellDetectConfig& cfg) {
    if (!(radius > 0)) throw ConfigError("find_circles: radius must be positive");
    if (!(sensitivity > 0 && sensitivity < 1)) throw ConfigError("find_circles: sensitivity must be in (0,1)");
    const int w = lightness.width, h = lightness.height;
    const BinaryMask edges = canny_edges(lightness, cfg.canny_sigma, cfg.canny_lo, cfg.canny_hi);
    const int samples = std::max(8, static_cast<int>(std::ceil(2 * std::numbers::pi * radius)));
    std::vector<Point> ring;
    for (int k = 0; k < samples; ++k) {
        const double a = 2 * std::numbers::pi * k / samples;
        const Point p{static_cast<int>(std::lround(radius * std::cos(a))), static_cast<int>(std::lround(radius * std::sin(a)))};
        if (ring.empty() || ring.back().x != p.x || ring.back().y != p.y) ring.push_back(p);
    }
    if (ring.size() > 1 && ring.front().x == ring.back().x && ring.front().y == ring.back().y) ring.pop_back();

    std::vector<double> accum(lightness.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!edges.at(x, y)) continue;
            for (const Point& d : ring) {
                const int cx = x + d.x, cy = y + d.y;
                if (cx >= 0 && cy >= 0 && cx < w && cy < h) accum[static_cast<std::size_t>(cy) * w + cx] += 1.0;
            }
        }
    // 3x3 sum gathers votes scattered by rasterisation, then normalise by the ring length
    std::vector<double> score(accum.size(), 0.0);
    const double norm = static_cast<double>(ring.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int qx = x + dx, qy = y + dy;
                    if (qx >= 0 && qy >= 0 && qx < w && qy < h) s += accum[static_cast<std::size_t>(qy) * w + qx];
                }
            score[static_cast<std::size_t>(y) * w + x] = s / norm;
        }

    const double thr = acceptance_threshold(sensitivity);
    std::vector<int> order;
    for (int i = 0; i < static_cast<int>(score.size()); ++i)
        if (score[i] >= thr) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });

    std::vector<WellCircle> found;
    for (int i : order) {
        const int px = i % w, py = i / w;
        bool near = false;
        for (const WellCircle& c : found)
            if (std::hypot(c.x - px, c.y - py) <= radius) {
                near = true;
                break;
            }
        if (near) continue;
        // sub-pixel centre: accumulator centroid over a 5x5 window
        double sw = 0, sx = 0, sy = 0;
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) {
                const int qx = px + dx, qy = py + dy;
                if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                const double a = accum[static_cast<std::size_t>(qy) * w + qx];
                sw += a;
                sx += a * qx;
                sy += a * qy;
            }
        WellCircle c;
        c.x = sw > 0 ? sx / sw : px;
        c.y = sw > 0 ? sy / sw : py;
        c.r = radius;
        c.strength = score[i];
        found.push_back(c);
    }
    return found;
}

WellDetection detect_wells(const ColorImage& plate, double radius, int n_wells, const WellDetectConfig& cfg) {
    if (n_wells < 1) throw ConfigError("detect_wells: n_wells must be >= 1");
    const GrayImage light = lightness8(rgb_to_luv(plate));
    WellDetection det;
    for (double s : {cfg.sensitivity, cfg.escalated_sensitivity}) {
        det.wells = find_circles(light, radius, s, cfg);
        det.sensitivity = s;
        det.candidates = det.wells.size();
        if (static_cast<int>(det.wells.size()) >= n_wells) break;
    }
    det.ok = static_cast<int>(det.wells.size()) >= n_wells;
    if (det.ok) det.wells.resize(n_wells);
    return det;
}

std::vector<WellCircle> order_wells(std::vector<WellCircle> wells) {
    if (wells.empty()) return wells;
    std::stable_sort(wells.begin(), wells.end(), [](const WellCircle& a, const WellCircle& b) { return a.y < b.y; });
    std::vector<std::vector<WellCircle>> rows;
    double row_y = 0.0;
    for (const WellCircle& c : wells) {
        if (rows.empty() || c.y - row_y > c.r / 2) {
            rows.push_back({});
            row_y = c.y;
        }
        rows.back().push_back(c);
    }
    std::vector<WellCircle> out;
    for (auto& row : rows) {
        std::stable_sort(row.begin(), row.end(), [](const WellCircle& a, const WellCircle& b) { return a.x < b.x; });
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

GrayImage stain_image(const ColorImage& plate) {
    const LuvImage luv = rgb_to_luv(plate);
    GrayImage d(plate.width, plate.height);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double s = std::clamp(3.0 * std::max(luv.u[i], 0.0), 0.0, 255.0);
        d[i] = static_cast<std::uint16_t>(255 - static_cast<int>(std::floor(s + 0.5)));
    }
    return d;
}

BinaryMask circle_mask(int width, int height, const WellCircle& well) {
    BinaryMask m(width, height);
    const double r2 = well.r * well.r;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            m.at(x, y) = (x - well.x) * (x - well.x) + (y - well.y) * (y - well.y) <= r2;
    return m;
}

BinaryMask extract_colonies(const GrayImage& stain, const WellCircle& well, Masking masking) {
    validate(stain);
    const int x0 = std::max(0, static_cast<int>(std::floor(well.x - well.r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(well.y - well.r)));
    const int x1 = std::min(stain.width - 1, static_cast<int>(std::ceil(well.x + well.r)));
    const int y1 = std::min(stain.height - 1, static_cast<int>(std::ceil(well.y + well.r)));
    if (x1 < x0 || y1 < y0) throw ConfigError("extract_colonies: well outside the image");
    const Rect box{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    GrayImage part = crop(stain, box);
    const BinaryMask inside = crop(circle_mask(stain.width, stain.height, well), box);
    const std::uint16_t fill = masking == Masking::White ? static_cast<std::uint16_t>(stain.max_level()) : 0;
    for (std::size_t i = 0; i < part.size(); ++i)
        if (!inside[i]) part[i] = fill;
    BinaryMask m = threshold::local_adaptive_threshold(part, threshold::Polarity::Below);
    m = mask_and(fill_holes(m), inside);
    return uncrop(m, box, stain.width, stain.height);
}

BinaryMask extract_colonies(const ColorImage& plate, const WellCircle& well, Masking masking) {
    return extract_colonies(stain_image(plate), well, masking);
}

double acc(const BinaryMask& mask, const WellCircle& well) {
    const BinaryMask c = circle_mask(mask.width, mask.height, well);
    const std::size_t area = count_nonzero(c);
    if (area == 0) throw ConfigError("acc: circle has no pixels");
    return 100.0 * static_cast<double>(count_nonzero(mask_and(mask, c))) / static_cast<double>(area);
}

double surviving_fraction(double acc_treated, double acc_untreated) {
    if (!(acc_untreated > 0)) throw ConfigError("surviving_fraction: control ACC must be positive");
    return acc_treated / acc_untreated * 100.0;
}

double plating_efficiency(double colonies_control, double plated_control) {
    if (!(plated_control > 0)) throw ConfigError("plating_efficiency: plated count must be positive");
    return colonies_control / plated_control * 100.0;
}

double conventional_sf(double colonies_treated, double plated_treated, double colonies_control, double plated_control,
                       SfConvention conv) {
    if (!(plated_treated > 0)) throw ConfigError("conventional_sf: plated count must be positive");
    if (!(colonies_control > 0)) throw ConfigError("conventional_sf: control colonies must be positive");
    if (conv == SfConvention::Printed)
        return colonies_treated / plated_treated * plating_efficiency(colonies_control, plated_control);
    if (!(plated_control > 0)) throw ConfigError("plating_efficiency: plated count must be positive");
    // (treated / plated) / (control / plated), as one quotient so equal inputs give exactly 100
    return colonies_treated * plated_control / (plated_treated * colonies_control) * 100.0;
}

}  // namespace medimg::colony
