#include "medimg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace medimg::phantom {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::uint16_t to_level(double v, int top = 255) {
    return static_cast<std::uint16_t>(std::clamp(std::floor(v + 0.5), 0.0, static_cast<double>(top)));
}

// Star-shaped blob with a smooth wobbling radius.
struct Wobble {
    double cx, cy, r, a1, a2, p1, p2;
    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        const double t = std::atan2(dy, dx);
        const double rt = r * (1 + a1 * std::sin(3 * t + p1) + a2 * std::sin(5 * t + p2));
        return dx * dx + dy * dy <= rt * rt;
    }
};

Wobble random_wobble(Rng& rng, double cx, double cy, double rmin, double rmax) {
    Wobble b;
    b.cx = cx;
    b.cy = cy;
    b.r = uniform(rng, rmin, rmax);
    b.a1 = uniform(rng, 0.0, 0.12);
    b.a2 = uniform(rng, 0.0, 0.06);
    b.p1 = uniform(rng, 0.0, 2 * std::numbers::pi);
    b.p2 = uniform(rng, 0.0, 2 * std::numbers::pi);
    return b;
}

Rect grown_box(const BinaryMask& m, int margin) {
    const Rect b = bounding_box(m);
    const int x0 = std::max(0, b.x - margin), y0 = std::max(0, b.y - margin);
    const int x1 = std::min(m.width, b.x + b.width + margin), y1 = std::min(m.height, b.y + b.height + margin);
    return {x0, y0, x1 - x0, y1 - y0};
}

BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.at(x, y) = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
    return m;
}

}  // namespace

BlobPhantom bimodal_blob(std::uint64_t seed, const BlobParams& p) {
    if (p.size < 32 || !(p.radius_min > 0) || p.radius_max < p.radius_min || p.noise_sd < 0)
        throw ConfigError("phantom: invalid blob parameters");
    Rng rng(seed);
    const double c = p.size / 2.0;
    const Wobble b = random_wobble(rng, c + uniform(rng, -3, 3), c + uniform(rng, -3, 3), p.radius_min, p.radius_max);
    std::normal_distribution<double> noise(0.0, p.noise_sd);
    BlobPhantom out;
    out.image = GrayImage(p.size, p.size);
    out.truth = BinaryMask(p.size, p.size);
    out.roi = disk_mask(p.size, p.size, b.cx, b.cy, std::min(b.r * 1.2 + p.roi_margin, c - 1));
    for (int y = 0; y < p.size; ++y)
        for (int x = 0; x < p.size; ++x) {
            const bool in = b.contains(x, y);
            out.truth.at(x, y) = in;
            double v;
            if (p.dark_target)
                v = in ? p.bg_mean : (out.roi.at(x, y) ? p.fg_mean : p.bg_mean * 0.4);
            else
                v = in ? p.fg_mean : p.bg_mean;
            out.image.at(x, y) = to_level(v + noise(rng));
        }
    out.bbox = grown_box(out.truth, 6);
    return out;
}

BlobPhantom gtv_blob(std::uint64_t seed, bool dark_core) {
    Rng rng(seed);
    const int n = 128;
    const double cx = 64 + uniform(rng, -6, 6), cy = 64 + uniform(rng, -6, 6);
    const double r = uniform(rng, 14, 24);
    const double ax = r * uniform(rng, 0.9, 1.1), ay = r * uniform(rng, 0.9, 1.1);
    const double phi = uniform(rng, 0, std::numbers::pi);
    const double core = 0.4;
    std::normal_distribution<double> noise(0.0, 5.0);
    BlobPhantom out;
    out.image = GrayImage(n, n);
    out.truth = BinaryMask(n, n);
    const double cs = std::cos(phi), sn = std::sin(phi);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double u = (x - cx) * cs + (y - cy) * sn, v = -(x - cx) * sn + (y - cy) * cs;
            const double q = std::sqrt(u * u / (ax * ax) + v * v / (ay * ay));
            double val = 26;
            if (q <= 1.0) {
                out.truth.at(x, y) = 1;
                val = dark_core && q <= core ? 128 : 230;
            }
            out.image.at(x, y) = to_level(val + noise(rng));
        }
    out.bbox = grown_box(out.truth, std::max(4, static_cast<int>(0.35 * r)));
    out.roi = BinaryMask(n, n);
    for (int y = out.bbox.y; y < out.bbox.y + out.bbox.height; ++y)
        for (int x = out.bbox.x; x < out.bbox.x + out.bbox.width; ++x) out.roi.at(x, y) = 1;
    return out;
}

BlobPhantom bimodal_mixture(std::uint64_t seed, const MixtureParams& p) {
    if (p.size < 16 || p.sd1 < 0 || p.sd2 < 0) throw ConfigError("phantom: invalid mixture parameters");
    Rng rng(seed);
    const double c = p.size / 2.0;
    const Wobble b = random_wobble(rng, c + uniform(rng, -4, 4), c + uniform(rng, -4, 4), 0.22 * p.size, 0.36 * p.size);
    std::normal_distribution<double> n1(p.mu1, p.sd1), n2(p.mu2, p.sd2);
    BlobPhantom out;
    out.image = GrayImage(p.size, p.size);
    out.truth = BinaryMask(p.size, p.size);
    out.roi = BinaryMask(p.size, p.size, 1);
    for (int y = 0; y < p.size; ++y)
        for (int x = 0; x < p.size; ++x) {
            const bool in = b.contains(x, y);
            out.truth.at(x, y) = in;
            out.image.at(x, y) = to_level(in ? n2(rng) : n1(rng));
        }
    out.bbox = {0, 0, p.size, p.size};
    return out;
}

ProstatePhantom prostate(std::uint64_t seed, int size) {
    if (size < 48) throw ConfigError("phantom: prostate size must be >= 48");
    Rng rng(seed);
    const double c = size / 2.0;
    const double gx = c + uniform(rng, -2, 2), gy = c + uniform(rng, -2, 2);
    const double ax = uniform(rng, 0.19, 0.23) * size, ay = uniform(rng, 0.17, 0.21) * size;
    std::normal_distribution<double> noise(0.0, 0.03 * 255);
    ProstatePhantom out{GrayImage(size, size), GrayImage(size, size), disk_mask(size, size, c, c, 0.45 * size),
                        BinaryMask(size, size)};
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double q = (x - gx) * (x - gx) / (ax * ax) + (y - gy) * (y - gy) / (ay * ay);
            double t2 = 0.1, t1 = 0.1;
            if (q <= 1.0) {
                out.truth.at(x, y) = 1;
                t2 = t1 = 0.8;
            } else if (out.roi.at(x, y)) {
                t2 = x < c ? 0.8 : 0.2;
                t1 = x < c ? 0.2 : 0.8;
            }
            out.t2.at(x, y) = to_level(255 * t2 + noise(rng));
            out.t1.at(x, y) = to_level(255 * t1 + noise(rng));
        }
    return out;
}

PlatePhantom plate(std::uint64_t seed, const PlateParams& p) {
    int rows = 0, cols = 0;
    double r = 0;
    switch (p.wells) {
        case 6: rows = 2, cols = 3, r = 36; break;
        case 12: rows = 3, cols = 4, r = 28; break;
        case 24: rows = 4, cols = 6, r = 20; break;
        default: throw ConfigError("phantom: plate wells must be 6, 12 or 24");
    }
    Rng rng(seed);
    const double pitch = 2.5 * r;
    const int w = static_cast<int>(std::ceil(cols * pitch + 2 * r)), h = static_cast<int>(std::ceil(rows * pitch + 2 * r));
    const double icx = (w - 1) / 2.0, icy = (h - 1) / 2.0;
    const double a = p.angle_deg * std::numbers::pi / 180.0, ca = std::cos(a), sa = std::sin(a);

    PlatePhantom out;
    out.radius = r;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double gx = (j - (cols - 1) / 2.0) * pitch, gy = (i - (rows - 1) / 2.0) * pitch;
            colony::WellCircle c;
            c.x = icx + ca * gx - sa * gy + p.dx;
            c.y = icy + sa * gx + ca * gy + p.dy;
            if (p.half_covered) c.x = std::floor(c.x) + 0.5;
            c.r = r;
            out.wells.push_back(c);
        }

    // label 0 holder, 1 medium, 2 stained
    std::vector<std::uint8_t> cls(static_cast<std::size_t>(w) * h, 0);
    for (const colony::WellCircle& c : out.wells) {
        struct Dot {
            double x, y, r;
        };
        std::vector<Dot> dots;
        if (!p.half_covered) {
            const int n = std::uniform_int_distribution<int>(5, 15)(rng);
            for (int k = 0; k < n; ++k) {
                const double rr = uniform(rng, 0, 0.75 * r), t = uniform(rng, 0, 2 * std::numbers::pi);
                dots.push_back({c.x + rr * std::cos(t), c.y + rr * std::sin(t), uniform(rng, 2, 5)});
            }
        }
        double in = 0, stained = 0;
        for (int y = std::max(0, static_cast<int>(c.y - r - 1)); y <= std::min(h - 1, static_cast<int>(c.y + r + 1)); ++y)
            for (int x = std::max(0, static_cast<int>(c.x - r - 1)); x <= std::min(w - 1, static_cast<int>(c.x + r + 1)); ++x) {
                if ((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y) > r * r) continue;
                bool s = p.half_covered && x < c.x;
                for (const Dot& d : dots) s = s || (x - d.x) * (x - d.x) + (y - d.y) * (y - d.y) <= d.r * d.r;
                cls[static_cast<std::size_t>(y) * w + x] = s ? 2 : 1;
                in += 1;
                stained += s;
            }
        out.coverage.push_back(in > 0 ? stained / in : 0.0);
    }
    std::normal_distribution<double> noise(0.0, p.noise_sd);
    out.image = ColorImage(w, h);
    static constexpr std::uint8_t colors[3][3] = {{60, 60, 60}, {225, 225, 225}, {130, 70, 170}};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto* col = colors[cls[static_cast<std::size_t>(y) * w + x]];
            const double e = p.noise_sd > 0 ? noise(rng) : 0.0;  // grey noise keeps the medium neutral
            auto* px = out.image.px(x, y);
            for (int k = 0; k < 3; ++k) px[k] = static_cast<std::uint8_t>(to_level(col[k] + e));
        }
    return out;
}

NucleiPhantom nuclei(std::uint64_t seed, const NucleiParams& p) {
    if (p.size < 32 || p.count < 0 || !(p.radius_min > 0) || p.radius_max < p.radius_min || p.gap < 0 ||
        p.max_overlap < 0 || p.max_overlap > 1)
        throw ConfigError("phantom: invalid nuclei parameters");
    Rng rng(seed);
    struct Nucleus {
        double x, y, ax, ay, phi, level;
        int label;
    };
    struct Footprint {
        double x, y, r;
    };
    std::vector<Nucleus> cells;
    std::vector<Footprint> used;
    NucleiPhantom out;
    auto place = [&](double reach) -> std::pair<double, double> {
        for (int attempt = 0; attempt < 20000; ++attempt) {
            const double x = uniform(rng, reach + 2, p.size - reach - 3), y = uniform(rng, reach + 2, p.size - reach - 3);
            bool ok = true;
            for (const Footprint& f : used)
                if (std::hypot(f.x - x, f.y - y) < f.r + reach + p.gap) {
                    ok = false;
                    break;
                }
            if (ok) {
                used.push_back({x, y, reach});
                return {x, y};
            }
        }
        throw ConfigError("phantom: nuclei do not fit; lower count or radius");
    };
    auto make = [&](double x, double y, double r, int label) {
        const double e = uniform(rng, 0.9, 1.1);
        return Nucleus{x, y, r * e, r / e, uniform(rng, 0, std::numbers::pi), uniform(rng, 150, 220), label};
    };
    int label = 0;
    for (int i = 0; i < p.count; ++i) {
        if (!p.overlapping_pairs) {
            const double r = uniform(rng, p.radius_min, p.radius_max);
            const auto [x, y] = place(r * 1.1);
            cells.push_back(make(x, y, r, ++label));
            continue;
        }
        const double r1 = uniform(rng, p.radius_min, p.radius_max), r2 = uniform(rng, p.radius_min, p.radius_max);
        const double depth = uniform(rng, 0.05, p.max_overlap) * std::min(r1, r2);
        const double d = r1 + r2 - depth, t = uniform(rng, 0, std::numbers::pi);
        const auto [mx, my] = place(d / 2 + std::max(r1, r2));
        Nucleus a{mx - d / 2 * std::cos(t), my - d / 2 * std::sin(t), r1, r1, 0, uniform(rng, 150, 220), ++label};
        Nucleus b{mx + d / 2 * std::cos(t), my + d / 2 * std::sin(t), r2, r2, 0, uniform(rng, 150, 220), ++label};
        cells.push_back(a);
        cells.push_back(b);
        out.pairs.emplace_back(a.label, b.label);
    }
    std::normal_distribution<double> noise(0.0, 6.0);
    out.image = GrayImage(p.size, p.size);
    out.truth = LabelMap(p.size, p.size);
    out.truth.count = label;
    std::vector<double> level(out.image.size(), 30.0), owner_q(out.image.size(), 2.0);
    for (const Nucleus& c : cells) {
        const double reach = std::max(c.ax, c.ay) + 1;
        const double cs = std::cos(c.phi), sn = std::sin(c.phi);
        for (int y = std::max(0, static_cast<int>(c.y - reach)); y <= std::min(p.size - 1, static_cast<int>(c.y + reach)); ++y)
            for (int x = std::max(0, static_cast<int>(c.x - reach)); x <= std::min(p.size - 1, static_cast<int>(c.x + reach)); ++x) {
                const double u = (x - c.x) * cs + (y - c.y) * sn, v = -(x - c.x) * sn + (y - c.y) * cs;
                const double q = u * u / (c.ax * c.ax) + v * v / (c.ay * c.ay);
                if (q > 1.0) continue;
                const std::size_t i = out.image.index(x, y);
                level[i] = std::max(level[i], c.level);
                // overlap goes to the nucleus whose centre is relatively closer
                if (q < owner_q[i]) {
                    owner_q[i] = q;
                    out.truth[i] = c.label;
                }
            }
    }
    for (std::size_t i = 0; i < level.size(); ++i) out.image[i] = to_level(level[i] + noise(rng));
    return out;
}

RegisterPair register_pair(std::uint64_t seed, const reg::AffineTransform2D& t, int size) {
    if (size < 32) throw ConfigError("phantom: register pair size must be >= 32");
    t.validate();
    Rng rng(seed);
    struct Bump {
        double x, y, sa, sb, cs, sn, amp;
    };
    std::vector<Bump> bumps;
    const double c = (size - 1) / 2.0;
    for (int k = 0; k < 10; ++k) {
        const double phi = uniform(rng, 0, std::numbers::pi);
        bumps.push_back({c + uniform(rng, -0.3, 0.3) * size, c + uniform(rng, -0.3, 0.3) * size, uniform(rng, 4, 12),
                         uniform(rng, 4, 12), std::cos(phi), std::sin(phi), uniform(rng, 50, 120)});
    }
    auto f = [&](double x, double y) {
        double v = 30;
        for (const Bump& b : bumps) {
            const double u = (x - b.x) * b.cs + (y - b.y) * b.sn, w = -(x - b.x) * b.sn + (y - b.y) * b.cs;
            v += b.amp * std::exp(-0.5 * (u * u / (b.sa * b.sa) + w * w / (b.sb * b.sb)));
        }
        return v;
    };
    const reg::Matrix3 inv = reg::invert(t.matrix(c, c));
    std::normal_distribution<double> noise(0.0, 1.5);
    RegisterPair out{GrayImage(size, size), GrayImage(size, size), t};
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            out.moving.at(x, y) = to_level(f(x, y) + noise(rng));
            const double sx = inv[0] * x + inv[1] * y + inv[2], sy = inv[3] * x + inv[4] * y + inv[5];
            out.fixed.at(x, y) = to_level(f(sx, sy) + noise(rng));
        }
    return out;
}

}  // namespace medimg::phantom
