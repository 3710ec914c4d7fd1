#include "medimg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "medimg/imgcore.hpp"

namespace medimg::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double pct(double num, double den) { return den > 0 ? 100.0 * num / den : kNaN; }

// 1D squared distance transform over the finite samples of f (inf marks non-sites).
void sq_dist_1d(const std::vector<double>& f, std::vector<double>& d) {
    const int n = static_cast<int>(f.size());
    std::vector<int> v;
    std::vector<double> z;
    d.assign(n, kInf);
    for (int q = 0; q < n; ++q) {
        if (!std::isfinite(f[q])) continue;
        while (!v.empty()) {
            const int p = v.back();
            const double s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
            if (s <= z.back()) {
                v.pop_back();
                z.pop_back();
            } else {
                v.push_back(q);
                z.push_back(s);
                break;
            }
        }
        if (v.empty()) {
            v.push_back(q);
            z.push_back(-kInf);
        }
    }
    if (v.empty()) return;
    std::size_t k = 0;
    for (int q = 0; q < n; ++q) {
        while (k + 1 < v.size() && z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

// Squared Euclidean distance from every pixel to the nearest site; no sites gives inf.
std::vector<double> sq_distance_to(const BinaryMask& sites) {
    const int w = sites.width, h = sites.height;
    std::vector<double> g(sites.size(), kInf), f, d;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (sites[i]) g[i] = 0.0;
    f.resize(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = g[static_cast<std::size_t>(y) * w + x];
        sq_dist_1d(f, d);
        for (int y = 0; y < h; ++y) g[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    f.resize(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = g[static_cast<std::size_t>(y) * w + x];
        sq_dist_1d(f, d);
        for (int x = 0; x < w; ++x) g[static_cast<std::size_t>(y) * w + x] = d[x];
    }
    return g;
}

struct Directed {
    double mean = 0, max = 0;
};

Directed directed(const BinaryMask& from, const std::vector<double>& sq_to) {
    Directed r;
    double n = 0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (!from[i]) continue;
        const double dist = std::sqrt(sq_to[i]);
        r.mean += dist;
        r.max = std::max(r.max, dist);
        n += 1;
    }
    r.mean /= n;
    return r;
}

void require_pair(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) throw ConfigError("metrics: mask sizes differ");
    if (count_nonzero(a) == 0 || count_nonzero(b) == 0) throw ConfigError("metrics: empty mask");
}

}  // namespace

OverlapMetrics overlap_metrics(const BinaryMask& seg, const BinaryMask& gold) {
    if (!seg.same_shape(gold)) throw ConfigError("metrics: mask sizes differ");
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < seg.size(); ++i) {
        const bool s = seg[i], g = gold[i];
        tp += s && g;
        fp += s && !g;
        fn += !s && g;
        tn += !s && !g;
    }
    const double ns = tp + fp, ng = tp + fn;
    OverlapMetrics m;
    m.dsc = pct(2 * tp, ns + ng);
    m.ji = pct(tp, tp + fp + fn);
    m.sen = pct(tp, tp + fn);
    m.spc = ns > 0 ? (1.0 - fp / ns) * 100.0 : kNaN;
    m.fpr = pct(fp, fp + tn);
    m.fnr = pct(fn, fn + tp);
    return m;
}

BinaryMask inner_boundary(const BinaryMask& mask) {
    BinaryMask out(mask.width, mask.height);
    auto bg = [&](int x, int y) { return !mask.inside(x, y) || !mask.at(x, y); };
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            out.at(x, y) = mask.at(x, y) && (bg(x - 1, y) || bg(x + 1, y) || bg(x, y - 1) || bg(x, y + 1));
    return out;
}

double hausdorff(const BinaryMask& a, const BinaryMask& b) {
    require_pair(a, b);
    const BinaryMask ba = inner_boundary(a), bb = inner_boundary(b);
    return std::max(directed(ba, sq_distance_to(bb)).max, directed(bb, sq_distance_to(ba)).max);
}

double mahalanobis_distance(const BinaryMask& a, const BinaryMask& b) {
    require_pair(a, b);
    struct Stats {
        double n = 0, mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
    };
    auto stats = [](const BinaryMask& m) {
        Stats s;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.at(x, y)) {
                    s.n += 1;
                    s.mx += x;
                    s.my += y;
                }
        s.mx /= s.n;
        s.my /= s.n;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.at(x, y)) {
                    s.sxx += (x - s.mx) * (x - s.mx);
                    s.syy += (y - s.my) * (y - s.my);
                    s.sxy += (x - s.mx) * (y - s.my);
                }
        s.sxx /= s.n;
        s.syy /= s.n;
        s.sxy /= s.n;
        return s;
    };
    const Stats p = stats(a), q = stats(b);
    const double n = p.n + q.n;
    const double cxx = (p.n * p.sxx + q.n * q.sxx) / n;
    const double cyy = (p.n * p.syy + q.n * q.syy) / n;
    const double cxy = (p.n * p.sxy + q.n * q.sxy) / n;
    const double dx = p.mx - q.mx, dy = p.my - q.my;
    if (dx == 0 && dy == 0) return 0.0;
    const double det = cxx * cyy - cxy * cxy;
    if (det > 1e-12 * std::max(1.0, cxx * cyy)) {
        const double quad = (cyy * dx * dx - 2 * cxy * dx * dy + cxx * dy * dy) / det;
        return std::sqrt(std::max(0.0, quad));
    }
    // Degenerate covariance (points on a line or single pixels): pseudo-inverse along the
    // populated direction; a component off that direction is unbounded.
    const double tr = cxx + cyy;
    if (tr <= 0) return kInf;
    const double ex = cxx >= cyy ? cxx : cxy, ey = cxx >= cyy ? cxy : cyy;
    const double norm = std::hypot(ex, ey);
    const double ux = ex / norm, uy = ey / norm;
    const double along = dx * ux + dy * uy, across = -dx * uy + dy * ux;
    if (std::abs(across) > 1e-9) return kInf;
    return std::abs(along) / std::sqrt(tr);
}

DistanceMetrics distance_metrics(const BinaryMask& seg, const BinaryMask& gold) {
    require_pair(seg, gold);
    const BinaryMask bs = inner_boundary(seg), bg = inner_boundary(gold);
    const Directed sg = directed(bs, sq_distance_to(bg));
    const Directed gs = directed(bg, sq_distance_to(bs));
    DistanceMetrics m;
    m.avg_d = sg.mean;
    m.max_d = sg.max;
    m.hd = std::max(sg.max, gs.max);
    m.mhd = mahalanobis_distance(seg, gold);
    return m;
}

VolumeMetrics volume_metrics(const std::vector<BinaryMask>& seg, const std::vector<BinaryMask>& gold) {
    if (seg.size() != gold.size()) throw ConfigError("volume_metrics: stack sizes differ");
    double vs = 0, vg = 0;
    for (std::size_t k = 0; k < seg.size(); ++k) {
        if (!seg[k].same_shape(gold[k])) throw ConfigError("volume_metrics: slice sizes differ");
        vs += static_cast<double>(count_nonzero(seg[k]));
        vg += static_cast<double>(count_nonzero(gold[k]));
    }
    if (vg == 0) throw ConfigError("volume_metrics: empty gold standard");
    return {std::abs(vs - vg) / vg, 1.0 - std::abs(vs - vg) / (vs + vg)};
}

VolumeMetrics volume_metrics(const BinaryMask& seg, const BinaryMask& gold) {
    return volume_metrics(std::vector<BinaryMask>{seg}, std::vector<BinaryMask>{gold});
}

FloatImage remap_to(const GrayImage& enh, const GrayImage& orig) {
    const auto [omin, omax] = std::minmax_element(enh.data.begin(), enh.data.end());
    const auto [imin, imax] = std::minmax_element(orig.data.begin(), orig.data.end());
    FloatImage out(enh.width, enh.height);
    const double span = static_cast<double>(*omax) - *omin;
    for (std::size_t i = 0; i < enh.size(); ++i)
        out[i] = span > 0 ? (enh[i] - *omin) * (static_cast<double>(*imax) - *imin) / span + *imin : *imin;
    return out;
}

double ssim(const FloatImage& x, const FloatImage& y, double L, int window) {
    if (!x.same_shape(y)) throw ConfigError("ssim: image sizes differ");
    if (x.empty() || window < 1) throw ConfigError("ssim: empty image or window");
    const int wx = std::min(window, x.width), wy = std::min(window, x.height);
    const double k1 = (0.01 * L) * (0.01 * L), k2 = (0.03 * L) * (0.03 * L);
    const int W = x.width + 1;
    // integral images of x, y, x^2, y^2, xy
    std::vector<long double> ix(static_cast<std::size_t>(W) * (x.height + 1), 0), iy(ix), ixx(ix), iyy(ix), ixy(ix);
    for (int r = 0; r < x.height; ++r)
        for (int c = 0; c < x.width; ++c) {
            const long double a = x.at(c, r), b = y.at(c, r);
            const std::size_t k = static_cast<std::size_t>(r + 1) * W + c + 1, up = k - W, left = k - 1, diag = up - 1;
            ix[k] = a + ix[up] + ix[left] - ix[diag];
            iy[k] = b + iy[up] + iy[left] - iy[diag];
            ixx[k] = a * a + ixx[up] + ixx[left] - ixx[diag];
            iyy[k] = b * b + iyy[up] + iyy[left] - iyy[diag];
            ixy[k] = a * b + ixy[up] + ixy[left] - ixy[diag];
        }
    auto box = [&](const std::vector<long double>& t, int c, int r) {
        return t[static_cast<std::size_t>(r + wy) * W + c + wx] - t[static_cast<std::size_t>(r) * W + c + wx] -
               t[static_cast<std::size_t>(r + wy) * W + c] + t[static_cast<std::size_t>(r) * W + c];
    };
    const long double n = static_cast<long double>(wx) * wy;
    long double total = 0;
    long count = 0;
    for (int r = 0; r + wy <= x.height; ++r)
        for (int c = 0; c + wx <= x.width; ++c) {
            const long double mx = box(ix, c, r) / n, my = box(iy, c, r) / n;
            const long double vx = std::max<long double>(0, box(ixx, c, r) / n - mx * mx);
            const long double vy = std::max<long double>(0, box(iyy, c, r) / n - my * my);
            const long double cxy = box(ixy, c, r) / n - mx * my;
            total += ((2 * mx * my + k1) * (2 * cxy + k2)) / ((mx * mx + my * my + k1) * (vx + vy + k2));
            ++count;
        }
    return static_cast<double>(total / count);
}

EnhancementMetrics enhancement_metrics(const GrayImage& orig, const GrayImage& enh, const EnhancementOptions& opt) {
    if (!orig.same_shape(enh)) throw ConfigError("enhancement_metrics: image sizes differ");
    if (orig.empty()) throw ConfigError("enhancement_metrics: empty image");
    const FloatImage x = to_float(orig);
    const FloatImage y = opt.remap ? remap_to(enh, orig) : to_float(enh);
    const auto [imin, imax] = std::minmax_element(orig.data.begin(), orig.data.end());
    const double L = std::max(1.0, static_cast<double>(*imax) - *imin);

    EnhancementMetrics m;
    double mse = 0, mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mse += (x[i] - y[i]) * (x[i] - y[i]);
        mx += x[i];
        my += y[i];
    }
    const double n = static_cast<double>(x.size());
    mse /= n;
    if (mse == 0.0) {
        m.psnr = kInf;
        m.psnr_saturated = true;
    } else {
        m.psnr = 10.0 * std::log10(static_cast<double>(*imax) * *imax / mse);
    }
    m.num_edges = static_cast<long>(count_nonzero(canny_edges(enh, opt.canny_sigma, opt.canny_lo, opt.canny_hi)));
    m.ambe = std::abs(mx / n - my / n) / L;
    m.ssim = ssim(x, y, L, opt.ssim_window);
    return m;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("pearson: series differ in length");
    if (x.size() < 3) throw ConfigError("pearson: need at least three samples");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) throw AlgorithmError("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace medimg::metrics
