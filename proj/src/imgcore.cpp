#include "medimg/imgcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <tuple>

namespace medimg {

namespace {

constexpr Point kN8[8] = {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};
constexpr Point kN4[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};

std::uint16_t clamp_level(double v, int top) {
    if (v <= 0.0) return 0;
    if (v >= top) return static_cast<std::uint16_t>(top);
    return static_cast<std::uint16_t>(std::floor(v + 0.5));
}

std::vector<double> gaussian_kernel(double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * r + 1);
    double s = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
        s += k[i + r];
    }
    for (auto& v : k) v /= s;
    return k;
}

// Half-width of the SE span on each row dy in [-r, r]; -1 marks an empty row.
std::vector<int> row_spans(const StructuringElement& se) {
    const int r = se.radius;
    std::vector<int> spans(2 * r + 1, -1);
    for (const Point& p : se.offsets()) spans[p.y + r] = std::max(spans[p.y + r], std::abs(p.x));
    return spans;
}

// Running min or max over [x-a, x+a] clipped to the row, for every row.
template <class T>
void row_extreme(const Raster<T>& in, int a, bool take_min, std::vector<T>& out) {
    out.resize(in.size());
    const int w = in.width;
    std::deque<int> dq;
    for (int y = 0; y < in.height; ++y) {
        const T* row = &in.data[static_cast<std::size_t>(y) * w];
        T* dst = &out[static_cast<std::size_t>(y) * w];
        dq.clear();
        int next = 0;
        for (int x = 0; x < w; ++x) {
            const int hi = std::min(w - 1, x + a);
            for (; next <= hi; ++next) {
                while (!dq.empty() &&
                       (take_min ? row[dq.back()] >= row[next] : row[dq.back()] <= row[next]))
                    dq.pop_back();
                dq.push_back(next);
            }
            while (dq.front() < x - a) dq.pop_front();
            dst[x] = row[dq.front()];
        }
    }
}

template <class T>
Raster<T> morph_extreme(const Raster<T>& in, const StructuringElement& se, bool take_min) {
    if (se.radius < 0) throw ConfigError("structuring element radius must be non-negative");
    const auto spans = row_spans(se);
    const int r = se.radius;
    std::map<int, std::vector<T>> by_width;
    for (int a : spans)
        if (a >= 0 && !by_width.count(a)) row_extreme(in, a, take_min, by_width[a]);
    std::vector<const std::vector<T>*> row_of(spans.size(), nullptr);
    for (std::size_t k = 0; k < spans.size(); ++k)
        if (spans[k] >= 0) row_of[k] = &by_width[spans[k]];
    Raster<T> out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            bool any = false;
            T best{};
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = y + dy;
                if (!row_of[dy + r] || yy < 0 || yy >= in.height) continue;
                const T v = (*row_of[dy + r])[static_cast<std::size_t>(yy) * in.width + x];
                if (!any || (take_min ? v < best : v > best)) best = v;
                any = true;
            }
            out.at(x, y) = best;
        }
    }
    return out;
}

GrayImage wrap_gray(Raster<std::uint16_t>&& r, int depth) {
    GrayImage g;
    g.width = r.width;
    g.height = r.height;
    g.data = std::move(r.data);
    g.depth = depth;
    return g;
}

}  // namespace

std::vector<Point> StructuringElement::offsets() const {
    if (radius < 0) throw ConfigError("structuring element radius must be non-negative");
    std::vector<Point> pts;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            bool in = false;
            switch (kind) {
                case Kind::Disk: in = dx * dx + dy * dy <= radius * radius; break;
                case Kind::Square: in = true; break;
                case Kind::Diamond: in = std::abs(dx) + std::abs(dy) <= radius; break;
            }
            if (in) pts.push_back({dx, dy});
        }
    return pts;
}

GrayImage contrast_stretch(const GrayImage& img, int out_lo, int out_hi) {
    if (img.empty()) throw ConfigError("contrast_stretch: empty image");
    if (out_lo < 0 || out_hi > 65535 || out_lo >= out_hi)
        throw ConfigError("contrast_stretch: need 0 <= out_lo < out_hi <= 65535");
    auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
    if (*mn == *mx) return img;
    GrayImage out(img.width, img.height, out_hi > 255 ? 16 : 8);
    const double lo = *mn, span = static_cast<double>(*mx) - *mn;
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = clamp_level(out_lo + (img[i] - lo) * (out_hi - out_lo) / span, out.max_level());
    return out;
}

FloatImage normalize_unit(const FloatImage& img, const BinaryMask* mask) {
    if (mask && !mask->same_shape(img)) throw ConfigError("normalize_unit: mask size mismatch");
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        mn = std::min(mn, img[i]);
        mx = std::max(mx, img[i]);
    }
    FloatImage out(img.width, img.height, 0.0);
    if (!(mx > mn)) return out;
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        out[i] = (img[i] - mn) / (mx - mn);
    }
    return out;
}

FloatImage normalize_unit(const GrayImage& img, const BinaryMask* mask) {
    return normalize_unit(to_float(img), mask);
}

GrayImage stick_filter(const GrayImage& img, int length, int thickness) {
    if (length < 1 || length % 2 == 0) throw ConfigError("stick_filter: length must be odd");
    if (thickness < 1 || thickness >= length)
        throw ConfigError("stick_filter: thickness must be in [1, length)");
    const int h = length / 2;
    if (h == 0) return img;

    // One stick per pair of opposite border pixels of the window: 2*length-2 in total.
    std::vector<std::vector<Point>> sticks;
    for (int dy = -h; dy <= 0; ++dy)
        for (int dx = -h; dx <= h; ++dx) {
            if (std::max(std::abs(dx), std::abs(dy)) != h) continue;
            if (dy == 0 && dx < 0) continue;
            const bool horizontalish = std::abs(dx) >= std::abs(dy);
            std::vector<Point> pts;
            const int t0 = -(thickness - 1) / 2;
            for (int t = t0; t < t0 + thickness; ++t)
                for (int k = -h; k <= h; ++k) {
                    Point p{static_cast<int>(std::lround(static_cast<double>(k) * dx / h)),
                            static_cast<int>(std::lround(static_cast<double>(k) * dy / h))};
                    if (horizontalish)
                        p.y += t;
                    else
                        p.x += t;
                    pts.push_back(p);
                }
            sticks.push_back(std::move(pts));
        }

    GrayImage out(img.width, img.height, img.depth);
    const int top = img.max_level();
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double best = -1.0;
            for (const auto& s : sticks) {
                double sum = 0.0;
                for (const Point& p : s) sum += img.clamped(x + p.x, y + p.y);
                best = std::max(best, sum / static_cast<double>(s.size()));
            }
            out.at(x, y) = clamp_level(best, top);
        }
    return out;
}

int bilateral_window(double sigma_spatial) {
    return std::max(5, 2 * static_cast<int>(std::ceil(3.0 * sigma_spatial)) + 1);
}

GrayImage bilateral_filter(const GrayImage& img, double sigma_spatial, double sigma_range,
                           int window) {
    if (!(sigma_spatial > 0.0) || !(sigma_range > 0.0))
        throw ConfigError("bilateral_filter: sigmas must be positive");
    if (window == 0) window = bilateral_window(sigma_spatial);
    if (window < 1 || window % 2 == 0) throw ConfigError("bilateral_filter: window must be odd");
    const int r = window / 2;
    std::vector<double> closeness(static_cast<std::size_t>(window) * window);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            closeness[(dy + r) * window + dx + r] =
                std::exp(-0.5 * (dx * dx + dy * dy) / (sigma_spatial * sigma_spatial));
    const int top = img.max_level();
    std::vector<double> similarity(top + 1);
    for (int d = 0; d <= top; ++d)
        similarity[d] = std::exp(-0.5 * (static_cast<double>(d) * d) / (sigma_range * sigma_range));

    GrayImage out(img.width, img.height, img.depth);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int c = img.at(x, y);
            double num = 0.0, eta = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int v = img.clamped(x + dx, y + dy);
                    const double wgt = closeness[(dy + r) * window + dx + r] * similarity[std::abs(v - c)];
                    num += wgt * v;
                    eta += wgt;
                }
            out.at(x, y) = clamp_level(num / eta, top);
        }
    return out;
}

FloatImage gaussian_blur(const FloatImage& img, double sigma) {
    if (!(sigma > 0.0)) return img;
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    FloatImage tmp(img.width, img.height), out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double s = 0.0;
            for (int i = -r; i <= r; ++i) s += k[i + r] * img.clamped(x + i, y);
            tmp.at(x, y) = s;
        }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double s = 0.0;
            for (int i = -r; i <= r; ++i) s += k[i + r] * tmp.clamped(x, y + i);
            out.at(x, y) = s;
        }
    return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    FloatImage f = gaussian_blur(to_float(img), sigma);
    GrayImage out(img.width, img.height, img.depth);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = clamp_level(f[i], img.max_level());
    return out;
}

GrayImage gray_erode(const GrayImage& img, const StructuringElement& se) {
    return wrap_gray(morph_extreme<std::uint16_t>(img, se, true), img.depth);
}

GrayImage gray_dilate(const GrayImage& img, const StructuringElement& se) {
    return wrap_gray(morph_extreme<std::uint16_t>(img, se, false), img.depth);
}

GrayImage gray_open(const GrayImage& img, const StructuringElement& se) {
    return gray_dilate(gray_erode(img, se), se);
}

GrayImage white_tophat(const GrayImage& img, const StructuringElement& se) {
    GrayImage opened = gray_open(img, se);
    GrayImage out(img.width, img.height, img.depth);
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = img[i] > opened[i] ? static_cast<std::uint16_t>(img[i] - opened[i]) : 0;
    return out;
}

BinaryMask morphology(const BinaryMask& mask, MorphOp op, const StructuringElement& se) {
    switch (op) {
        case MorphOp::Erode: return morph_extreme<std::uint8_t>(mask, se, true);
        case MorphOp::Dilate: return morph_extreme<std::uint8_t>(mask, se, false);
        case MorphOp::Open:
            return morph_extreme<std::uint8_t>(morph_extreme<std::uint8_t>(mask, se, true), se, false);
        case MorphOp::Close:
            return morph_extreme<std::uint8_t>(morph_extreme<std::uint8_t>(mask, se, false), se, true);
    }
    return mask;
}

LabelMap connected_components(const BinaryMask& mask, Connectivity conn) {
    LabelMap lm(mask.width, mask.height);
    const Point* nb = conn == Connectivity::Four ? kN4 : kN8;
    const int nn = conn == Connectivity::Four ? 4 : 8;
    std::vector<int> stack;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y) || lm.at(x, y)) continue;
            const int label = ++lm.count;
            lm.at(x, y) = label;
            stack.assign(1, static_cast<int>(lm.index(x, y)));
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int px = idx % mask.width, py = idx / mask.width;
                for (int k = 0; k < nn; ++k) {
                    const int qx = px + nb[k].x, qy = py + nb[k].y;
                    if (!mask.inside(qx, qy) || !mask.at(qx, qy) || lm.at(qx, qy)) continue;
                    lm.at(qx, qy) = label;
                    stack.push_back(static_cast<int>(lm.index(qx, qy)));
                }
            }
        }
    return lm;
}

std::vector<int> component_areas(const LabelMap& labels) {
    std::vector<int> areas(labels.count + 1, 0);
    for (int v : labels.data)
        if (v > 0) ++areas[v];
    return areas;
}

BinaryMask label_mask(const LabelMap& labels, int label) {
    BinaryMask m(labels.width, labels.height);
    for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == label ? 1 : 0;
    return m;
}

BinaryMask remove_small(const BinaryMask& mask, int min_area, Connectivity conn) {
    if (min_area < 0) throw ConfigError("remove_small: min_area must be >= 0");
    if (min_area == 0) return mask;
    LabelMap lm = connected_components(mask, conn);
    auto areas = component_areas(lm);
    BinaryMask out(mask.width, mask.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = lm[i] > 0 && areas[lm[i]] >= min_area ? 1 : 0;
    return out;
}

BinaryMask fill_holes(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    BinaryMask reach(w, h);
    std::vector<int> stack;
    auto seed = [&](int x, int y) {
        if (!mask.at(x, y) && !reach.at(x, y)) {
            reach.at(x, y) = 1;
            stack.push_back(y * w + x);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        const int px = idx % w, py = idx / w;
        for (const Point& d : kN4) {
            const int qx = px + d.x, qy = py + d.y;
            if (mask.inside(qx, qy)) seed(qx, qy);
        }
    }
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = reach[i] ? 0 : 1;
    return out;
}

BinaryMask convex_hull(const BinaryMask& mask) {
    // Only the extreme pixels of each row can be hull vertices.
    std::vector<std::pair<long long, long long>> pts;
    for (int y = 0; y < mask.height; ++y) {
        int lo = -1, hi = -1;
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                if (lo < 0) lo = x;
                hi = x;
            }
        if (lo >= 0) {
            pts.emplace_back(lo, y);
            if (hi != lo) pts.emplace_back(hi, y);
        }
    }
    if (pts.empty()) throw AlgorithmError("convex_hull: mask is empty");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    auto cross = [](const auto& o, const auto& a, const auto& b) {
        return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<long long, long long>> hull;
    if (pts.size() <= 2) {
        hull = pts;
    } else {
        hull.resize(2 * pts.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
            hull[k++] = pts[i];
        }
        for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
            while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
            hull[k++] = pts[i];
        }
        hull.resize(k - 1);
    }

    long long bx0 = hull[0].first, bx1 = bx0, by0 = hull[0].second, by1 = by0;
    for (const auto& p : hull) {
        bx0 = std::min(bx0, p.first);
        bx1 = std::max(bx1, p.first);
        by0 = std::min(by0, p.second);
        by1 = std::max(by1, p.second);
    }
    auto inside = [&](long long x, long long y) {
        const std::pair<long long, long long> p{x, y};
        const std::size_t n = hull.size();
        if (n == 1) return hull[0] == p;
        for (std::size_t i = 0; i < n; ++i)
            if (cross(hull[i], hull[(i + 1) % n], p) < 0) return false;
        return true;
    };

    BinaryMask out(mask.width, mask.height);
    for (long long y = by0; y <= by1; ++y) {
        long long l = bx0, r = bx1;
        while (l <= r && !inside(l, y)) ++l;
        while (r >= l && !inside(r, y)) --r;
        for (long long x = l; x <= r; ++x) out.at(static_cast<int>(x), static_cast<int>(y)) = 1;
    }
    return out;
}

namespace {

// 1-D squared distance transform of sampled function f (lower envelope of parabolas).
// Callers guarantee f[0] == 0, so every envelope starts from a finite parabola.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    const double inf = std::numeric_limits<double>::infinity();
    d.assign(n, 0.0);
    v.assign(n, 0);
    z.assign(n + 1, 0.0);
    int k = 0;
    z[0] = -inf;
    z[1] = inf;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                   (2.0 * (q - v[k]));
        while (s <= z[k]) {
            --k;
            s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                (2.0 * (q - v[k]));
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

FloatImage distance_transform(const BinaryMask& mask, DistanceMode mode) {
    const int w = mask.width, h = mask.height;
    FloatImage out(w, h, 0.0);
    if (mode == DistanceMode::Exact) {
        // One ring of background padding stands in for everything outside the image.
        const int W = w + 2, H = h + 2;
        const double big = 1e20;
        std::vector<double> g(static_cast<std::size_t>(W) * H, 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (mask.at(x, y)) g[(y + 1) * W + x + 1] = big;
        std::vector<double> f, d, z;
        std::vector<int> v;
        f.resize(H);
        for (int x = 0; x < W; ++x) {
            for (int y = 0; y < H; ++y) f[y] = g[y * W + x];
            edt_1d(f, d, v, z);
            for (int y = 0; y < H; ++y) g[y * W + x] = d[y];
        }
        f.resize(W);
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) f[x] = g[y * W + x];
            edt_1d(f, d, v, z);
            for (int x = 0; x < W; ++x) g[y * W + x] = d[x];
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(x, y) = std::sqrt(g[(y + 1) * W + x + 1]);
        return out;
    }

    // 5x5 chamfer with integer weights 5/7/11, scaled back by 1/5.
    const int P = 2, W = w + 2 * P, H = h + 2 * P;
    const int big = std::numeric_limits<int>::max() / 4;
    std::vector<int> g(static_cast<std::size_t>(W) * H, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.at(x, y)) g[(y + P) * W + x + P] = big;
    struct Step {
        int dx, dy, cost;
    };
    const Step fwd[] = {{-1, 0, 5}, {-1, -1, 7}, {0, -1, 5}, {1, -1, 7},
                        {-2, -1, 11}, {-1, -2, 11}, {1, -2, 11}, {2, -1, 11}};
    for (int y = P; y < H - P; ++y)
        for (int x = P; x < W - P; ++x) {
            int& c = g[y * W + x];
            if (!c) continue;
            for (const Step& s : fwd) c = std::min(c, g[(y + s.dy) * W + x + s.dx] + s.cost);
        }
    for (int y = H - P - 1; y >= P; --y)
        for (int x = W - P - 1; x >= P; --x) {
            int& c = g[y * W + x];
            if (!c) continue;
            for (const Step& s : fwd) c = std::min(c, g[(y - s.dy) * W + x - s.dx] + s.cost);
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = g[(y + P) * W + x + P] / 5.0;
    return out;
}

BinaryMask regional_maxima(const GrayImage& img, const StructuringElement& se) {
    std::vector<Point> nb;
    for (const Point& p : se.offsets())
        if (p.x || p.y) nb.push_back(p);
    const int w = img.width, h = img.height;
    BinaryMask out(w, h);
    std::vector<std::uint8_t> seen(img.size(), 0);
    std::vector<int> plateau, stack;
    for (int start = 0; start < static_cast<int>(img.size()); ++start) {
        if (seen[start]) continue;
        const auto v = img[start];
        bool is_max = true;
        plateau.clear();
        stack.assign(1, start);
        seen[start] = 1;
        while (!stack.empty()) {
            const int idx = stack.back();
            stack.pop_back();
            plateau.push_back(idx);
            const int px = idx % w, py = idx / w;
            for (const Point& d : nb) {
                const int qx = px + d.x, qy = py + d.y;
                if (!img.inside(qx, qy)) continue;
                const int q = qy * w + qx;
                if (img[q] > v) {
                    is_max = false;
                } else if (img[q] == v && !seen[q]) {
                    seen[q] = 1;
                    stack.push_back(q);
                }
            }
        }
        if (is_max)
            for (int idx : plateau) out[idx] = 1;
    }
    return out;
}

LabelMap watershed(const FloatImage& relief, const LabelMap& markers, Connectivity conn) {
    if (!relief.same_shape(markers)) throw ConfigError("watershed: relief and markers differ in size");
    using Item = std::tuple<double, std::uint64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    LabelMap out = markers;
    std::uint64_t age = 0;
    bool any = false;
    for (int i = 0; i < static_cast<int>(out.size()); ++i)
        if (out[i] > 0) {
            pq.emplace(relief[i], age++, i);
            any = true;
        }
    if (!any) throw AlgorithmError("watershed: no markers");
    const Point* nb = conn == Connectivity::Four ? kN4 : kN8;
    const int nn = conn == Connectivity::Four ? 4 : 8;
    const int w = relief.width;
    while (!pq.empty()) {
        const int idx = std::get<2>(pq.top());
        pq.pop();
        const int px = idx % w, py = idx / w;
        for (int k = 0; k < nn; ++k) {
            const int qx = px + nb[k].x, qy = py + nb[k].y;
            if (!relief.inside(qx, qy)) continue;
            const int q = qy * w + qx;
            if (out[q]) continue;
            out[q] = out[idx];
            pq.emplace(relief[q], age++, q);
        }
    }
    return out;
}

LabelMap watershed(const GrayImage& relief, const LabelMap& markers, Connectivity conn) {
    return watershed(to_float(relief), markers, conn);
}

BinaryMask canny_edges(const GrayImage& img, double sigma, double lo, double hi) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw ConfigError("canny_edges: need 0 <= lo < hi <= 1");
    const FloatImage s = gaussian_blur(to_float(img), sigma);
    const int w = img.width, h = img.height;
    FloatImage gx(w, h), gy(w, h), mag(w, h);
    double top = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto v = [&](int dx, int dy) { return s.clamped(x + dx, y + dy); };
            const double dx = (v(1, -1) + 2 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2 * v(-1, 0) + v(-1, 1));
            const double dy = (v(-1, 1) + 2 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2 * v(0, -1) + v(1, -1));
            gx.at(x, y) = dx;
            gy.at(x, y) = dy;
            mag.at(x, y) = std::hypot(dx, dy);
            top = std::max(top, mag.at(x, y));
        }
    BinaryMask edges(w, h);
    if (top <= 1e-9) return edges;

    // Non-maximum suppression along the quantised gradient direction.
    FloatImage thin(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double m = mag.at(x, y);
            if (m <= 1e-9 * top) continue;
            double ang = std::atan2(gy.at(x, y), gx.at(x, y)) * 180.0 / M_PI;
            if (ang < 0) ang += 180.0;
            Point d;
            if (ang < 22.5 || ang >= 157.5)
                d = {1, 0};
            else if (ang < 67.5)
                d = {1, 1};
            else if (ang < 112.5)
                d = {0, 1};
            else
                d = {-1, 1};
            if (d.x * gx.at(x, y) + d.y * gy.at(x, y) < 0) d = {-d.x, -d.y};
            auto at = [&](int px, int py) { return mag.inside(px, py) ? mag.at(px, py) : 0.0; };
            const double ahead = at(x + d.x, y + d.y), behind = at(x - d.x, y - d.y);
            if (m > behind && m >= ahead) thin.at(x, y) = m;
        }

    const double t_hi = hi * top, t_lo = lo * top;
    std::vector<int> stack;
    for (int i = 0; i < static_cast<int>(thin.size()); ++i)
        if (thin[i] > 0 && thin[i] >= t_hi && !edges[i]) {
            edges[i] = 1;
            stack.push_back(i);
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                for (const Point& d : kN8) {
                    const int qx = idx % w + d.x, qy = idx / w + d.y;
                    if (!edges.inside(qx, qy)) continue;
                    const int q = qy * w + qx;
                    if (!edges[q] && thin[q] > 0 && thin[q] >= t_lo) {
                        edges[q] = 1;
                        stack.push_back(q);
                    }
                }
            }
        }
    return edges;
}

FloatImage laplacian_magnitude(const GrayImage& img) {
    FloatImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double c = img.at(x, y);
            const double s = static_cast<double>(img.clamped(x - 1, y)) + img.clamped(x + 1, y) +
                             img.clamped(x, y - 1) + img.clamped(x, y + 1);
            out.at(x, y) = std::abs(s - 4.0 * c);
        }
    return out;
}

std::vector<ComponentFeatures> all_features(const LabelMap& labels) {
    struct Acc {
        double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        int x0 = std::numeric_limits<int>::max(), y0 = x0, x1 = -1, y1 = -1;
    };
    std::vector<Acc> acc(labels.count + 1);
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x) {
            const int l = labels.at(x, y);
            if (l <= 0) continue;
            if (l > labels.count) throw ConfigError("label map has a label above its count");
            Acc& a = acc[l];
            a.n += 1;
            a.sx += x;
            a.sy += y;
            a.sxx += static_cast<double>(x) * x;
            a.syy += static_cast<double>(y) * y;
            a.sxy += static_cast<double>(x) * y;
            a.x0 = std::min(a.x0, x);
            a.y0 = std::min(a.y0, y);
            a.x1 = std::max(a.x1, x);
            a.y1 = std::max(a.y1, y);
        }
    std::vector<ComponentFeatures> out;
    for (int l = 1; l <= labels.count; ++l) {
        const Acc& a = acc[l];
        ComponentFeatures f;
        f.label = l;
        f.area = static_cast<int>(a.n);
        if (a.n == 0) {
            out.push_back(f);
            continue;
        }
        f.cx = a.sx / a.n;
        f.cy = a.sy / a.n;
        const double mxx = a.sxx / a.n - f.cx * f.cx;
        const double myy = a.syy / a.n - f.cy * f.cy;
        const double mxy = a.sxy / a.n - f.cx * f.cy;
        const double mid = 0.5 * (mxx + myy);
        const double rad = std::sqrt(0.25 * (mxx - myy) * (mxx - myy) + mxy * mxy);
        const double l1 = mid + rad, l2 = std::max(0.0, mid - rad);
        f.eccentricity = l1 > 1e-12 ? std::sqrt(std::max(0.0, 1.0 - l2 / l1)) : 0.0;
        f.eccentricity = std::min(f.eccentricity, 0.999);
        f.bbox = {a.x0, a.y0, a.x1 - a.x0 + 1, a.y1 - a.y0 + 1};
        f.extent = a.n / (static_cast<double>(f.bbox.width) * f.bbox.height);
        out.push_back(f);
    }
    return out;
}

ComponentFeatures shape_features(const LabelMap& labels, int label) {
    if (label < 1 || label > labels.count) throw ConfigError("shape_features: no such label");
    auto f = all_features(labels)[label - 1];
    if (f.area == 0) throw ConfigError("shape_features: label has no pixels");
    return f;
}

}  // namespace medimg
