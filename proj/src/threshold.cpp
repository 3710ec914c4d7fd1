#include "medimg/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace medimg::threshold {

Histogram Histogram::from_counts(std::vector<double> counts) {
    Histogram h;
    for (double c : counts) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("histogram counts must be finite and >= 0");
        h.total += c;
    }
    h.bins = std::move(counts);
    return h;
}

Histogram histogram(const GrayImage& img, const BinaryMask* mask) {
    if (mask && !mask->same_shape(img)) throw ConfigError("histogram: mask size mismatch");
    Histogram h;
    h.bins.assign(static_cast<std::size_t>(img.max_level()) + 1, 0.0);
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        h.bins[img[i]] += 1.0;
        h.total += 1.0;
    }
    if (h.total == 0.0) throw ConfigError("histogram: mask selects no pixels");
    return h;
}

namespace {

struct Span {
    int lo = -1, hi = -1, populated = 0;
};

Span populated_span(const Histogram& h) {
    Span s;
    for (int r = 0; r < h.levels(); ++r)
        if (h.bins[r] > 0) {
            if (s.lo < 0) s.lo = r;
            s.hi = r;
            ++s.populated;
        }
    return s;
}

}  // namespace

std::pair<double, double> class_means(const Histogram& hist, double theta) {
    const int cut = static_cast<int>(std::floor(theta));
    double n1 = 0, s1 = 0, n2 = 0, s2 = 0;
    for (int r = 0; r < hist.levels(); ++r) {
        const double f = hist.bins[r];
        if (r <= cut) {
            n1 += f;
            s1 += f * r;
        } else {
            n2 += f;
            s2 += f * r;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {n1 > 0 ? s1 / n1 : nan, n2 > 0 ? s2 / n2 : nan};
}

ThresholdResult iots(const Histogram& hist, double eps_tol, int max_iter) {
    const Span span = populated_span(hist);
    if (span.populated < 2) throw AlgorithmError("iots: histogram has fewer than two populated levels");
    if (!(eps_tol >= 0.0) || max_iter < 1) throw ConfigError("iots: invalid tolerance or iteration cap");

    double mass = 0, sum = 0;
    for (int r = 0; r < hist.levels(); ++r) {
        mass += hist.bins[r];
        sum += hist.bins[r] * r;
    }
    ThresholdResult res;
    double theta = sum / mass;
    for (int it = 1; it <= max_iter; ++it) {
        // keep both classes populated
        theta = std::clamp(theta, static_cast<double>(span.lo), static_cast<double>(span.hi) - 1e-9);
        auto [m1, m2] = class_means(hist, theta);
        res.theta = theta;
        res.mu1 = m1;
        res.mu2 = m2;
        res.iterations = it;
        const double next = 0.5 * (m1 + m2);
        if (std::abs(next - theta) <= eps_tol) break;
        theta = next;
    }
    return res;
}

ThresholdResult otsu(const Histogram& hist) {
    const Span span = populated_span(hist);
    if (span.populated < 2) throw AlgorithmError("otsu: histogram has fewer than two populated levels");
    const int L = hist.levels();
    double total = 0, total_sum = 0;
    for (int r = 0; r < L; ++r) {
        total += hist.bins[r];
        total_sum += hist.bins[r] * r;
    }
    // sigma_B^2 * total^2 = (total_sum*w0 - total*s0)^2 / (w0*w1)
    long double best = -1.0L;
    int best_theta = span.lo;
    double w0 = 0, s0 = 0;
    for (int t = 0; t < L - 1; ++t) {
        w0 += hist.bins[t];
        s0 += hist.bins[t] * t;
        const double w1 = total - w0;
        if (w0 <= 0 || w1 <= 0) continue;
        const long double num = static_cast<long double>(total_sum) * w0 - static_cast<long double>(total) * s0;
        const long double v = num * num / (static_cast<long double>(w0) * w1);
        // relative tolerance keeps exact ties (empty bins between modes) on the smallest theta
        if (v > best * (1.0L + 1e-12L)) {
            best = v;
            best_theta = t;
        }
    }
    ThresholdResult res;
    res.theta = best_theta;
    auto [m1, m2] = class_means(hist, best_theta);
    res.mu1 = m1;
    res.mu2 = m2;
    res.iterations = 1;
    return res;
}

int local_window(int pixels) { return std::max(3, 2 * (pixels / 16) + 1); }

BinaryMask local_adaptive_threshold(const GrayImage& img, Polarity polarity) {
    const int wx = local_window(img.width), wy = local_window(img.height);
    const int rx = wx / 2, ry = wy / 2;
    const int W = img.width + 2 * rx, H = img.height + 2 * ry;
    // integral image over the replicate-padded raster
    std::vector<long long> integ(static_cast<std::size_t>(W + 1) * (H + 1), 0);
    for (int y = 0; y < H; ++y) {
        long long row = 0;
        for (int x = 0; x < W; ++x) {
            row += img.clamped(x - rx, y - ry);
            integ[(y + 1) * (W + 1) + x + 1] = integ[y * (W + 1) + x + 1] + row;
        }
    }
    const long long area = static_cast<long long>(wx) * wy;
    BinaryMask out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            // window in padded coordinates is [x, x+wx) x [y, y+wy)
            const long long s = integ[(y + wy) * (W + 1) + x + wx] - integ[y * (W + 1) + x + wx] -
                                integ[(y + wy) * (W + 1) + x] + integ[y * (W + 1) + x];
            const long long v = static_cast<long long>(img.at(x, y)) * area;
            out.at(x, y) = polarity == Polarity::Above ? (v > s) : (v < s);
        }
    return out;
}

BinaryMask binarize(const GrayImage& img, double theta, Polarity polarity) {
    BinaryMask out(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = polarity == Polarity::Above ? (img[i] > theta) : (img[i] <= theta);
    return out;
}

}  // namespace medimg::threshold
