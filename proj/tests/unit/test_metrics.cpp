#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "medimg/metrics.hpp"

using namespace medimg;
using namespace medimg::metrics;

namespace {

std::vector<Point> boundary_oracle(const BinaryMask& m) {
    std::vector<Point> pts;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            const bool edge = x == 0 || y == 0 || x == m.width - 1 || y == m.height - 1 || !m.at(x - 1, y) ||
                              !m.at(x + 1, y) || !m.at(x, y - 1) || !m.at(x, y + 1);
            if (edge) pts.push_back({x, y});
        }
    return pts;
}

double nearest(const Point& p, const std::vector<Point>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : set) best = std::min(best, std::hypot(double(p.x - q.x), double(p.y - q.y)));
    return best;
}

BinaryMask blob(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    BinaryMask m(40, 36);
    for (int k = 0; k < 3; ++k) {
        const auto d = testing::disk_mask(40, 36, 8 + 24 * u(rng), 8 + 20 * u(rng), 3 + 6 * u(rng));
        m = mask_or(m, d);
    }
    return m;
}

double ssim_oracle(const FloatImage& x, const FloatImage& y, double L, int w) {
    const double c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
    double total = 0;
    int count = 0;
    for (int r = 0; r + w <= x.height; ++r)
        for (int c = 0; c + w <= x.width; ++c) {
            double mx = 0, my = 0;
            for (int j = 0; j < w; ++j)
                for (int i = 0; i < w; ++i) mx += x.at(c + i, r + j), my += y.at(c + i, r + j);
            mx /= w * w;
            my /= w * w;
            double vx = 0, vy = 0, cv = 0;
            for (int j = 0; j < w; ++j)
                for (int i = 0; i < w; ++i) {
                    const double a = x.at(c + i, r + j) - mx, b = y.at(c + i, r + j) - my;
                    vx += a * a;
                    vy += b * b;
                    cv += a * b;
                }
            vx /= w * w;
            vy /= w * w;
            cv /= w * w;
            total += (2 * mx * my + c1) * (2 * cv + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return total / count;
}

}  // namespace

TEST_CASE("overlap metrics on a known pair") {
    // seg: 4 pixels, gold: 4 pixels, overlap 2, image 16 pixels
    BinaryMask s(4, 4), g(4, 4);
    s.data = {1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    g.data = {0, 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    const auto m = overlap_metrics(s, g);
    CHECK(m.dsc == doctest::Approx(50.0));
    CHECK(m.ji == doctest::Approx(100.0 / 3));
    CHECK(m.sen == doctest::Approx(50.0));
    CHECK(m.spc == doctest::Approx(50.0));
    CHECK(m.fpr == doctest::Approx(100.0 * 2 / 12));
    CHECK(m.fnr == doctest::Approx(50.0));
    CHECK(std::isnan(overlap_metrics(BinaryMask(4, 4), BinaryMask(4, 4)).dsc));
}

TEST_CASE("DSC-JI identity and distance symmetry") {
    for (int k = 0; k < 40; ++k) {
        const auto a = blob(2 * k), b = blob(2 * k + 1);
        const auto o = overlap_metrics(a, b);
        if (!std::isnan(o.dsc) && o.dsc > 0) CHECK(o.ji == doctest::Approx(100 * (o.dsc / 100) / (2 - o.dsc / 100)).epsilon(1e-12));
        CHECK(hausdorff(a, b) == hausdorff(b, a));
        CHECK(mahalanobis_distance(a, b) == doctest::Approx(mahalanobis_distance(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("boundary distances match brute force") {
    for (int k = 0; k < 20; ++k) {
        const auto a = blob(100 + 2 * k), b = blob(101 + 2 * k);
        const auto ba = boundary_oracle(a), bb = boundary_oracle(b);
        CHECK(count_nonzero(inner_boundary(a)) == ba.size());
        double sum = 0, mx = 0, mx2 = 0;
        for (const auto& p : ba) {
            const double d = nearest(p, bb);
            sum += d;
            mx = std::max(mx, d);
        }
        for (const auto& p : bb) mx2 = std::max(mx2, nearest(p, ba));
        const auto d = distance_metrics(a, b);
        CHECK(d.avg_d == doctest::Approx(sum / ba.size()).epsilon(1e-12));
        CHECK(d.max_d == doctest::Approx(mx).epsilon(1e-12));
        CHECK(d.hd == doctest::Approx(std::max(mx, mx2)).epsilon(1e-12));
    }
}

TEST_CASE("Mahalanobis distance with pooled covariance") {
    const auto a = testing::rect_mask(30, 30, 2, 2, 10, 6), b = testing::rect_mask(30, 30, 12, 5, 16, 13);
    // pooled covariance by direct sums
    double n = 0, sx = 0, sy = 0;
    auto moments = [](const BinaryMask& m) {
        double c = 0, mx = 0, my = 0;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.at(x, y)) c += 1, mx += x, my += y;
        mx /= c;
        my /= c;
        double xx = 0, yy = 0, xy = 0;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.at(x, y)) xx += (x - mx) * (x - mx), yy += (y - my) * (y - my), xy += (x - mx) * (y - my);
        return std::array<double, 6>{c, mx, my, xx, yy, xy};
    };
    const auto p = moments(a), q = moments(b);
    n = p[0] + q[0];
    const double cxx = (p[3] + q[3]) / n, cyy = (p[4] + q[4]) / n, cxy = (p[5] + q[5]) / n;
    sx = p[1] - q[1];
    sy = p[2] - q[2];
    const double det = cxx * cyy - cxy * cxy;
    const double expect = std::sqrt((cyy * sx * sx - 2 * cxy * sx * sy + cxx * sy * sy) / det);
    CHECK(mahalanobis_distance(a, b) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(mahalanobis_distance(a, a) == 0.0);
    CHECK_THROWS_AS(mahalanobis_distance(a, BinaryMask(30, 30)), ConfigError);
}

TEST_CASE("degenerate covariance falls back to the populated direction") {
    BinaryMask a(20, 5), b(20, 5);
    for (int x = 0; x < 6; ++x) a.at(x, 2) = 1;
    for (int x = 10; x < 16; ++x) b.at(x, 2) = 1;
    // variance along x is 35/12 for six consecutive pixels; means differ by 10
    CHECK(mahalanobis_distance(a, b) == doctest::Approx(10 / std::sqrt(35.0 / 12)));
    BinaryMask c(20, 5);
    for (int x = 10; x < 16; ++x) c.at(x, 3) = 1;
    CHECK(std::isinf(mahalanobis_distance(a, c)));
}

TEST_CASE("volume metrics") {
    const auto g = testing::rect_mask(10, 10, 0, 0, 5, 4);  // 20
    const auto s = testing::rect_mask(10, 10, 0, 0, 5, 5);  // 25
    const auto v = volume_metrics(s, g);
    CHECK(v.avd == doctest::Approx(0.25));
    CHECK(v.vs == doctest::Approx(1 - 5.0 / 45));
    const auto st = volume_metrics(std::vector{s, g}, std::vector{g, g});
    CHECK(st.avd == doctest::Approx(5.0 / 40));
    CHECK_THROWS_AS(volume_metrics(s, BinaryMask(10, 10)), ConfigError);
}

TEST_CASE("SSIM matches direct window sums") {
    const auto a = to_float(testing::random_gray(23, 19, 1)), b = to_float(testing::random_gray(23, 19, 2));
    CHECK(ssim(a, b, 255, 8) == doctest::Approx(ssim_oracle(a, b, 255, 8)).epsilon(1e-9));
    CHECK(ssim(a, a, 255, 8) == 1.0);
    CHECK(ssim(a, b, 255, 8) == doctest::Approx(ssim(b, a, 255, 8)).epsilon(1e-12));
    // windows larger than the image shrink to fit
    const auto c = to_float(testing::random_gray(5, 4, 3));
    CHECK(ssim(c, c, 255, 8) == 1.0);
}

TEST_CASE("enhancement metrics") {
    const auto orig = testing::random_gray(32, 32, 5, 20, 200);
    const auto same = enhancement_metrics(orig, orig);
    CHECK(std::isinf(same.psnr));
    CHECK(same.psnr_saturated);
    CHECK(same.ambe == 0.0);
    CHECK(same.ssim == 1.0);

    // AMBE shift law with the remap disabled
    GrayImage shifted = orig;
    for (auto& v : shifted.data) v += 17;
    EnhancementOptions raw;
    raw.remap = false;
    int lo = 255, hi = 0;
    for (auto v : orig.data) lo = std::min<int>(lo, v), hi = std::max<int>(hi, v);
    const auto m = enhancement_metrics(orig, shifted, raw);
    CHECK(m.ambe == doctest::Approx(17.0 / (hi - lo)).epsilon(1e-12));
    CHECK(m.psnr == doctest::Approx(10 * std::log10(double(hi) * hi / (17.0 * 17.0))).epsilon(1e-12));
    // with the remap on, a pure shift is undone
    CHECK(enhancement_metrics(orig, shifted).ambe == doctest::Approx(0.0));
}

TEST_CASE("remap_to maps the enhanced range onto the original range") {
    GrayImage e(3, 1), o(3, 1);
    e.data = {0, 50, 100};
    o.data = {10, 10, 30};
    const auto r = remap_to(e, o);
    CHECK(r[0] == 10.0);
    CHECK(r[1] == 20.0);
    CHECK(r[2] == 30.0);
}

TEST_CASE("pearson correlation") {
    CHECK(pearson({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), AlgorithmError);
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2}), ConfigError);
}
