#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "medimg/threshold.hpp"

using namespace medimg;
using namespace medimg::threshold;

namespace {

// Direct between-class variance, recomputed from scratch for every split.
int otsu_oracle(const std::vector<double>& h) {
    const int L = static_cast<int>(h.size());
    std::vector<double> var(L, -1.0);
    double best = -1.0;
    for (int t = 0; t < L - 1; ++t) {
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (int r = 0; r < L; ++r) (r <= t ? n0 : n1) += h[r], (r <= t ? s0 : s1) += h[r] * r;
        if (n0 == 0 || n1 == 0) continue;
        const double m0 = s0 / n0, m1 = s1 / n1, n = n0 + n1;
        var[t] = (n0 / n) * (n1 / n) * (m0 - m1) * (m0 - m1);
        best = std::max(best, var[t]);
    }
    for (int t = 0; t < L - 1; ++t)
        if (var[t] >= best * (1 - 1e-10)) return t;
    return -1;
}

Histogram random_hist(std::mt19937_64& rng, int L) {
    std::uniform_int_distribution<int> count(0, 50);
    std::bernoulli_distribution empty(0.3);
    std::vector<double> c(L);
    for (auto& v : c) v = empty(rng) ? 0 : count(rng);
    c[0] += 1;
    c[L - 1] += 1;
    return Histogram::from_counts(c);
}

}  // namespace

TEST_CASE("histogram counts masked pixels only") {
    const auto g = testing::random_gray(16, 16, 1);
    const auto m = testing::random_mask(16, 16, 2);
    const auto h = histogram(g, &m);
    CHECK(h.levels() == 256);
    CHECK(h.total == doctest::Approx(static_cast<double>(count_nonzero(m))));
    const BinaryMask none(16, 16);
    CHECK_THROWS_AS(histogram(g, &none), ConfigError);
    CHECK(histogram(GrayImage(2, 2, 16)).levels() == 65536);
}

TEST_CASE("otsu equals the exhaustive argmax") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 300; ++k) {
        const int L = 2 + static_cast<int>(rng() % 63);
        const auto h = random_hist(rng, L);
        CHECK(otsu(h).theta == otsu_oracle(h.bins));
    }
}

TEST_CASE("otsu ties resolve to the smallest threshold") {
    const auto h = Histogram::from_counts({5, 0, 0, 0, 5});
    CHECK(otsu(h).theta == 0);
}

TEST_CASE("iots reaches its fixed point") {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 300; ++k) {
        const auto h = random_hist(rng, 2 + static_cast<int>(rng() % 63));
        const double eps = 0.5;
        const auto r = iots(h, eps, 1000);
        const auto [m1, m2] = class_means(h, r.theta);
        CHECK(std::abs(0.5 * (m1 + m2) - r.theta) <= eps);
        CHECK(r.mu1 == m1);
        CHECK(r.mu2 == m2);
    }
}

TEST_CASE("iots on a known two-level histogram") {
    // levels 10 and 50 with equal mass: midpoint 30, then means 10 and 50 -> 30
    std::vector<double> c(64, 0.0);
    c[10] = 4;
    c[50] = 4;
    const auto r = iots(Histogram::from_counts(c));
    CHECK(r.theta == doctest::Approx(30.0));
    CHECK(r.mu1 == doctest::Approx(10.0));
    CHECK(r.mu2 == doctest::Approx(50.0));
}

TEST_CASE("degenerate histograms are rejected") {
    std::vector<double> c(8, 0.0);
    c[3] = 10;
    CHECK_THROWS_AS(iots(Histogram::from_counts(c)), AlgorithmError);
    CHECK_THROWS_AS(otsu(Histogram::from_counts(c)), AlgorithmError);
    CHECK_THROWS_AS(Histogram::from_counts({1, -1}), ConfigError);
}

TEST_CASE("class means split at floor(theta)") {
    const auto h = Histogram::from_counts({1, 1, 1, 1});
    const auto [a, b] = class_means(h, 1.9);
    CHECK(a == doctest::Approx(0.5));
    CHECK(b == doctest::Approx(2.5));
    CHECK(std::isnan(class_means(h, 3.0).second));
}

TEST_CASE("binarize polarity") {
    GrayImage g(4, 1);
    g.data = {0, 10, 11, 20};
    CHECK(binarize(g, 10, Polarity::Above).data == std::vector<std::uint8_t>{0, 0, 1, 1});
    CHECK(binarize(g, 10, Polarity::Below).data == std::vector<std::uint8_t>{1, 1, 0, 0});
}

TEST_CASE("local adaptive threshold compares against the window mean") {
    CHECK(local_window(10) == 3);
    CHECK(local_window(64) == 9);
    CHECK(local_window(100) == 13);
    const auto g = testing::random_gray(40, 33, 8);
    const auto m = local_adaptive_threshold(g, Polarity::Above);
    const auto b = local_adaptive_threshold(g, Polarity::Below);
    const int rx = local_window(40) / 2, ry = local_window(33) / 2;
    for (int y = 0; y < 33; ++y)
        for (int x = 0; x < 40; ++x) {
            double s = 0;
            for (int dy = -ry; dy <= ry; ++dy)
                for (int dx = -rx; dx <= rx; ++dx) s += g.clamped(x + dx, y + dy);
            const double mean = s / ((2 * rx + 1) * (2 * ry + 1));
            CHECK(m.at(x, y) == (g.at(x, y) > mean));
            CHECK(b.at(x, y) == (g.at(x, y) < mean));
        }
    GrayImage flat(10, 10, 8, 40);
    CHECK(count_nonzero(local_adaptive_threshold(flat, Polarity::Above)) == 0);
}
