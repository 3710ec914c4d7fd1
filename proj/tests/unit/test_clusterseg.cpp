#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "medimg/clusterseg.hpp"
#include "medimg/phantom.hpp"

using namespace medimg;
using namespace medimg::cluster;

namespace {

FeatureMatrix mixture_1d(std::uint64_t seed, int n, double a, double b, double sd) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> na(a, sd), nb(b, sd);
    FeatureMatrix f(n, 1);
    for (int k = 0; k < n; ++k) f.at(k, 0) = k % 2 ? nb(rng) : na(rng);
    return f;
}

// Textbook membership from centroids: u_ik = 1 / sum_j (d_ik / d_jk)^(2/(m-1)).
double oracle_membership(const FeatureMatrix& x, const FuzzyPartition& p, int i, int k, double m) {
    auto dist = [&](int c) {
        double s = 0;
        for (int t = 0; t < x.d; ++t) s += (x.at(k, t) - p.centroid(c, t)) * (x.at(k, t) - p.centroid(c, t));
        return std::sqrt(s);
    };
    double s = 0;
    for (int j = 0; j < p.c; ++j) s += std::pow(dist(i) / dist(j), 2.0 / (m - 1));
    return 1.0 / s;
}

}  // namespace

TEST_CASE("fcm objective is non-increasing and memberships are a partition") {
    for (int s = 0; s < 10; ++s) {
        const auto x = mixture_1d(s, 300, 40, 160, 12);
        FcmConfig c;
        c.seed = 10 + s;
        const auto p = fcm(x, c);
        for (std::size_t t = 1; t < p.j_history.size(); ++t) CHECK(p.j_history[t] <= p.j_history[t - 1] * (1 + 1e-12));
        for (int k = 0; k < p.n; ++k) {
            double sum = 0;
            for (int i = 0; i < p.c; ++i) sum += p.membership(i, k);
            CHECK(std::abs(sum - 1) <= 1e-9);
        }
    }
}

TEST_CASE("fcm memberships agree with the closed form") {
    FeatureMatrix x(200, 2);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1);
    for (int k = 0; k < 200; ++k) {
        x.at(k, 0) = n(rng) + (k % 3) * 6;
        x.at(k, 1) = n(rng) - (k % 3) * 4;
    }
    FcmConfig c;
    c.clusters = 3;
    c.m = 2.5;
    const auto p = fcm(x, c);
    for (int k = 0; k < 200; k += 7)
        for (int i = 0; i < 3; ++i) CHECK(p.membership(i, k) == doctest::Approx(oracle_membership(x, p, i, k, 2.5)).epsilon(1e-10));
    const auto lab = hard_labels(p);
    int correct = 0;
    for (int k = 0; k < 200; ++k) correct += lab[k] == lab[k % 3];
    CHECK(correct >= 196);
}

TEST_CASE("fcm separates a two-class mixture") {
    const auto x = mixture_1d(9, 400, 50, 150, 10);
    const auto p = fcm(x, {});
    const int bright = select_cluster(p, Select::Brightest);
    const int dark = select_cluster(p, Select::Darkest);
    CHECK(bright != dark);
    CHECK(p.centroid(bright) == doctest::Approx(150).epsilon(0.03));
    CHECK(p.centroid(dark) == doctest::Approx(50).epsilon(0.03));
    const auto lab = hard_labels(p);
    int ok = 0;
    for (int k = 0; k < 400; ++k) ok += lab[k] == (k % 2 ? bright : dark);
    CHECK(ok >= 396);
}

TEST_CASE("fcm is reproducible and validates input") {
    const auto x = mixture_1d(1, 100, 0, 10, 1);
    FcmConfig c;
    c.seed = 77;
    CHECK(fcm(x, c).u == fcm(x, c).u);
    c.m = 1.0;
    CHECK_THROWS_AS(fcm(x, c), ConfigError);
    c = {};
    c.clusters = 1;
    CHECK_THROWS_AS(fcm(x, c), ConfigError);
    FeatureMatrix bad(3, 1);
    bad.at(1, 0) = std::nan("");
    CHECK_THROWS_AS(fcm(bad, {}), ConfigError);
}

TEST_CASE("samples on a centroid get crisp memberships") {
    FeatureMatrix x(4, 1);
    x.values = {0, 0, 10, 10};
    const auto p = fcm(x, {});
    for (int k = 0; k < 4; ++k) {
        const double a = p.membership(0, k), b = p.membership(1, k);
        CHECK(std::max(a, b) == doctest::Approx(1.0));
    }
}

TEST_CASE("defuzzify places samples at their raster index") {
    FeatureMatrix x(3, 1);
    x.values = {0, 100, 0};
    const auto p = fcm(x, {});
    const auto m = defuzzify(p, select_cluster(p, Select::Brightest), {5, 7, 9}, 4, 3);
    CHECK(count_nonzero(m) == 1);
    CHECK(m[7] == 1);
}

TEST_CASE("gtv pipeline outlines a bright lesion") {
    double total = 0;
    for (int s = 0; s < 5; ++s) {
        const auto ph = phantom::gtv_blob(60 + s, false);
        const auto roi = testing::rect_mask(ph.image.width, ph.image.height, ph.bbox.x, ph.bbox.y,
                                            ph.bbox.x + ph.bbox.width, ph.bbox.y + ph.bbox.height);
        const auto r = gtv_pipeline(ph.image, roi);
        for (std::size_t i = 0; i < r.mask.size(); ++i)
            if (r.pre_hull[i]) CHECK(r.mask[i] == 1);
        total += testing::dice(r.mask, ph.truth);
    }
    CHECK(total / 5 >= 0.9);
}

TEST_CASE("necrosis is found inside a dark-core lesion") {
    const auto ph = phantom::gtv_blob(70, true);
    const auto roi = testing::rect_mask(ph.image.width, ph.image.height, ph.bbox.x, ph.bbox.y,
                                        ph.bbox.x + ph.bbox.width, ph.bbox.y + ph.bbox.height);
    const auto r = gtv_pipeline(ph.image, roi);
    const auto nec = next_pipeline(ph.image, r.mask);
    CHECK(count_nonzero(nec) > 0);
    for (std::size_t i = 0; i < nec.size(); ++i)
        if (nec[i]) CHECK(r.mask[i] == 1);
    const auto with = necrosis_inclusion(ph.image, roi, r.pre_hull, r.mask);
    CHECK(testing::dice(with, ph.truth) >= 0.9);
    CHECK(next_erosion_radius(81) == 2);
    CHECK(next_erosion_radius(80) == 1);
}

TEST_CASE("prostate pipeline on the two-channel phantom") {
    double both = 0, single = 0;
    for (int s = 0; s < 3; ++s) {
        const auto ph = phantom::prostate(80 + s);
        both += testing::dice(prostate_pipeline(ph.t2, ph.t1, ph.roi), ph.truth);
        ProstateConfig c;
        c.use_t1 = false;
        single += testing::dice(prostate_pipeline(ph.t2, ph.t2, ph.roi, c), ph.truth);
    }
    CHECK(both / 3 >= 0.85);
    CHECK(both > single);  // the T1 channel separates the gland from the T2-similar surround
}
