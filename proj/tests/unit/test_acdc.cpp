#include <cmath>
#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "medimg/acdc.hpp"
#include "medimg/phantom.hpp"

using namespace medimg;
using namespace medimg::acdc;

TEST_CASE("ACDC counts separated nuclei exactly") {
    for (int k = 0; k < 4; ++k) {
        phantom::NucleiParams np;
        np.size = 256;
        np.count = 10 + 8 * k;
        const auto ph = phantom::nuclei(20 + k, np);
        const auto r = acdc_segment(ph.image);
        CHECK(r.count == np.count);
        CHECK(r.labels.count == r.count);
        CHECK(r.cells.size() == static_cast<std::size_t>(r.count));
        for (std::size_t i = 0; i < r.cells.size(); ++i) CHECK(r.cells[i].label == static_cast<int>(i) + 1);
    }
}

TEST_CASE("ACDC splits touching pairs") {
    phantom::NucleiParams np;
    np.size = 256;
    np.count = 6;
    np.overlapping_pairs = true;
    np.radius_min = 8;
    np.radius_max = 12;
    const auto ph = phantom::nuclei(31, np);
    const auto r = acdc_segment(ph.image);
    int split = 0;
    for (auto [a, b] : ph.pairs) {
        std::map<int, int> va, vb;
        for (std::size_t i = 0; i < ph.truth.size(); ++i) {
            if (ph.truth[i] == a) ++va[r.labels[i]];
            if (ph.truth[i] == b) ++vb[r.labels[i]];
        }
        auto major = [](const std::map<int, int>& v) {
            int best = 0, n = -1;
            for (auto [l, c] : v)
                if (c > n) best = l, n = c;
            return best;
        };
        const int la = major(va), lb = major(vb);
        split += la != 0 && lb != 0 && la != lb;
    }
    CHECK(split >= 5);
}

TEST_CASE("ACDC labels cover the nuclei") {
    phantom::NucleiParams np;
    np.size = 256;
    np.count = 15;
    const auto ph = phantom::nuclei(40, np);
    const auto r = acdc_segment(ph.image);
    BinaryMask seg(256, 256), truth(256, 256);
    for (std::size_t i = 0; i < seg.size(); ++i) {
        seg[i] = r.labels[i] != 0;
        truth[i] = ph.truth[i] != 0;
    }
    CHECK(testing::dice(seg, truth) >= 0.85);
}

TEST_CASE("ACDC preprocessing and failure modes") {
    const GrayImage flat(64, 64, 8, 30);
    const auto pre = acdc_preprocess(flat);
    for (auto v : pre.data) CHECK(v == 0);  // the top-hat removes a flat background
    CHECK_THROWS_AS(acdc_markers(pre), AlgorithmError);
}

TEST_CASE("count correlation is Pearson's r") {
    CHECK(count_correlation({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(1.0));
    CHECK(count_correlation({1, 2, 3, 4}, {8, 6, 4, 2}) == doctest::Approx(-1.0));
    // r for (1,2,3) vs (1,3,2): cov 0.5, var 1 -> 0.5
    CHECK(count_correlation({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
}
