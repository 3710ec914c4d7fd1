#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "medimg/imgcore.hpp"
#include "medimg/phantom.hpp"

using namespace medimg;
using namespace medimg::phantom;

TEST_CASE("phantoms are deterministic per seed") {
    CHECK(bimodal_blob(7).image == bimodal_blob(7).image);
    CHECK(!(bimodal_blob(7).image == bimodal_blob(8).image));
    CHECK(gtv_blob(3, true).image == gtv_blob(3, true).image);
    CHECK(bimodal_mixture(4).image == bimodal_mixture(4).image);
    CHECK(prostate(5).t1 == prostate(5).t1);
    CHECK(plate(6).image == plate(6).image);
    CHECK(nuclei(7).image == nuclei(7).image);
    reg::AffineTransform2D t;
    t.tx = 3;
    CHECK(register_pair(8, t).fixed == register_pair(8, t).fixed);
}

TEST_CASE("blob phantom geometry") {
    const auto p = bimodal_blob(11);
    CHECK(count_nonzero(p.truth) > 0);
    CHECK(count_nonzero(mask_and(p.truth, mask_not(p.roi))) == 0);
    const Rect b = bounding_box(p.truth);
    CHECK(p.bbox.x <= b.x);
    CHECK(p.bbox.x + p.bbox.width >= b.x + b.width);
    CHECK(connected_components(p.truth).count == 1);
}

TEST_CASE("plate layout") {
    for (auto [n, rows, cols] : {std::tuple{6, 2, 3}, {12, 3, 4}, {24, 4, 6}}) {
        PlateParams pp;
        pp.wells = n;
        const auto p = plate(1, pp);
        REQUIRE(p.wells.size() == static_cast<std::size_t>(n));
        for (int r = 0; r < rows; ++r)
            for (int c = 1; c < cols; ++c) {
                const auto& a = p.wells[r * cols + c - 1];
                const auto& b = p.wells[r * cols + c];
                CHECK(b.x - a.x == doctest::Approx(2.5 * p.radius));
                CHECK(b.y == doctest::Approx(a.y));
            }
    }
    PlateParams bad;
    bad.wells = 7;
    CHECK_THROWS_AS(plate(1, bad), ConfigError);
}

TEST_CASE("half-covered wells have half coverage") {
    PlateParams pp;
    pp.half_covered = true;
    const auto p = plate(2, pp);
    for (double c : p.coverage) CHECK(c == doctest::Approx(0.5).epsilon(1e-9));
    for (const auto& w : p.wells) CHECK(w.x - std::floor(w.x) == doctest::Approx(0.5));
}

TEST_CASE("nuclei truth labels") {
    NucleiParams np;
    np.count = 50;
    const auto p = nuclei(3, np);
    CHECK(p.truth.count == 50);
    CHECK(component_areas(p.truth).size() == 51);
    np.overlapping_pairs = true;
    np.count = 10;
    const auto q = nuclei(4, np);
    CHECK(q.truth.count == 20);
    CHECK(q.pairs.size() == 10);
}

TEST_CASE("register pair truth maps moving onto fixed") {
    reg::AffineTransform2D t;
    t.tx = 7;
    t.ty = -4;
    t.rotation = 10 * std::acos(-1.0) / 180;
    const auto p = register_pair(5, t);
    const auto warped = reg::apply_transform(p.moving, t);
    double err = 0;
    int n = 0;
    for (int y = 20; y < 92; ++y)
        for (int x = 20; x < 92; ++x) {
            err += std::abs(double(warped.at(x, y)) - p.fixed.at(x, y));
            ++n;
        }
    CHECK(err / n < 3.0);
}
