#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "medimg/colony.hpp"
#include "medimg/phantom.hpp"

using namespace medimg;
using namespace medimg::colony;

namespace {

ColorImage solid(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    ColorImage c(1, 1);
    c.rgb = {r, g, b};
    return c;
}

}  // namespace

TEST_CASE("CIE Luv reference colours") {
    const auto w = rgb_to_luv(solid(255, 255, 255));
    CHECK(w.L[0] == doctest::Approx(100.0).epsilon(1e-4));
    CHECK(std::abs(w.u[0]) < 1e-3);
    CHECK(std::abs(w.v[0]) < 1e-3);
    const auto r = rgb_to_luv(solid(255, 0, 0));
    CHECK(r.L[0] == doctest::Approx(53.24).epsilon(1e-3));
    CHECK(r.u[0] == doctest::Approx(175.01).epsilon(1e-3));
    CHECK(r.v[0] == doctest::Approx(37.76).epsilon(2e-3));
    const auto k = rgb_to_luv(solid(0, 0, 0));
    CHECK(k.L[0] == 0.0);
    CHECK(k.u[0] == 0.0);
    // violet stain has positive u*
    CHECK(rgb_to_luv(solid(130, 70, 170)).u[0] > 0);
}

TEST_CASE("stain image darkens stained pixels") {
    ColorImage c(2, 1);
    c.rgb = {225, 225, 225, 130, 70, 170};
    const auto s = stain_image(c);
    CHECK(s[0] == 255);
    CHECK(s[1] < 200);
}

TEST_CASE("acceptance threshold scales with sensitivity") {
    CHECK(acceptance_threshold(0.98) == doctest::Approx(0.4));
    CHECK(acceptance_threshold(0.99) == doctest::Approx(0.2));
}

TEST_CASE("wells are detected under translation and rotation") {
    for (int n : {6, 12, 24})
        for (double ang : {0.0, 5.0}) {
            phantom::PlateParams pp;
            pp.wells = n;
            pp.dx = 3.5;
            pp.dy = -2.0;
            pp.angle_deg = ang;
            const auto ph = phantom::plate(n + static_cast<int>(ang), pp);
            const auto det = detect_wells(ph.image, ph.radius, n);
            REQUIRE(det.ok);
            const auto got = order_wells(det.wells);
            const auto want = order_wells(ph.wells);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::hypot(got[i].x - want[i].x, got[i].y - want[i].y) <= 2.0);
        }
}

TEST_CASE("order_wells sorts rows then columns") {
    std::vector<WellCircle> w{{50, 12, 10}, {10, 9, 10}, {30, 52, 10}, {10, 50, 10}, {30, 11, 10}};
    const auto o = order_wells(w);
    CHECK(o[0].x == 10);
    CHECK(o[1].x == 30);
    CHECK(o[2].x == 50);
    CHECK(o[3].y == 50);
    CHECK(o[4].y == 52);
}

TEST_CASE("ACC of half-covered wells") {
    phantom::PlateParams pp;
    pp.half_covered = true;
    const auto ph = phantom::plate(12, pp);
    for (const auto& w : ph.wells) {
        const auto m = extract_colonies(ph.image, w);
        CHECK(acc(m, w) == doctest::Approx(50.0).epsilon(0.01));
    }
}

TEST_CASE("circle mask and ACC bounds") {
    const WellCircle c{20, 20, 10};
    const auto m = circle_mask(41, 41, c);
    CHECK(std::abs(double(count_nonzero(m)) - std::numbers::pi * 100) < 10);
    CHECK(acc(m, c) == 100.0);
    CHECK(acc(BinaryMask(41, 41), c) == 0.0);
    CHECK(acc(BinaryMask(41, 41, 1), c) == 100.0);
    CHECK_THROWS_AS(acc(m, WellCircle{-50, -50, 1}), ConfigError);
}

TEST_CASE("white masking rescues growth along the rim") {
    const WellCircle w{40, 40, 30};
    GrayImage stain(81, 81, 8, 255);
    std::size_t ring = 0;
    for (int y = 0; y < 81; ++y)
        for (int x = 0; x < 81; ++x) {
            const double d = std::hypot(x - 40.0, y - 40.0);
            if (d <= 30 && d > 22 && x < 40) {  // open arc, so hole filling leaves the centre alone
                stain.at(x, y) = 120;
                ++ring;
            }
        }
    const double truth = 100.0 * ring / count_nonzero(circle_mask(81, 81, w));
    const double white = acc(extract_colonies(stain, w, Masking::White), w);
    const double black = acc(extract_colonies(stain, w, Masking::Black), w);
    CHECK(std::abs(white - truth) < 5.0);
    CHECK(std::abs(black - truth) > std::abs(white - truth));
    CHECK(count_nonzero(extract_colonies(GrayImage(81, 81, 8, 255), w)) == 0);
}

TEST_CASE("surviving fraction identities") {
    CHECK(surviving_fraction(30, 60) == 50.0);
    CHECK(surviving_fraction(42.5, 42.5) == 100.0);
    CHECK_THROWS_AS(surviving_fraction(1, 0), ConfigError);
    CHECK(plating_efficiency(80, 200) == 40.0);
    // Printed: (treated colonies / plated) * PE
    CHECK(conventional_sf(20, 100, 80, 200) == doctest::Approx(0.2 * 40));
    // Standard: (treated colonies / plated) / (PE / 100), as a percentage
    CHECK(conventional_sf(20, 100, 80, 200, SfConvention::Standard) == doctest::Approx(50.0));
    CHECK(conventional_sf(80, 200, 80, 200, SfConvention::Standard) == doctest::Approx(100.0));
}
