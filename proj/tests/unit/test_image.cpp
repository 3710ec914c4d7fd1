#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "medimg/image.hpp"
#include "medimg/io.hpp"

using namespace medimg;

TEST_CASE("raster indexing and clamped access") {
    GrayImage img(4, 3);
    img.at(3, 2) = 9;
    CHECK(img.index(3, 2) == 11);
    CHECK(img[11] == 9);
    CHECK(img.clamped(10, 10) == 9);
    CHECK(img.clamped(-1, -1) == img.at(0, 0));
    CHECK(img.max_level() == 255);
    CHECK(GrayImage(2, 2, 16).max_level() == 65535);
    CHECK_THROWS_AS(GrayImage(-1, 2), ConfigError);
}

TEST_CASE("validate rejects malformed images and masks") {
    GrayImage img(3, 3);
    CHECK_NOTHROW(validate(img));
    img.at(1, 1) = 256;
    CHECK_THROWS_AS(validate(img), ConfigError);
    img.depth = 12;
    CHECK_THROWS_AS(validate(img), ConfigError);
    BinaryMask m(2, 2);
    m[0] = 2;
    CHECK_THROWS_AS(validate(m), ConfigError);
    CHECK_THROWS_AS(validate(GrayImage(0, 0)), ConfigError);
}

TEST_CASE("mask algebra matches elementwise logic") {
    const auto a = testing::random_mask(17, 11, 1), b = testing::random_mask(17, 11, 2);
    const auto u = mask_or(a, b), i = mask_and(a, b), x = mask_xor(a, b), n = mask_not(a);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(u[k] == (a[k] | b[k]));
        CHECK(i[k] == (a[k] & b[k]));
        CHECK(x[k] == (a[k] ^ b[k]));
        CHECK(n[k] == 1 - a[k]);
    }
    CHECK(count_nonzero(u) + count_nonzero(i) == count_nonzero(a) + count_nonzero(b));
    CHECK_THROWS_AS(mask_and(a, BinaryMask(3, 3)), ConfigError);
}

TEST_CASE("crop, uncrop and bounding box") {
    const auto m = testing::rect_mask(20, 15, 4, 3, 9, 12);
    const Rect r = bounding_box(m);
    CHECK(r.x == 4);
    CHECK(r.y == 3);
    CHECK(r.width == 5);
    CHECK(r.height == 9);
    CHECK(uncrop(crop(m, r), r, 20, 15) == m);
    CHECK(bounding_box(BinaryMask(5, 5)).width == 0);
    const auto g = testing::random_gray(9, 9, 3);
    const auto c = crop(g, Rect{2, 3, 4, 5});
    CHECK(c.at(0, 0) == g.at(2, 3));
    CHECK(c.at(3, 4) == g.at(5, 7));
}

TEST_CASE("io round trips") {
    const auto dir = testing::temp_dir("io");
    const auto g = testing::random_gray(13, 7, 4);
    for (const char* ext : {".png", ".pgm"}) {
        const auto p = (dir / (std::string("g") + ext)).string();
        io::write_gray(p, g);
        CHECK(io::read_gray(p) == g);
    }
    GrayImage deep(5, 4, 16);
    for (std::size_t i = 0; i < deep.size(); ++i) deep[i] = static_cast<std::uint16_t>(i * 3001);
    io::write_gray((dir / "d.png").string(), deep);
    CHECK(io::read_gray((dir / "d.png").string()) == deep);

    const auto m = testing::random_mask(8, 6, 5);
    io::write_mask((dir / "m.png").string(), m);
    CHECK(io::read_mask((dir / "m.png").string()) == m);

    ColorImage c(6, 5);
    for (std::size_t i = 0; i < c.rgb.size(); ++i) c.rgb[i] = static_cast<std::uint8_t>(i * 7);
    for (const char* ext : {".png", ".ppm"}) {
        const auto p = (dir / (std::string("c") + ext)).string();
        io::write_color(p, c);
        CHECK(io::read_color(p) == c);
    }
}

TEST_CASE("io errors") {
    const auto dir = testing::temp_dir("ioerr");
    CHECK_THROWS_AS(io::read_gray((dir / "missing.png").string()), IoError);
    std::ofstream((dir / "bad.pgm").string()) << "P2 garbage";
    CHECK_THROWS_AS(io::read_gray((dir / "bad.pgm").string()), IoError);
    CHECK_THROWS_AS(io::write_gray((dir / "x.bmp").string(), GrayImage(2, 2)), IoError);
}
