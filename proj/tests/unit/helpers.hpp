#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "medimg/image.hpp"

namespace testing {

inline medimg::GrayImage random_gray(int w, int h, std::uint64_t seed, int lo = 0, int hi = 255) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(lo, hi);
    medimg::GrayImage img(w, h);
    for (auto& v : img.data) v = static_cast<std::uint16_t>(d(rng));
    return img;
}

inline medimg::BinaryMask random_mask(int w, int h, std::uint64_t seed, double p = 0.5) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution d(p);
    medimg::BinaryMask m(w, h);
    for (auto& v : m.data) v = d(rng) ? 1 : 0;
    return m;
}

inline medimg::BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
    medimg::BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.at(x, y) = 1;
    return m;
}

inline medimg::BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
    medimg::BinaryMask m(w, h);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m.at(x, y) = 1;
    return m;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("medimg_unit_" + name);
    std::filesystem::create_directories(p);
    return p;
}

inline double dice(const medimg::BinaryMask& a, const medimg::BinaryMask& b) {
    std::size_t inter = 0, sa = 0, sb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += a[i] && b[i];
        sa += a[i] != 0;
        sb += b[i] != 0;
    }
    return sa + sb == 0 ? 1.0 : 2.0 * inter / static_cast<double>(sa + sb);
}

}  // namespace testing
