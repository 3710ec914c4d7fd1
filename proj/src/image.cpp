#include "medimg/image.hpp"

#include <algorithm>

namespace medimg {

void validate(const GrayImage& img) {
    if (img.width < 1 || img.height < 1) throw ConfigError("image must be at least 1x1");
    if (img.depth != 8 && img.depth != 16) throw ConfigError("bit depth must be 8 or 16");
    if (img.data.size() != static_cast<std::size_t>(img.width) * img.height)
        throw ConfigError("image data length does not match its dimensions");
    const int top = img.max_level();
    for (auto v : img.data)
        if (v > top) throw ConfigError("pixel value exceeds declared bit depth");
}

void validate(const BinaryMask& mask) {
    if (mask.data.size() != static_cast<std::size_t>(mask.width) * mask.height)
        throw ConfigError("mask data length does not match its dimensions");
    for (auto v : mask.data)
        if (v > 1) throw ConfigError("mask values must be 0 or 1");
}

std::size_t count_nonzero(const BinaryMask& mask) {
    return static_cast<std::size_t>(std::count_if(mask.data.begin(), mask.data.end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

namespace {
template <class F>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, F f) {
    if (!a.same_shape(b)) throw ConfigError("mask dimensions differ");
    BinaryMask out(a.width, a.height);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i] != 0, b[i] != 0) ? 1 : 0;
    return out;
}
}  // namespace

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](bool x, bool y) { return x && y; });
}
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](bool x, bool y) { return x || y; });
}
BinaryMask mask_xor(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](bool x, bool y) { return x != y; });
}
BinaryMask mask_not(const BinaryMask& a) {
    BinaryMask out(a.width, a.height);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ? 0 : 1;
    return out;
}

namespace {
void check_rect(const Rect& r, int w, int h) {
    if (r.width < 1 || r.height < 1 || r.x < 0 || r.y < 0 || r.x + r.width > w ||
        r.y + r.height > h)
        throw ConfigError("rectangle is not inside the image");
}
}  // namespace

GrayImage crop(const GrayImage& img, const Rect& r) {
    check_rect(r, img.width, img.height);
    GrayImage out(r.width, r.height, img.depth);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x) out.at(x, y) = img.at(r.x + x, r.y + y);
    return out;
}

BinaryMask crop(const BinaryMask& m, const Rect& r) {
    check_rect(r, m.width, m.height);
    BinaryMask out(r.width, r.height);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x) out.at(x, y) = m.at(r.x + x, r.y + y);
    return out;
}

BinaryMask uncrop(const BinaryMask& part, const Rect& r, int w, int h) {
    BinaryMask out(w, h);
    for (int y = 0; y < part.height; ++y)
        for (int x = 0; x < part.width; ++x)
            if (out.inside(r.x + x, r.y + y)) out.at(r.x + x, r.y + y) = part.at(x, y);
    return out;
}

Rect bounding_box(const BinaryMask& m) {
    int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) return {};
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

FloatImage to_float(const GrayImage& img) {
    FloatImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i];
    return out;
}

}  // namespace medimg
