#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace medimg {

// Error categories map onto CLI exit codes (2, 3, 4).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class AlgorithmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T>
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Raster() = default;
    Raster(int w, int h, T fill = T{}) : width(w), height(h), data(checked_size(w, h), fill) {}

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

    T& at(int x, int y) { return data[index(x, y)]; }
    const T& at(int x, int y) const { return data[index(x, y)]; }
    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }

    // replicate-edge access
    const T& clamped(int x, int y) const {
        x = x < 0 ? 0 : (x >= width ? width - 1 : x);
        y = y < 0 ? 0 : (y >= height ? height - 1 : y);
        return data[index(x, y)];
    }

    bool same_shape(int w, int h) const { return width == w && height == h; }
    template <class U>
    bool same_shape(const Raster<U>& o) const { return width == o.width && height == o.height; }

    friend bool operator==(const Raster& a, const Raster& b) {
        return a.width == b.width && a.height == b.height && a.data == b.data;
    }

private:
    static std::size_t checked_size(int w, int h) {
        if (w < 0 || h < 0) throw ConfigError("raster dimensions must be non-negative");
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    }
};

// Scalar intensity image with declared bit depth (8 or 16).
struct GrayImage : Raster<std::uint16_t> {
    int depth = 8;

    GrayImage() = default;
    GrayImage(int w, int h, int bit_depth = 8, std::uint16_t fill = 0)
        : Raster<std::uint16_t>(w, h, fill), depth(bit_depth) {}

    int max_level() const { return (1 << depth) - 1; }

    friend bool operator==(const GrayImage& a, const GrayImage& b) {
        return a.depth == b.depth && static_cast<const Raster<std::uint16_t>&>(a) ==
                                         static_cast<const Raster<std::uint16_t>&>(b);
    }
};

// Values are 0 or 1.
using BinaryMask = Raster<std::uint8_t>;
using FloatImage = Raster<double>;

struct LabelMap : Raster<int> {
    int count = 0;

    LabelMap() = default;
    LabelMap(int w, int h) : Raster<int>(w, h, 0) {}
};

struct ColorImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // interleaved, row-major

    ColorImage() = default;
    ColorImage(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* px(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
    const std::uint8_t* px(int x, int y) const {
        return &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
    }
    friend bool operator==(const ColorImage&, const ColorImage&) = default;
};

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

enum class Connectivity { Four = 4, Eight = 8 };

// Throws ConfigError when the image does not follow the GrayImage invariants.
void validate(const GrayImage& img);
void validate(const BinaryMask& mask);

std::size_t count_nonzero(const BinaryMask& mask);
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_xor(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_not(const BinaryMask& a);

GrayImage crop(const GrayImage& img, const Rect& r);
BinaryMask crop(const BinaryMask& m, const Rect& r);
// Paste `part` into a zero canvas of size w x h at r.x, r.y.
BinaryMask uncrop(const BinaryMask& part, const Rect& r, int w, int h);
// Smallest rectangle enclosing the foreground; width 0 when empty.
Rect bounding_box(const BinaryMask& m);

FloatImage to_float(const GrayImage& img);

}  // namespace medimg
