#include "medimg/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace medimg::io {

namespace {

std::string extension(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// --- netpbm ---------------------------------------------------------------

struct PnmHeader {
    char kind = 0;
    int width = 0, height = 0, maxval = 0;
};

int read_header_int(std::istream& in) {
    int c;
    while ((c = in.peek()) != EOF) {
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string skip;
            std::getline(in, skip);
        } else {
            break;
        }
    }
    int v = -1;
    in >> v;
    if (!in) throw IoError("malformed PNM header");
    return v;
}

PnmHeader read_pnm_header(std::istream& in) {
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw IoError("only binary P5/P6 files are supported");
    PnmHeader h;
    h.kind = magic[1];
    h.width = read_header_int(in);
    h.height = read_header_int(in);
    h.maxval = read_header_int(in);
    in.get();  // single whitespace before raster
    if (h.width < 1 || h.height < 1 || h.maxval < 1 || h.maxval > 65535)
        throw IoError("invalid PNM header values");
    return h;
}

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    PnmHeader h = read_pnm_header(in);
    if (h.kind != '5') throw IoError(path + " is not a grayscale PGM");
    GrayImage img(h.width, h.height, h.maxval > 255 ? 16 : 8);
    if (h.maxval > 255) {
        std::vector<unsigned char> buf(img.size() * 2);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!in) throw IoError("truncated PGM raster in " + path);
        for (std::size_t i = 0; i < img.size(); ++i)
            img[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    } else {
        std::vector<unsigned char> buf(img.size());
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!in) throw IoError("truncated PGM raster in " + path);
        for (std::size_t i = 0; i < img.size(); ++i) img[i] = buf[i];
    }
    return img;
}

void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << img.width << ' ' << img.height << '\n' << img.max_level() << '\n';
    if (img.depth > 8) {
        std::vector<unsigned char> buf(img.size() * 2);
        for (std::size_t i = 0; i < img.size(); ++i) {
            buf[2 * i] = static_cast<unsigned char>(img[i] >> 8);
            buf[2 * i + 1] = static_cast<unsigned char>(img[i] & 0xff);
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    } else {
        std::vector<unsigned char> buf(img.data.begin(), img.data.end());
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw IoError("write failed for " + path);
}

ColorImage read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    PnmHeader h = read_pnm_header(in);
    if (h.kind != '6' || h.maxval > 255) throw IoError(path + " is not an 8-bit PPM");
    ColorImage img(h.width, h.height);
    in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (!in) throw IoError("truncated PPM raster in " + path);
    return img;
}

void write_ppm(const std::string& path, const ColorImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (!out) throw IoError("write failed for " + path);
}

// --- png ------------------------------------------------------------------

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngPixels {
    int width = 0, height = 0, channels = 0, depth = 8;
    std::vector<std::uint16_t> samples;  // interleaved
};

PngPixels read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path);
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw IoError(path + " is not a PNG file");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed");
    }
    PngPixels px;
    std::vector<png_bytep> rows;
    std::vector<unsigned char> raw;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("corrupt PNG data in " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    int color = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // little-endian host order
    png_read_update_info(png, info);
    px.width = static_cast<int>(png_get_image_width(png, info));
    px.height = static_cast<int>(png_get_image_height(png, info));
    px.channels = png_get_channels(png, info);
    px.depth = png_get_bit_depth(png, info) == 16 ? 16 : 8;
    std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * px.height);
    rows.resize(px.height);
    for (int y = 0; y < px.height; ++y) rows[y] = raw.data() + rowbytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    std::size_t n = static_cast<std::size_t>(px.width) * px.height * px.channels;
    px.samples.resize(n);
    if (px.depth == 16) {
        for (std::size_t i = 0; i < n; ++i)
            px.samples[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
    } else {
        for (std::size_t i = 0; i < n; ++i) px.samples[i] = raw[i];
    }
    return px;
}

void write_png(const std::string& path, int w, int h, int channels, int depth,
               const std::vector<std::uint16_t>& samples) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }
    std::size_t bps = depth == 16 ? 2 : 1;
    std::size_t rowbytes = static_cast<std::size_t>(w) * channels * bps;
    std::vector<unsigned char> raw(rowbytes * h);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (depth == 16) {
            raw[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
            raw[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
        } else {
            raw[i] = static_cast<unsigned char>(samples[i]);
        }
    }
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = raw.data() + rowbytes * y;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed for " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, depth, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

GrayImage read_gray(const std::string& path) {
    const std::string ext = extension(path);
    if (ext == "pgm") return read_pgm(path);
    if (ext != "png") throw IoError("unsupported image format: " + path);
    PngPixels px = read_png(path);
    GrayImage img(px.width, px.height, px.depth);
    if (px.channels == 1) {
        for (std::size_t i = 0; i < img.size(); ++i) img[i] = px.samples[i];
    } else {
        // luma of an RGB file, rounded
        for (std::size_t i = 0; i < img.size(); ++i) {
            const auto* s = &px.samples[i * px.channels];
            img[i] = static_cast<std::uint16_t>(0.299 * s[0] + 0.587 * s[1] + 0.114 * s[2] + 0.5);
        }
    }
    return img;
}

void write_gray(const std::string& path, const GrayImage& img) {
    const std::string ext = extension(path);
    if (ext == "pgm") return write_pgm(path, img);
    if (ext != "png") throw IoError("unsupported image format: " + path);
    write_png(path, img.width, img.height, 1, img.depth > 8 ? 16 : 8, img.data);
}

BinaryMask read_mask(const std::string& path) {
    GrayImage g = read_gray(path);
    BinaryMask m(g.width, g.height);
    for (std::size_t i = 0; i < g.size(); ++i) m[i] = g[i] ? 1 : 0;
    return m;
}

void write_mask(const std::string& path, const BinaryMask& mask) {
    GrayImage g(mask.width, mask.height, 8);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = mask[i] ? 255 : 0;
    write_gray(path, g);
}

ColorImage read_color(const std::string& path) {
    const std::string ext = extension(path);
    if (ext == "ppm") return read_ppm(path);
    if (ext != "png") throw IoError("unsupported colour image format: " + path);
    PngPixels px = read_png(path);
    ColorImage img(px.width, px.height);
    const int shift = px.depth == 16 ? 8 : 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(px.width) * px.height; ++i) {
        for (int c = 0; c < 3; ++c) {
            const int src = px.channels >= 3 ? c : 0;
            img.rgb[i * 3 + c] = static_cast<std::uint8_t>(px.samples[i * px.channels + src] >> shift);
        }
    }
    return img;
}

void write_color(const std::string& path, const ColorImage& img) {
    const std::string ext = extension(path);
    if (ext == "ppm") return write_ppm(path, img);
    if (ext != "png") throw IoError("unsupported colour image format: " + path);
    std::vector<std::uint16_t> s(img.rgb.begin(), img.rgb.end());
    write_png(path, img.width, img.height, 3, 8, s);
}

void write_labels(const std::string& path, const LabelMap& labels) {
    GrayImage g(labels.width, labels.height, 16);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (labels[i] < 0 || labels[i] > 65535) throw IoError("label out of 16-bit range");
        g[i] = static_cast<std::uint16_t>(labels[i]);
    }
    write_gray(path, g);
}

}  // namespace medimg::io
