#pragma once

#include <vector>

#include "medimg/image.hpp"

namespace medimg {

struct StructuringElement {
    enum class Kind { Disk, Square, Diamond };
    Kind kind = Kind::Disk;
    int radius = 1;  // half-width for squares

    static StructuringElement disk(int r) { return {Kind::Disk, r}; }
    static StructuringElement square(int half) { return {Kind::Square, half}; }
    static StructuringElement diamond(int r) { return {Kind::Diamond, r}; }

    std::vector<Point> offsets() const;
};

struct ComponentFeatures {
    int label = 0;
    int area = 0;
    double cx = 0.0;
    double cy = 0.0;
    double eccentricity = 0.0;
    double extent = 0.0;
    Rect bbox;
};

enum class MorphOp { Erode, Dilate, Open, Close };
enum class DistanceMode { Exact, Chamfer5 };

// Linear remap of [min,max] onto [out_lo,out_hi], rounded. Constant images are returned unchanged.
GrayImage contrast_stretch(const GrayImage& img, int out_lo, int out_hi);

// Min-max normalisation to [0,1]. With a mask, statistics come from the masked pixels and
// unmasked pixels are 0. Constant input gives all zeros.
FloatImage normalize_unit(const GrayImage& img, const BinaryMask* mask = nullptr);
FloatImage normalize_unit(const FloatImage& img, const BinaryMask* mask = nullptr);

GrayImage stick_filter(const GrayImage& img, int length, int thickness);

// window = 0 selects max{5, 2*ceil(3*sigma_spatial)+1}.
GrayImage bilateral_filter(const GrayImage& img, double sigma_spatial, double sigma_range,
                           int window = 0);
int bilateral_window(double sigma_spatial);

GrayImage gaussian_blur(const GrayImage& img, double sigma);
FloatImage gaussian_blur(const FloatImage& img, double sigma);

// Grayscale morphology; the footprint is clipped at the image border.
GrayImage gray_erode(const GrayImage& img, const StructuringElement& se);
GrayImage gray_dilate(const GrayImage& img, const StructuringElement& se);
GrayImage gray_open(const GrayImage& img, const StructuringElement& se);
GrayImage white_tophat(const GrayImage& img, const StructuringElement& se);

BinaryMask morphology(const BinaryMask& mask, MorphOp op, const StructuringElement& se);
inline BinaryMask erode(const BinaryMask& m, const StructuringElement& se) {
    return morphology(m, MorphOp::Erode, se);
}
inline BinaryMask dilate(const BinaryMask& m, const StructuringElement& se) {
    return morphology(m, MorphOp::Dilate, se);
}
inline BinaryMask open(const BinaryMask& m, const StructuringElement& se) {
    return morphology(m, MorphOp::Open, se);
}
inline BinaryMask close(const BinaryMask& m, const StructuringElement& se) {
    return morphology(m, MorphOp::Close, se);
}

LabelMap connected_components(const BinaryMask& mask, Connectivity conn = Connectivity::Eight);
std::vector<int> component_areas(const LabelMap& labels);  // index 0 unused
BinaryMask label_mask(const LabelMap& labels, int label);
BinaryMask remove_small(const BinaryMask& mask, int min_area,
                        Connectivity conn = Connectivity::Eight);
BinaryMask fill_holes(const BinaryMask& mask);
BinaryMask convex_hull(const BinaryMask& mask);

// Distance to the nearest background pixel centre; pixels outside the image count as background.
FloatImage distance_transform(const BinaryMask& mask, DistanceMode mode = DistanceMode::Exact);

BinaryMask regional_maxima(const GrayImage& img, const StructuringElement& se);

// Priority flooding from markers; ties are resolved first-in first-out.
LabelMap watershed(const FloatImage& relief, const LabelMap& markers,
                   Connectivity conn = Connectivity::Four);
LabelMap watershed(const GrayImage& relief, const LabelMap& markers,
                   Connectivity conn = Connectivity::Four);

// lo/hi are fractions of the maximum gradient magnitude.
BinaryMask canny_edges(const GrayImage& img, double sigma, double lo, double hi);

// Absolute response of the 4-neighbour 3x3 Laplacian, replicate padding.
FloatImage laplacian_magnitude(const GrayImage& img);

ComponentFeatures shape_features(const LabelMap& labels, int label);
std::vector<ComponentFeatures> all_features(const LabelMap& labels);  // one entry per label

}  // namespace medimg
