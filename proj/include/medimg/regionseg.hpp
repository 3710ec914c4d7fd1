#pragma once

#include <vector>

#include "medimg/image.hpp"

namespace medimg::region {

struct SplitMergeConfig {
    double mean_lo = 0.0;
    double mean_hi = 0.58;
    int rho_min = 4;  // side of the smallest quadrant
};

struct SeedCleanupConfig {
    int open_radius = 1;          // diamond
    int edge_dilate = 3;          // square half-width applied to the ROI edge
    double max_edge_fraction = 0.5;  // drop a component when |C & edge| > fraction * |C|
};

struct GrowConfig {
    int erode_radius = 1;  // applied to seed regions before growing (disk)
    int sample_step = 5;   // one seed-point every `sample_step` edge pixels
};

struct FibroidConfig {
    SplitMergeConfig split;
    SeedCleanupConfig cleanup;
    GrowConfig grow;
};

struct GrowStep {
    Point p;
    double value = 0.0;
    double mean = 0.0;       // mean of the region when p was tested
    double threshold = 0.0;  // theta_opt - mean at that time
};

// `img` must already be normalised to [0,1]. Pixels outside the image after padding to a
// power-of-two square count as 1.0, which never satisfies the predicate. With `roi`, quad
// means are taken over ROI pixels only and quads without ROI pixels fail.
BinaryMask split_and_merge(const FloatImage& img, const SplitMergeConfig& cfg = {},
                           const BinaryMask* roi = nullptr);

BinaryMask seed_cleanup(const BinaryMask& sm_mask, const BinaryMask& roi,
                        const SeedCleanupConfig& cfg = {});

// Multi-seeded growth: each 8-connected seed component grows independently from sampled
// edge points and the union is returned. With `roi`, growth never leaves the ROI.
// `trace` receives every accepted pixel in acceptance order.
BinaryMask region_growing(const FloatImage& img, const BinaryMask& seeds, double theta_opt,
                          const GrowConfig& cfg = {}, const BinaryMask* roi = nullptr,
                          std::vector<GrowStep>* trace = nullptr);

// Reference variant: one seed pixel per component (its first pixel in raster order).
BinaryMask region_growing_single(const FloatImage& img, const BinaryMask& seeds, double theta_opt,
                                 const BinaryMask* roi = nullptr);

BinaryMask fibroid_pipeline(const GrayImage& img, const BinaryMask& uterus_roi,
                            const FibroidConfig& cfg = {});

}  // namespace medimg::region
