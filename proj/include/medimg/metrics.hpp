#pragma once

#include <vector>

#include "medimg/image.hpp"

namespace medimg::metrics {

// Percentages. A value whose denominator is empty is NaN.
struct OverlapMetrics {
    double dsc = 0, ji = 0, sen = 0, spc = 0, fpr = 0, fnr = 0;
};

struct DistanceMetrics {
    double avg_d = 0, max_d = 0, hd = 0, mhd = 0;
};

struct VolumeMetrics {
    double avd = 0, vs = 0;
};

struct EnhancementMetrics {
    double psnr = 0;  // +infinity when the images match after remapping
    bool psnr_saturated = false;
    long num_edges = 0;
    double ambe = 0;
    double ssim = 0;
};

struct EnhancementOptions {
    bool remap = true;  // map the enhanced range onto the original range first
    double canny_sigma = 1.0;
    double canny_lo = 0.1;
    double canny_hi = 0.2;
    int ssim_window = 8;
};

OverlapMetrics overlap_metrics(const BinaryMask& seg, const BinaryMask& gold);

// Foreground pixels with at least one 4-neighbour in the background (outside counts as background).
BinaryMask inner_boundary(const BinaryMask& mask);

// Boundary distances from seg to gold plus the symmetric Hausdorff distance; MHD over the full
// pixel sets with the pooled covariance. Throws ConfigError on an empty mask.
DistanceMetrics distance_metrics(const BinaryMask& seg, const BinaryMask& gold);
double hausdorff(const BinaryMask& a, const BinaryMask& b);
double mahalanobis_distance(const BinaryMask& a, const BinaryMask& b);

VolumeMetrics volume_metrics(const BinaryMask& seg, const BinaryMask& gold);
VolumeMetrics volume_metrics(const std::vector<BinaryMask>& seg, const std::vector<BinaryMask>& gold);

FloatImage remap_to(const GrayImage& enh, const GrayImage& orig);

// Mean of the local SSIM over all window positions (stride 1); L is the dynamic range.
double ssim(const FloatImage& x, const FloatImage& y, double dynamic_range, int window = 8);

EnhancementMetrics enhancement_metrics(const GrayImage& orig, const GrayImage& enh,
                                       const EnhancementOptions& opt = {});

double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace medimg::metrics
