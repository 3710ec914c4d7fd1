#pragma once

#include <vector>

#include "medimg/image.hpp"
#include "medimg/imgcore.hpp"

namespace medimg::acdc {

struct AcdcConfig {
    double sigma_spatial = 1.0;  // range sigma is the global std of the input
    int tophat_radius = 21;
    int min_area = 40;
    int open_radius = 1;
    int close_radius = 2;
    int maxima_half = 2;  // 5x5 window
    int marker_dilate = 3;
    DistanceMode edt_mode = DistanceMode::Chamfer5;
};

struct Markers {
    LabelMap markers;
    BinaryMask cells;
};

struct CellReport {
    int count = 0;
    LabelMap labels;
    std::vector<ComponentFeatures> cells;  // one entry per label, in label order
};

GrayImage acdc_preprocess(const GrayImage& img, const AcdcConfig& cfg = {});

// Throws AlgorithmError when thresholding finds no foreground.
Markers acdc_markers(const GrayImage& pre, const AcdcConfig& cfg = {});

CellReport acdc_segment(const GrayImage& img, const AcdcConfig& cfg = {});

double count_correlation(const std::vector<double>& automatic, const std::vector<double>& manual);

}  // namespace medimg::acdc
