#pragma once

#include <vector>

#include "medimg/image.hpp"

namespace medimg::colony {

struct LuvImage {
    FloatImage L, u, v;
};

LuvImage rgb_to_luv(const ColorImage& img);

struct WellCircle {
    double x = 0.0;
    double y = 0.0;
    double r = 0.0;
    double strength = 0.0;  // fraction of the perimeter supported by edge votes
};

struct WellDetectConfig {
    double sensitivity = 0.98;
    double escalated_sensitivity = 0.99;
    double canny_sigma = 1.5;
    double canny_lo = 0.1;
    double canny_hi = 0.2;
};

struct WellDetection {
    std::vector<WellCircle> wells;  // sorted by decreasing strength
    bool ok = false;
    double sensitivity = 0.0;  // the sensitivity of the last pass
    std::size_t candidates = 0;
};

// Accumulator peaks are accepted above (1 - sensitivity) * 20.
double acceptance_threshold(double sensitivity);

// Candidates for a single sensitivity, strongest first.
std::vector<WellCircle> find_circles(const GrayImage& lightness, double radius, double sensitivity,
                                     const WellDetectConfig& cfg = {});

WellDetection detect_wells(const ColorImage& plate, double radius, int n_wells, const WellDetectConfig& cfg = {});

// Row-major order; wells whose y differs by at most r/2 share a row.
std::vector<WellCircle> order_wells(std::vector<WellCircle> wells);

// Stain darkness from u*: 255 - clamp(3 * max(u*, 0)). Violet stain has positive u*.
GrayImage stain_image(const ColorImage& plate);

enum class Masking { White, Black };

// Full-size mask of the colonies inside `well`.
BinaryMask extract_colonies(const ColorImage& plate, const WellCircle& well, Masking masking = Masking::White);
BinaryMask extract_colonies(const GrayImage& stain, const WellCircle& well, Masking masking = Masking::White);

BinaryMask circle_mask(int width, int height, const WellCircle& well);

double acc(const BinaryMask& mask, const WellCircle& well);

double surviving_fraction(double acc_treated, double acc_untreated);

enum class SfConvention { Printed, Standard };

double plating_efficiency(double colonies_control, double plated_control);
double conventional_sf(double colonies_treated, double plated_treated, double colonies_control,
                       double plated_control, SfConvention conv = SfConvention::Printed);

}  // namespace medimg::colony
