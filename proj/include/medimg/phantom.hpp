#pragma once

#include <cstdint>
#include <vector>

#include "medimg/colony.hpp"
#include "medimg/image.hpp"
#include "medimg/register.hpp"

// Seeded synthetic images with exact ground truth.
namespace medimg::phantom {

struct BlobPhantom {
    GrayImage image;
    BinaryMask truth;
    BinaryMask roi;
    Rect bbox;  // truth bounding box grown by a margin
};

struct BlobParams {
    int size = 128;
    double fg_mean = 180, bg_mean = 60, noise_sd = 8;
    double radius_min = 18, radius_max = 28;
    bool dark_target = false;  // dark target inside a bright ROI, for the fibroid pipeline
    double roi_margin = 14;
};
BlobPhantom bimodal_blob(std::uint64_t seed, const BlobParams& p = {});

// Pseudo-spherical bright lesion, optionally with a dark core, on a dark background.
BlobPhantom gtv_blob(std::uint64_t seed, bool dark_core);

// Gaussian-mixture image with two pixel classes (truth = class 2).
struct MixtureParams {
    int size = 96;
    double mu1 = 95, mu2 = 125, sd1 = 9, sd2 = 9;
};
BlobPhantom bimodal_mixture(std::uint64_t seed, const MixtureParams& p = {});

struct ProstatePhantom {
    GrayImage t2, t1;
    BinaryMask roi, truth;
};
ProstatePhantom prostate(std::uint64_t seed, int size = 96);

struct PlatePhantom {
    ColorImage image;
    std::vector<colony::WellCircle> wells;  // row-major truth
    std::vector<double> coverage;           // covered fraction of each well
    double radius = 0;
};
struct PlateParams {
    int wells = 6;  // 6 (2x3), 12 (3x4) or 24 (4x6)
    double dx = 0, dy = 0, angle_deg = 0;
    double noise_sd = 3;
    bool half_covered = false;  // every well stained on its left half, centres on half-integer x
};
PlatePhantom plate(std::uint64_t seed, const PlateParams& p = {});

struct NucleiPhantom {
    GrayImage image;
    LabelMap truth;
    std::vector<std::pair<int, int>> pairs;  // label pairs that overlap
};
struct NucleiParams {
    int size = 512;
    int count = 50;
    double radius_min = 6, radius_max = 12;
    double gap = 6;
    bool overlapping_pairs = false;  // count becomes the number of pairs
    double max_overlap = 0.3;        // overlap depth relative to the smaller radius
};
NucleiPhantom nuclei(std::uint64_t seed, const NucleiParams& p = {});

struct RegisterPair {
    GrayImage moving, fixed;
    reg::AffineTransform2D truth;  // apply_transform(moving, truth) matches fixed
};
RegisterPair register_pair(std::uint64_t seed, const reg::AffineTransform2D& t, int size = 112);

}  // namespace medimg::phantom
