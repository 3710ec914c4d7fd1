#pragma once

#include <cstdint>
#include <vector>

#include "medimg/image.hpp"

namespace medimg::cluster {

struct FeatureMatrix {
    int n = 0;  // samples
    int d = 0;  // features per sample
    std::vector<double> values;  // row-major n x d

    FeatureMatrix() = default;
    FeatureMatrix(int samples, int dims) : n(samples), d(dims), values(static_cast<std::size_t>(samples) * dims) {}
    double& at(int k, int j) { return values[static_cast<std::size_t>(k) * d + j]; }
    double at(int k, int j) const { return values[static_cast<std::size_t>(k) * d + j]; }
};

struct FuzzyPartition {
    int c = 0;
    int n = 0;
    int d = 0;
    std::vector<double> u;  // c x n memberships
    std::vector<double> v;  // c x d centroids
    std::vector<double> j_history;
    int iterations = 0;

    double membership(int i, int k) const { return u[static_cast<std::size_t>(i) * n + k]; }
    double centroid(int i, int j = 0) const { return v[static_cast<std::size_t>(i) * d + j]; }
};

struct FcmConfig {
    int clusters = 2;
    double m = 2.0;
    double eps = 1e-6;
    int max_iter = 300;
    std::uint64_t seed = 1;
};

enum class Select { Brightest, Darkest, Index };

FuzzyPartition fcm(const FeatureMatrix& data, const FcmConfig& cfg);

// argmax_i u_ik per sample; ties keep the lower index
std::vector<int> hard_labels(const FuzzyPartition& part);

// Centroid ordering uses the sum of centroid coordinates; ties keep the lower index.
int select_cluster(const FuzzyPartition& part, Select sel, int index = 0);

// pixel_index[k] is the raster index of sample k.
BinaryMask defuzzify(const FuzzyPartition& part, int cluster, const std::vector<int>& pixel_index,
                     int width, int height);

struct GtvConfig {
    FcmConfig fcm{2, 2.0, 1e-6, 300, 1};
    int min_area = 10;
};

struct GtvResult {
    BinaryMask pre_hull;  // brightest cluster after small-area removal
    BinaryMask mask;      // convex hull of pre_hull
};

GtvResult gtv_pipeline(const GrayImage& img, const BinaryMask& roi, const GtvConfig& cfg = {});

BinaryMask necrosis_inclusion(const GrayImage& img, const BinaryMask& roi, const BinaryMask& pre_hull,
                              const BinaryMask& post_hull, const FcmConfig& cfg = {3, 2.0, 1e-6, 300, 1});

struct NextConfig {
    FcmConfig fcm{2, 2.0, 1e-6, 300, 1};
    int large_area = 80;  // erosion radius 2 above this area, 1 otherwise
    int min_area = 5;
};

BinaryMask next_pipeline(const GrayImage& img, const BinaryMask& gtv, const NextConfig& cfg = {});
int next_erosion_radius(std::size_t gtv_area, int large_area = 80);

struct ProstateConfig {
    FcmConfig fcm{3, 2.0, 1e-6, 300, 1};
    int stick_length = 5;
    int stick_thickness = 1;
    int min_area = 500;
    int open_square = 2;  // half-width: 5x5
    int final_open_disk = 3;
    double centre_fraction = 0.125;  // radius of the central voting window relative to the ROI box
    bool use_t1 = true;               // false runs the single-channel variant
};

BinaryMask prostate_pipeline(const GrayImage& t2, const GrayImage& t1, const BinaryMask& roi,
                             const ProstateConfig& cfg = {});

}  // namespace medimg::cluster
