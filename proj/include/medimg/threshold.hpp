#pragma once

#include <vector>

#include "medimg/image.hpp"

namespace medimg::threshold {

struct Histogram {
    std::vector<double> bins;  // frequency per gray level
    double total = 0.0;

    int levels() const { return static_cast<int>(bins.size()); }
    static Histogram from_counts(std::vector<double> counts);
};

struct ThresholdResult {
    double theta = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    int iterations = 0;
};

enum class Polarity { Above, Below };

// L = 2^depth levels; restricted to mask foreground when a mask is given.
Histogram histogram(const GrayImage& img, const BinaryMask* mask = nullptr);

// Class 1 holds levels r <= floor(theta), class 2 the rest.
ThresholdResult iots(const Histogram& hist, double eps_tol = 0.5, int max_iter = 100);
ThresholdResult otsu(const Histogram& hist);

// Class means for a split at floor(theta); NaN for an empty class.
std::pair<double, double> class_means(const Histogram& hist, double theta);

int local_window(int pixels);  // 2*floor(pixels/16)+1, at least 3
BinaryMask local_adaptive_threshold(const GrayImage& img, Polarity polarity);

// Above: I > theta. Below: I <= theta.
BinaryMask binarize(const GrayImage& img, double theta, Polarity polarity);

}  // namespace medimg::threshold
