#pragma once

#include <functional>
#include <string>
#include <vector>

#include "medimg/image.hpp"

namespace medimg::graph {

struct SeedSet {
    std::vector<Point> fg;
    std::vector<Point> bg;
};

// Throws ConfigError when a class is empty, a seed is outside w x h, or the classes overlap.
void validate_seeds(const SeedSet& seeds, int width, int height);

SeedSet adaptive_seeds(int crop_w, int crop_h);

enum class Similarity { IFD, GM };

struct CaState {
    int width = 0, height = 0;
    std::vector<std::uint8_t> label;  // 0 unlabeled, 1 foreground, 2 background
    std::vector<double> strength;
    int iterations = 0;
};

struct CaConfig {
    Similarity similarity = Similarity::GM;
    int max_iter = 0;  // 0: 4*w*h + 100
};

// Synchronous GrowCut-style automaton. The observer, if set, sees the state after every step.
CaState ca_run(const FloatImage& img, const SeedSet& seeds, const CaConfig& cfg = {},
               const std::function<void(const CaState&)>& observer = {});
BinaryMask ca_grow(const FloatImage& img, const SeedSet& seeds, Similarity sim = Similarity::GM);
double ca_similarity(Similarity sim, double cp, double cq, double max_abs);

// The crop is stretched to 0..255 before the automaton runs.
BinaryMask gtvcut_pipeline(const GrayImage& img, const Rect& bbox, Similarity sim = Similarity::GM);

struct RwGraph {
    int width = 0, height = 0;
    double beta = 90.0;
    std::vector<double> wh;  // edge (x,y)-(x+1,y) at y*(width-1)+x
    std::vector<double> wv;  // edge (x,y)-(x,y+1) at y*width+x

    int nodes() const { return width * height; }
    double& right(int x, int y) { return wh[static_cast<std::size_t>(y) * (width - 1) + x]; }
    double& down(int x, int y) { return wv[static_cast<std::size_t>(y) * width + x]; }
    double right(int x, int y) const { return wh[static_cast<std::size_t>(y) * (width - 1) + x]; }
    double down(int x, int y) const { return wv[static_cast<std::size_t>(y) * width + x]; }
    // Calls f(neighbour index, weight) for the 4-neighbours of node i.
    template <class F>
    void for_each_edge(int i, F&& f) const {
        const int x = i % width, y = i / width;
        if (x > 0) f(i - 1, right(x - 1, y));
        if (x + 1 < width) f(i + 1, right(x, y));
        if (y > 0) f(i - width, down(x, y - 1));
        if (y + 1 < height) f(i + width, down(x, y));
    }
};

// Values are min-max normalised to [0,1] first; w = exp(-beta * diff^2).
RwGraph rw_build(const FloatImage& values, double beta = 90.0);
RwGraph rw_build(const GrayImage& img, double beta = 90.0);

FloatImage suv_convert(const FloatImage& activity, double injected_dose, double weight);

enum class RwSolver { Auto, CG, Dense };

struct RwOptions {
    double threshold = 0.5;
    RwSolver solver = RwSolver::Auto;  // Auto: CG, dense fallback below 1e4 unknowns
    double tolerance = 1e-10;
};

struct RwResult {
    FloatImage probability;  // foreground probability
    BinaryMask mask;         // probability >= threshold
    std::string solver;      // "cg" or "dense"
    int iterations = 0;
};

RwResult random_walker(const RwGraph& graph, const SeedSet& seeds, const RwOptions& opt = {});

struct RwWeightedConfig {
    double gain_in = 1.1;
    double gain_out = 0.9;
    double beta = 90.0;
    RwOptions rw;
};

RwResult rw_weighted(const FloatImage& pet, const BinaryMask& mri_mask, const SeedSet& seeds,
                     const RwWeightedConfig& cfg = {});

}  // namespace medimg::graph
