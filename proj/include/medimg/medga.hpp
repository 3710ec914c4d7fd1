#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "medimg/image.hpp"
#include "medimg/threshold.hpp"

namespace medimg::medga {

using Rng = std::mt19937_64;

struct Individual {
    std::vector<int> genes;  // ascending, values in [1, lmax]
    double fitness = 0.0;
};

struct FitnessTerms {
    double tau1 = 0.0, tau2 = 0.0, tau3 = 0.0;
    double theta = 0.0, mu1 = 0.0, mu2 = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;
    double omega1 = 0.0, omega2 = 0.0;
    double total() const { return tau1 + tau2 + tau3; }
};

// The histogram problem an individual is scored against: populated input levels in ascending
// order with their frequencies, and the largest representable output level.
struct InputHistogram {
    std::vector<int> levels;
    std::vector<double> freq;
    int lmax = 255;  // top of the extended range: the observed ROI maximum
};

struct MedGaConfig {
    int population = 100;
    double p_crossover = 0.9;
    double p_mutation = 0.01;
    int tournament = 20;
    int generations = 100;
    std::uint64_t seed = 1;
    double iots_eps = 0.5;
};

threshold::Histogram induced_histogram(const Individual& ind, const InputHistogram& in);

// Throws AlgorithmError when the induced histogram has a single populated level.
FitnessTerms fitness(const Individual& ind, const InputHistogram& in, double iots_eps = 0.5);
// Same, but a degenerate individual scores +infinity.
double fitness_value(const Individual& ind, const InputHistogram& in, double iots_eps = 0.5);

// k draws with replacement; the lowest fitness wins, ties go to the earliest draw.
const Individual& tournament_select(const std::vector<Individual>& pop, int k, Rng& rng);

// cp is 1-based in [1, n]. Offspring are re-sorted.
std::pair<Individual, Individual> crossover_at(const Individual& p1, const Individual& p2, int cp);
std::pair<Individual, Individual> crossover(const Individual& p1, const Individual& p2, Rng& rng);

// Genes below theta are redrawn from [min gene, ceil(theta)-1], the others from
// [ceil(theta), max gene]. Result is re-sorted.
Individual mutate(const Individual& ind, double p_m, double theta, Rng& rng);

struct MedGaResult {
    GrayImage enhanced;  // roi pixels remapped, everything else 0
    Individual best;
    InputHistogram input;
    GrayImage prepared;  // roi stretched to [1, lmax], 0 outside
    std::vector<double> best_history;  // best fitness after each generation (index 0: initial)
};

// Optional per-generation hook, used by tests to check population invariants.
using GenerationHook = void (*)(int generation, const std::vector<Individual>& pop, void* ctx);

MedGaResult medga_run(const GrayImage& img, const BinaryMask& roi, const MedGaConfig& cfg = {},
                      GenerationHook hook = nullptr, void* ctx = nullptr);

enum class BaselineKind { HE, BiHE, Gamma, Sigmoid };

struct Baseline {
    BaselineKind kind = BaselineKind::HE;
    double param = 1.0;  // gamma for Gamma, lambda for Sigmoid
};

GrayImage baseline_enhance(const GrayImage& img, const Baseline& b);

enum class PostProc { Fibroid, Brain };

struct SegmentResult {
    BinaryMask mask;
    MedGaResult ga;
    double theta = 0.0;
};

SegmentResult medga_segment(const GrayImage& img, const BinaryMask& roi, const MedGaConfig& cfg,
                            PostProc post);

}  // namespace medimg::medga
