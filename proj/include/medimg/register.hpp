#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "medimg/image.hpp"

namespace medimg::reg {

using Matrix3 = std::array<double, 9>;  // row-major

// Affine map about a centre c: x' = T(c + t) R Sh S T(-c) x.
struct AffineTransform2D {
    double tx = 0, ty = 0;
    double rotation = 0;  // radians
    double scale_x = 1, scale_y = 1;
    double shear = 0;

    static AffineTransform2D from_params(const std::vector<double>& p);  // tx, ty, rot, sx, sy, shear
    std::vector<double> params() const;
    Matrix3 matrix(double cx, double cy) const;
    void validate() const;
};

Matrix3 invert(const Matrix3& m);  // throws AlgorithmError when singular

void save_transform(std::ostream& os, const AffineTransform2D& t, double cx, double cy);
AffineTransform2D load_transform(std::istream& is);
void save_transform(const std::string& path, const AffineTransform2D& t, double cx, double cy);
AffineTransform2D load_transform(const std::string& path);

enum class Interp { Nearest, Bilinear, Cubic };

// Samples img at the inverse image of every output pixel. valid marks samples inside the domain.
struct Resampled {
    FloatImage values;
    BinaryMask valid;
};
Resampled resample(const GrayImage& img, const AffineTransform2D& t, Interp interp);
GrayImage apply_transform(const GrayImage& img, const AffineTransform2D& t, Interp interp = Interp::Bilinear);

struct JointHistogram {
    int bins = 0;
    std::vector<double> counts;  // row = bin of A, column = bin of B
    double total = 0;

    double at(int a, int b) const { return counts[static_cast<std::size_t>(a) * bins + b]; }
    std::vector<double> marginal_a() const;
    std::vector<double> marginal_b() const;
};

// Values are binned over [0, max_level]; only pixels where overlap is set (or all) contribute.
JointHistogram joint_histogram(const GrayImage& a, const GrayImage& b, int bins, const BinaryMask* overlap = nullptr);
JointHistogram joint_histogram(const FloatImage& a, const FloatImage& b, int bins, double max_level,
                               const BinaryMask* overlap = nullptr);
JointHistogram smooth(const JointHistogram& h, double sigma_bins = 1.0);

double entropy_a(const JointHistogram& h);
double entropy_b(const JointHistogram& h);
double joint_entropy(const JointHistogram& h);
double mutual_information(const JointHistogram& h);
double normalized_mi(const JointHistogram& h);
double mutual_information(const GrayImage& a, const GrayImage& b, int bins);
double normalized_mi(const GrayImage& a, const GrayImage& b, int bins);

enum class PsoVariant { Standard, InitialOrientation, Hybrid, Subpopulation, Decaying };

struct PsoConfig {
    int particles = 30;
    double w = 0.7298;
    double c_soc = 1.49618;
    double c_cog = 1.49618;
    double c_ret = 0.0;  // initial-orientation attractor; the starting value for Decaying
    bool chi_mode = false;
    double kappa = 1.0;
    double p_c = 0.0;  // crossover rate for Hybrid and Subpopulation
    int subpopulations = 5;
    int t_max = 200;
    int t_no_improve = 20;
    double epsilon = 0.0;
    PsoVariant variant = PsoVariant::Standard;
    std::uint64_t seed = 1;
    std::vector<double> lower, upper;
    std::vector<double> v_max;   // empty: 0.2 of each range
    std::vector<double> x_init;  // empty: centre of the bounds
    double init_spread = 1.0;    // fraction of the half-range around x_init used for the initial swarm

    void validate() const;
};

struct Particle {
    std::vector<double> x, v, best;
    double value = 0, best_value = 0;
};

struct PsoResult {
    std::vector<double> g;
    double value = 0;
    int iterations = 0;
    std::vector<double> trace;  // global best value after initialisation and after every iteration
    bool stagnated = false;
};

using Objective = std::function<double(const std::vector<double>&)>;
using SwarmObserver = std::function<void(int iteration, const std::vector<Particle>& swarm)>;

double constriction(double phi, double kappa);

PsoResult pso_optimize(const Objective& f, const PsoConfig& cfg, const SwarmObserver& observer = {});

// Cyclic coordinate descent with golden-section line searches inside the bounds.
struct RefineConfig {
    double initial_step = 0.05;  // fraction of each range
    double tolerance = 0.005;    // stop when a full cycle improves the objective by less
    int max_cycles = 50;
};
std::vector<double> refine_coordinate_descent(const Objective& f, std::vector<double> x, const std::vector<double>& lower,
                                              const std::vector<double>& upper, const RefineConfig& cfg = {});

enum class Metric { MI, NMI };
enum class Refine { None, CoordinateDescent };

struct RegisterConfig {
    Metric metric = Metric::MI;
    int bins = 64;
    bool smooth_histogram = true;
    Interp interp = Interp::Bilinear;
    Refine refine = Refine::CoordinateDescent;
    RefineConfig refine_cfg;
    PsoConfig pso = default_pso();

    // bounds: t +-20 px, rotation +-20 deg, scales 0.9..1.1, shear +-0.1
    static PsoConfig default_pso();
};

struct RegisterResult {
    AffineTransform2D transform;
    double metric = 0;
    PsoResult pso;
};

// Similarity of the transformed moving image against the fixed image over their overlap.
double similarity(const GrayImage& moving, const GrayImage& fixed, const AffineTransform2D& t, const RegisterConfig& cfg);

RegisterResult register_images(const GrayImage& moving, const GrayImage& fixed, const RegisterConfig& cfg = {});

}  // namespace medimg::reg
