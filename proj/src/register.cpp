#include "medimg/register.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace medimg::reg {

namespace {

Matrix3 mul(const Matrix3& a, const Matrix3& b) {
    Matrix3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
    return r;
}

Matrix3 translation(double x, double y) { return {1, 0, x, 0, 1, y, 0, 0, 1}; }

double xlogx_sum(const std::vector<double>& c, double total) {
    double h = 0.0;
    for (double v : c)
        if (v > 0) {
            const double p = v / total;
            h -= p * std::log(p);
        }
    return h;
}

int bin_of(double v, int bins, double max_level) {
    const int b = static_cast<int>(std::floor(v * bins / (max_level + 1.0)));
    return std::clamp(b, 0, bins - 1);
}

double keys(double t) {
    constexpr double a = -0.5;
    t = std::abs(t);
    if (t <= 1) return ((a + 2) * t - (a + 3)) * t * t + 1;
    if (t < 2) return ((a * t - 5 * a) * t + 8 * a) * t - 4 * a;
    return 0.0;
}

}  // namespace

AffineTransform2D AffineTransform2D::from_params(const std::vector<double>& p) {
    if (p.size() != 6) throw ConfigError("transform: expected 6 parameters");
    AffineTransform2D t{p[0], p[1], p[2], p[3], p[4], p[5]};
    t.validate();
    return t;
}

std::vector<double> AffineTransform2D::params() const { return {tx, ty, rotation, scale_x, scale_y, shear}; }

void AffineTransform2D::validate() const {
    if (!(scale_x > 0) || !(scale_y > 0)) throw ConfigError("transform: scales must be positive");
    for (double v : params())
        if (!std::isfinite(v)) throw ConfigError("transform: non-finite parameter");
}

Matrix3 AffineTransform2D::matrix(double cx, double cy) const {
    const double c = std::cos(rotation), s = std::sin(rotation);
    const Matrix3 R{c, -s, 0, s, c, 0, 0, 0, 1};
    const Matrix3 Sh{1, shear, 0, 0, 1, 0, 0, 0, 1};
    const Matrix3 S{scale_x, 0, 0, 0, scale_y, 0, 0, 0, 1};
    return mul(mul(mul(mul(translation(cx + tx, cy + ty), R), Sh), S), translation(-cx, -cy));
}

Matrix3 invert(const Matrix3& m) {
    const double det = m[0] * m[4] - m[1] * m[3];
    if (std::abs(det) < 1e-12) throw AlgorithmError("transform: singular matrix");
    Matrix3 r{};
    r[0] = m[4] / det;
    r[1] = -m[1] / det;
    r[3] = -m[3] / det;
    r[4] = m[0] / det;
    r[2] = -(r[0] * m[2] + r[1] * m[5]);
    r[5] = -(r[3] * m[2] + r[4] * m[5]);
    r[8] = 1;
    return r;
}

void save_transform(std::ostream& os, const AffineTransform2D& t, double cx, double cy) {
    const Matrix3 m = t.matrix(cx, cy);
    os << std::setprecision(17);
    os << "matrix\n";
    for (int i = 0; i < 3; ++i) os << m[i * 3] << ' ' << m[i * 3 + 1] << ' ' << m[i * 3 + 2] << '\n';
    os << "center " << cx << ' ' << cy << '\n';
    os << "params " << t.tx << ' ' << t.ty << ' ' << t.rotation * 180.0 / std::numbers::pi << ' ' << t.scale_x << ' '
       << t.scale_y << ' ' << t.shear << '\n';
}

AffineTransform2D load_transform(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key != "params") continue;
        std::vector<double> p(6);
        for (double& v : p)
            if (!(ls >> v)) throw IoError("transform file: malformed params line");
        p[2] *= std::numbers::pi / 180.0;
        return AffineTransform2D::from_params(p);
    }
    throw IoError("transform file: missing params line");
}

void save_transform(const std::string& path, const AffineTransform2D& t, double cx, double cy) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    save_transform(f, t, cx, cy);
    if (!f) throw IoError("cannot write " + path);
}

AffineTransform2D load_transform(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    return load_transform(f);
}

Resampled resample(const GrayImage& img, const AffineTransform2D& t, Interp interp) {
    validate(img);
    t.validate();
    const int w = img.width, h = img.height;
    const Matrix3 inv = invert(t.matrix((w - 1) / 2.0, (h - 1) / 2.0));
    Resampled out{FloatImage(w, h), BinaryMask(w, h)};
    constexpr double tol = 1e-9;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double sx = inv[0] * x + inv[1] * y + inv[2];
            const double sy = inv[3] * x + inv[4] * y + inv[5];
            const std::size_t o = static_cast<std::size_t>(y) * w + x;
            if (interp == Interp::Nearest) {
                const double rx = std::floor(sx + 0.5), ry = std::floor(sy + 0.5);
                if (rx < 0 || ry < 0 || rx > w - 1 || ry > h - 1) continue;
                out.values[o] = img.at(static_cast<int>(rx), static_cast<int>(ry));
                out.valid[o] = 1;
                continue;
            }
            if (sx < -tol || sy < -tol || sx > w - 1 + tol || sy > h - 1 + tol) continue;
            const double cx = std::clamp(sx, 0.0, w - 1.0), cy = std::clamp(sy, 0.0, h - 1.0);
            const int x0 = static_cast<int>(std::floor(cx)), y0 = static_cast<int>(std::floor(cy));
            const double fx = cx - x0, fy = cy - y0;
            double v = 0.0;
            if (interp == Interp::Bilinear) {
                const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
                v = (1 - fy) * ((1 - fx) * img.at(x0, y0) + fx * img.at(x1, y0)) +
                    fy * ((1 - fx) * img.at(x0, y1) + fx * img.at(x1, y1));
            } else {
                for (int j = -1; j <= 2; ++j) {
                    const double wy = keys(fy - j);
                    if (wy == 0.0) continue;
                    const int yy = std::clamp(y0 + j, 0, h - 1);
                    double row = 0.0;
                    for (int i = -1; i <= 2; ++i) {
                        const double wx = keys(fx - i);
                        if (wx != 0.0) row += wx * img.at(std::clamp(x0 + i, 0, w - 1), yy);
                    }
                    v += wy * row;
                }
            }
            out.values[o] = v;
            out.valid[o] = 1;
        }
    return out;
}

GrayImage apply_transform(const GrayImage& img, const AffineTransform2D& t, Interp interp) {
    const Resampled r = resample(img, t, interp);
    GrayImage out(img.width, img.height, img.depth, 0);
    const double top = img.max_level();
    for (std::size_t i = 0; i < out.size(); ++i)
        if (r.valid[i]) out[i] = static_cast<std::uint16_t>(std::clamp(std::floor(r.values[i] + 0.5), 0.0, top));
    return out;
}

std::vector<double> JointHistogram::marginal_a() const {
    std::vector<double> m(bins, 0.0);
    for (int a = 0; a < bins; ++a)
        for (int b = 0; b < bins; ++b) m[a] += at(a, b);
    return m;
}

std::vector<double> JointHistogram::marginal_b() const {
    std::vector<double> m(bins, 0.0);
    for (int a = 0; a < bins; ++a)
        for (int b = 0; b < bins; ++b) m[b] += at(a, b);
    return m;
}

JointHistogram joint_histogram(const FloatImage& a, const FloatImage& b, int bins, double max_level,
                               const BinaryMask* overlap) {
    if (!a.same_shape(b)) throw ConfigError("joint_histogram: image sizes differ");
    if (overlap && !overlap->same_shape(a)) throw ConfigError("joint_histogram: overlap size differs");
    if (bins < 1) throw ConfigError("joint_histogram: bins must be >= 1");
    JointHistogram h;
    h.bins = bins;
    h.counts.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (overlap && !(*overlap)[i]) continue;
        h.counts[static_cast<std::size_t>(bin_of(a[i], bins, max_level)) * bins + bin_of(b[i], bins, max_level)] += 1.0;
        h.total += 1.0;
    }
    return h;
}

JointHistogram joint_histogram(const GrayImage& a, const GrayImage& b, int bins, const BinaryMask* overlap) {
    if (!a.same_shape(b)) throw ConfigError("joint_histogram: image sizes differ");
    return joint_histogram(to_float(a), to_float(b), bins, std::max(a.max_level(), b.max_level()), overlap);
}

JointHistogram smooth(const JointHistogram& h, double sigma) {
    if (!(sigma > 0)) return h;
    const int r = static_cast<int>(std::ceil(2 * sigma));
    std::vector<double> k(2 * r + 1);
    for (int i = -r; i <= r; ++i) k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    const int n = h.bins;
    std::vector<double> tmp(h.counts.size(), 0.0);
    JointHistogram out = h;
    std::fill(out.counts.begin(), out.counts.end(), 0.0);
    // kernel renormalised over the in-range taps so each pass preserves mass
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double s = 0, ws = 0;
            for (int i = -r; i <= r; ++i)
                if (b + i >= 0 && b + i < n) {
                    s += k[i + r] * h.at(a, b + i);
                    ws += k[i + r];
                }
            tmp[static_cast<std::size_t>(a) * n + b] = s / ws;
        }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double s = 0, ws = 0;
            for (int i = -r; i <= r; ++i)
                if (a + i >= 0 && a + i < n) {
                    s += k[i + r] * tmp[static_cast<std::size_t>(a + i) * n + b];
                    ws += k[i + r];
                }
            out.counts[static_cast<std::size_t>(a) * n + b] = s / ws;
        }
    out.total = 0;
    for (double v : out.counts) out.total += v;
    return out;
}

double entropy_a(const JointHistogram& h) {
    if (!(h.total > 0)) throw AlgorithmError("mutual information: empty overlap");
    return xlogx_sum(h.marginal_a(), h.total);
}

double entropy_b(const JointHistogram& h) {
    if (!(h.total > 0)) throw AlgorithmError("mutual information: empty overlap");
    return xlogx_sum(h.marginal_b(), h.total);
}

double joint_entropy(const JointHistogram& h) {
    if (!(h.total > 0)) throw AlgorithmError("mutual information: empty overlap");
    return xlogx_sum(h.counts, h.total);
}

double mutual_information(const JointHistogram& h) {
    return std::max(0.0, entropy_a(h) + entropy_b(h) - joint_entropy(h));
}

double normalized_mi(const JointHistogram& h) {
    const double hab = joint_entropy(h);
    if (hab <= 0) throw AlgorithmError("normalized_mi: zero joint entropy");
    return (entropy_a(h) + entropy_b(h)) / hab;
}

double mutual_information(const GrayImage& a, const GrayImage& b, int bins) {
    return mutual_information(joint_histogram(a, b, bins));
}

double normalized_mi(const GrayImage& a, const GrayImage& b, int bins) { return normalized_mi(joint_histogram(a, b, bins)); }

void PsoConfig::validate() const {
    const std::size_t d = lower.size();
    if (d == 0 || upper.size() != d) throw ConfigError("pso: bounds missing or of unequal length");
    for (std::size_t i = 0; i < d; ++i)
        if (!(lower[i] < upper[i])) throw ConfigError("pso: bounds must satisfy lower < upper");
    if (!v_max.empty() && v_max.size() != d) throw ConfigError("pso: v_max length differs from bounds");
    if (!x_init.empty() && x_init.size() != d) throw ConfigError("pso: x_init length differs from bounds");
    if (particles < 1 || t_max < 0 || t_no_improve < 1) throw ConfigError("pso: particles, t_max, t_no_improve");
    if (c_soc < 0 || c_soc > 2 || c_cog < 0 || c_cog > 2) throw ConfigError("pso: c_soc and c_cog must be in [0,2]");
    if (c_ret < 0) throw ConfigError("pso: c_ret must be >= 0");
    if (p_c < 0 || p_c > 1) throw ConfigError("pso: p_c must be in [0,1]");
    if (kappa < 0 || kappa > 1) throw ConfigError("pso: kappa must be in [0,1]");
    if (init_spread < 0 || init_spread > 1) throw ConfigError("pso: init_spread must be in [0,1]");
    if (variant == PsoVariant::Subpopulation && subpopulations < 1) throw ConfigError("pso: subpopulations >= 1");
    if (chi_mode) {
        const bool ret = variant == PsoVariant::InitialOrientation || variant == PsoVariant::Decaying;
        const double phi = c_cog + c_soc + (ret ? c_ret : 0.0);
        if (!(phi > 4)) throw ConfigError("pso: constriction requires phi > 4");
    }
}

double constriction(double phi, double kappa) {
    if (!(phi > 4)) throw ConfigError("pso: constriction requires phi > 4");
    return 2 * kappa / std::abs(2 - phi - std::sqrt(phi * phi - 4 * phi));
}

namespace {

void crossover_pair(Particle& a, Particle& b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double p = u(rng);
    const std::size_t d = a.x.size();
    std::vector<double> xa(d), xb(d), sum(d);
    double na = 0, nb = 0, ns = 0;
    for (std::size_t k = 0; k < d; ++k) {
        xa[k] = p * a.x[k] + (1 - p) * b.x[k];
        xb[k] = p * b.x[k] + (1 - p) * a.x[k];
        sum[k] = a.v[k] + b.v[k];
        na += a.v[k] * a.v[k];
        nb += b.v[k] * b.v[k];
        ns += sum[k] * sum[k];
    }
    a.x = std::move(xa);
    b.x = std::move(xb);
    if (ns <= 0) return;
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    ns = std::sqrt(ns);
    for (std::size_t k = 0; k < d; ++k) {
        a.v[k] = na * sum[k] / ns;
        b.v[k] = nb * sum[k] / ns;
    }
}

// Pairs consecutive selected members of the group.
void crossover_group(std::vector<Particle>& swarm, const std::vector<int>& group, double p_c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> chosen;
    for (int i : group)
        if (u(rng) < p_c) chosen.push_back(i);
    for (std::size_t k = 0; k + 1 < chosen.size(); k += 2) crossover_pair(swarm[chosen[k]], swarm[chosen[k + 1]], rng);
}

// Lloyd's k-means on positions, centres initialised from evenly spaced particles.
std::vector<std::vector<int>> kmeans_groups(const std::vector<Particle>& swarm, int k) {
    const int n = static_cast<int>(swarm.size());
    k = std::min(k, n);
    std::vector<std::vector<double>> centres;
    for (int j = 0; j < k; ++j) centres.push_back(swarm[static_cast<std::size_t>(j) * n / k].x);
    std::vector<int> assign(n, -1);
    for (int it = 0; it < 20; ++it) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                double d = 0;
                for (std::size_t q = 0; q < swarm[i].x.size(); ++q) d += std::pow(swarm[i].x[q] - centres[j][q], 2);
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        for (int j = 0; j < k; ++j) {
            std::vector<double> c(centres[j].size(), 0.0);
            int m = 0;
            for (int i = 0; i < n; ++i)
                if (assign[i] == j) {
                    for (std::size_t q = 0; q < c.size(); ++q) c[q] += swarm[i].x[q];
                    ++m;
                }
            if (m > 0) {
                for (double& v : c) v /= m;
                centres[j] = c;
            }
        }
    }
    std::vector<std::vector<int>> groups(k);
    for (int i = 0; i < n; ++i) groups[assign[i]].push_back(i);
    return groups;
}

}  // namespace

PsoResult pso_optimize(const Objective& f, const PsoConfig& cfg, const SwarmObserver& observer) {
    cfg.validate();
    const std::size_t d = cfg.lower.size();
    std::vector<double> vmax = cfg.v_max, xinit = cfg.x_init;
    if (vmax.empty())
        for (std::size_t k = 0; k < d; ++k) vmax.push_back(0.2 * (cfg.upper[k] - cfg.lower[k]));
    if (xinit.empty())
        for (std::size_t k = 0; k < d; ++k) xinit.push_back(0.5 * (cfg.lower[k] + cfg.upper[k]));

    const bool with_ret = cfg.variant == PsoVariant::InitialOrientation || cfg.variant == PsoVariant::Decaying;
    const bool with_cross = cfg.variant == PsoVariant::Hybrid || cfg.variant == PsoVariant::Subpopulation;
    double c_soc = cfg.c_soc, c_ret = with_ret ? cfg.c_ret : 0.0;
    const double chi = cfg.chi_mode ? constriction(cfg.c_cog + c_soc + c_ret, cfg.kappa) : 1.0;
    const double inertia = cfg.chi_mode ? 1.0 : cfg.w;
    const double dphi = cfg.variant == PsoVariant::Decaying && cfg.t_max > 0 ? cfg.c_ret / cfg.t_max : 0.0;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0), u11(-1.0, 1.0);

    std::vector<Particle> swarm(cfg.particles);
    for (Particle& p : swarm) {
        p.x.resize(d);
        p.v.assign(d, 0.0);
        for (std::size_t k = 0; k < d; ++k) {
            const double half = 0.5 * (cfg.upper[k] - cfg.lower[k]);
            p.x[k] = std::clamp(xinit[k] + cfg.init_spread * half * u11(rng), cfg.lower[k], cfg.upper[k]);
        }
    }
    PsoResult res;
    res.value = std::numeric_limits<double>::infinity();
    for (Particle& p : swarm) {
        p.value = f(p.x);
        p.best = p.x;
        p.best_value = p.value;
        if (p.value < res.value) {
            res.value = p.value;
            res.g = p.x;
        }
    }
    res.trace.push_back(res.value);
    if (observer) observer(0, swarm);

    int stagnant = 0;
    for (int t = 1; t <= cfg.t_max; ++t) {
        for (Particle& p : swarm) {
            for (std::size_t k = 0; k < d; ++k) {
                const double r1 = u01(rng), r2 = u01(rng);
                double v = inertia * p.v[k] + c_soc * r1 * (res.g[k] - p.x[k]) + cfg.c_cog * r2 * (p.best[k] - p.x[k]);
                if (with_ret) v += c_ret * u01(rng) * (xinit[k] - p.x[k]);
                v = std::clamp(chi * v, -vmax[k], vmax[k]);
                double x = p.x[k] + v;
                // damping: stop on the wall and bounce back with a random fraction of the speed
                if (x < cfg.lower[k] || x > cfg.upper[k]) {
                    x = std::clamp(x, cfg.lower[k], cfg.upper[k]);
                    v = -u01(rng) * v;
                }
                p.x[k] = x;
                p.v[k] = v;
            }
        }
        if (with_cross && cfg.p_c > 0) {
            if (cfg.variant == PsoVariant::Hybrid) {
                std::vector<int> all(swarm.size());
                for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
                crossover_group(swarm, all, cfg.p_c, rng);
            } else {
                for (const auto& g : kmeans_groups(swarm, cfg.subpopulations)) crossover_group(swarm, g, cfg.p_c, rng);
            }
        }
        bool improved = false;
        for (Particle& p : swarm) {
            p.value = f(p.x);
            if (p.value < p.best_value) {
                p.best_value = p.value;
                p.best = p.x;
            }
            if (p.value < res.value) {
                double dist = 0;
                for (std::size_t k = 0; k < d; ++k) dist += (p.x[k] - res.g[k]) * (p.x[k] - res.g[k]);
                if (std::sqrt(dist) >= cfg.epsilon) improved = true;
                res.value = p.value;
                res.g = p.x;
            }
        }
        res.trace.push_back(res.value);
        res.iterations = t;
        if (observer) observer(t, swarm);
        if (dphi > 0) {
            c_soc = std::max(0.0, c_soc - dphi);
            c_ret = std::max(0.0, c_ret - dphi);
        }
        stagnant = improved ? 0 : stagnant + 1;
        if (stagnant >= cfg.t_no_improve) {
            res.stagnated = true;
            break;
        }
    }
    return res;
}

std::vector<double> refine_coordinate_descent(const Objective& f, std::vector<double> x, const std::vector<double>& lower,
                                              const std::vector<double>& upper, const RefineConfig& cfg) {
    const std::size_t d = x.size();
    if (lower.size() != d || upper.size() != d) throw ConfigError("refine: bounds length differs");
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double fx = f(x);
    for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
        const double f0 = fx;
        for (std::size_t k = 0; k < d; ++k) {
            const double step = cfg.initial_step * (upper[k] - lower[k]);
            double a = std::max(lower[k], x[k] - step), b = std::min(upper[k], x[k] + step);
            auto at = [&](double v) {
                std::vector<double> y = x;
                y[k] = v;
                return f(y);
            };
            double c = b - gr * (b - a), e = a + gr * (b - a);
            double fc = at(c), fe = at(e);
            const double stop = 1e-4 * (upper[k] - lower[k]);
            while (b - a > stop) {
                if (fc < fe) {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - gr * (b - a);
                    fc = at(c);
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + gr * (b - a);
                    fe = at(e);
                }
            }
            const double cand = fc < fe ? c : e;
            const double fcand = std::min(fc, fe);
            if (fcand < fx) {
                x[k] = cand;
                fx = fcand;
            }
        }
        if (2 * (f0 - fx) <= cfg.tolerance * (std::abs(f0) + std::abs(fx)) + 1e-20) break;
    }
    return x;
}

PsoConfig RegisterConfig::default_pso() {
    PsoConfig p;
    const double rot = 20.0 * std::numbers::pi / 180.0;
    p.lower = {-20, -20, -rot, 0.9, 0.9, -0.1};
    p.upper = {20, 20, rot, 1.1, 1.1, 0.1};
    p.x_init = {0, 0, 0, 1, 1, 0};
    return p;
}

double similarity(const GrayImage& moving, const GrayImage& fixed, const AffineTransform2D& t, const RegisterConfig& cfg) {
    if (!moving.same_shape(fixed)) throw ConfigError("register: moving and fixed sizes differ");
    const Resampled r = resample(moving, t, cfg.interp);
    if (count_nonzero(r.valid) < 16) return cfg.metric == Metric::MI ? 0.0 : 1.0;
    JointHistogram h = joint_histogram(r.values, to_float(fixed), cfg.bins, std::max(moving.max_level(), fixed.max_level()),
                                       &r.valid);
    if (cfg.smooth_histogram) h = smooth(h, 1.0);
    if (cfg.metric == Metric::MI) return mutual_information(h);
    if (joint_entropy(h) <= 0) return 1.0;
    return normalized_mi(h);
}

RegisterResult register_images(const GrayImage& moving, const GrayImage& fixed, const RegisterConfig& cfg) {
    validate(moving);
    validate(fixed);
    if (!moving.same_shape(fixed)) throw ConfigError("register: moving and fixed sizes differ");
    if (cfg.pso.lower.size() != 6) throw ConfigError("register: PSO bounds must have 6 dimensions");
    auto constant = [](const GrayImage& g) {
        return std::all_of(g.data.begin(), g.data.end(), [&](auto v) { return v == g.data.front(); });
    };
    if (constant(moving) || constant(fixed)) throw AlgorithmError("register: constant image");
    if (cfg.bins < 2) throw ConfigError("register: bins must be >= 2");

    const Objective obj = [&](const std::vector<double>& p) {
        AffineTransform2D t{p[0], p[1], p[2], p[3], p[4], p[5]};
        return -similarity(moving, fixed, t, cfg);
    };
    RegisterResult res;
    res.pso = pso_optimize(obj, cfg.pso);
    std::vector<double> best = res.pso.g;
    if (cfg.refine == Refine::CoordinateDescent)
        best = refine_coordinate_descent(obj, best, cfg.pso.lower, cfg.pso.upper, cfg.refine_cfg);
    res.transform = AffineTransform2D::from_params(best);
    res.metric = -obj(best);
    return res;
}

}  // namespace medimg::reg
