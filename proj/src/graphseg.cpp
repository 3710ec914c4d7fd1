#include "medimg/graphseg.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <deque>

#include "medimg/imgcore.hpp"

namespace medimg::graph {

namespace {

constexpr Point kN8[8] = {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};

}  // namespace

void validate_seeds(const SeedSet& seeds, int width, int height) {
    if (seeds.fg.empty() || seeds.bg.empty()) throw ConfigError("seeds: both classes need at least one seed");
    std::vector<std::uint8_t> mark(static_cast<std::size_t>(width) * height, 0);
    for (const Point& p : seeds.fg) {
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) throw ConfigError("seeds: foreground seed outside image");
        mark[static_cast<std::size_t>(p.y) * width + p.x] = 1;
    }
    for (const Point& p : seeds.bg) {
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) throw ConfigError("seeds: background seed outside image");
        if (mark[static_cast<std::size_t>(p.y) * width + p.x] == 1)
            throw ConfigError("seeds: foreground and background overlap");
    }
}

SeedSet adaptive_seeds(int w, int h) {
    if (w < 5 || h < 5) throw ConfigError("adaptive_seeds: crop must be at least 5x5");
    const int cx = w / 2, cy = h / 2;
    SeedSet s;
    if (w * h > 100) {
        const int step = std::max(1, std::min(w, h) / 10);
        for (int j = -1; j <= 1; ++j)
            for (int i = -1; i <= 1; ++i) s.fg.push_back({cx + i * step, cy + j * step});
        s.bg = {{0, 0}, {cx, 0}, {w - 1, 0}, {0, cy}, {w - 1, cy}, {0, h - 1}, {cx, h - 1}, {w - 1, h - 1}};
    } else {
        s.fg = {{cx, cy}, {cx, cy - 1}, {cx + 1, cy}, {cx, cy + 1}, {cx - 1, cy}};
        s.bg = {{0, 0}, {w - 1, 0}, {0, h - 1}, {w - 1, h - 1}};
    }
    return s;
}

double ca_similarity(Similarity sim, double cp, double cq, double max_abs) {
    const double d = std::abs(cp - cq);
    if (sim == Similarity::GM) return std::exp(-d);
    return max_abs > 0.0 ? 1.0 - d / max_abs : 1.0;
}

CaState ca_run(const FloatImage& img, const SeedSet& seeds, const CaConfig& cfg,
               const std::function<void(const CaState&)>& observer) {
    validate_seeds(seeds, img.width, img.height);
    const int w = img.width, h = img.height;
    CaState st;
    st.width = w;
    st.height = h;
    st.label.assign(img.size(), 0);
    st.strength.assign(img.size(), 0.0);
    for (const Point& p : seeds.fg) {
        st.label[p.y * w + p.x] = 1;
        st.strength[p.y * w + p.x] = 1.0;
    }
    for (const Point& p : seeds.bg) {
        st.label[p.y * w + p.x] = 2;
        st.strength[p.y * w + p.x] = 1.0;
    }
    double max_abs = 0.0;
    for (double v : img.data) max_abs = std::max(max_abs, std::abs(v));
    const int cap = cfg.max_iter > 0 ? cfg.max_iter : 4 * w * h + 100;

    CaState next = st;
    for (;;) {
        bool changed = false;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int p = y * w + x;
                double best = st.strength[p];
                std::uint8_t lab = st.label[p];
                for (const Point& d : kN8) {
                    const int qx = x + d.x, qy = y + d.y;
                    if (!img.inside(qx, qy)) continue;
                    const int q = qy * w + qx;
                    if (!st.label[q]) continue;
                    const double force = ca_similarity(cfg.similarity, img[p], img[q], max_abs) * st.strength[q];
                    if (force > best) {
                        best = force;
                        lab = st.label[q];
                    }
                }
                if (best != st.strength[p] || lab != st.label[p]) changed = true;
                next.strength[p] = best;
                next.label[p] = lab;
            }
        if (!changed) break;
        std::swap(st.label, next.label);
        std::swap(st.strength, next.strength);
        ++st.iterations;
        if (observer) observer(st);
        if (st.iterations >= cap) throw AlgorithmError("ca_grow: no fixed point within the iteration cap");
    }
    return st;
}

BinaryMask ca_grow(const FloatImage& img, const SeedSet& seeds, Similarity sim) {
    const CaState st = ca_run(img, seeds, {sim, 0});
    BinaryMask out(img.width, img.height);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = st.label[i] == 1;
    return out;
}

BinaryMask gtvcut_pipeline(const GrayImage& img, const Rect& bbox, Similarity sim) {
    validate(img);
    const GrayImage part = crop(img, bbox);
    const GrayImage stretched = contrast_stretch(part, 0, 255);
    const FloatImage values = to_float(stretched);
    BinaryMask m = ca_grow(values, adaptive_seeds(part.width, part.height), sim);
    if (count_nonzero(m)) m = open(convex_hull(m), StructuringElement::disk(1));
    return uncrop(m, bbox, img.width, img.height);
}

RwGraph rw_build(const FloatImage& values, double beta) {
    if (!(beta > 0.0)) throw ConfigError("rw_build: beta must be positive");
    if (values.empty()) throw ConfigError("rw_build: empty image");
    for (double v : values.data)
        if (!std::isfinite(v)) throw ConfigError("rw_build: non-finite value");
    const FloatImage g = normalize_unit(values);
    RwGraph gr;
    gr.width = values.width;
    gr.height = values.height;
    gr.beta = beta;
    gr.wh.assign(static_cast<std::size_t>(std::max(0, gr.width - 1)) * gr.height, 1.0);
    gr.wv.assign(static_cast<std::size_t>(gr.width) * std::max(0, gr.height - 1), 1.0);
    auto weight = [&](double a, double b) { return std::exp(-beta * (a - b) * (a - b)); };
    for (int y = 0; y < gr.height; ++y)
        for (int x = 0; x < gr.width; ++x) {
            if (x + 1 < gr.width) gr.right(x, y) = weight(g.at(x, y), g.at(x + 1, y));
            if (y + 1 < gr.height) gr.down(x, y) = weight(g.at(x, y), g.at(x, y + 1));
        }
    return gr;
}

RwGraph rw_build(const GrayImage& img, double beta) { return rw_build(to_float(img), beta); }

FloatImage suv_convert(const FloatImage& activity, double injected_dose, double weight) {
    if (!(injected_dose > 0.0) || !(weight > 0.0)) throw ConfigError("suv_convert: dose and weight must be positive");
    FloatImage out = activity;
    for (double& v : out.data) v = v / (injected_dose / weight);
    return out;
}

RwResult random_walker(const RwGraph& graph, const SeedSet& seeds, const RwOptions& opt) {
    if (!(opt.threshold > 0.0 && opt.threshold < 1.0)) throw ConfigError("random_walker: threshold must be in (0,1)");
    const int w = graph.width, h = graph.height, n = graph.nodes();
    if (static_cast<int>(graph.wh.size()) != std::max(0, w - 1) * h ||
        static_cast<int>(graph.wv.size()) != w * std::max(0, h - 1))
        throw ConfigError("random_walker: malformed graph");
    for (double v : graph.wh)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("random_walker: weights must be finite and >= 0");
    for (double v : graph.wv)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("random_walker: weights must be finite and >= 0");
    validate_seeds(seeds, w, h);

    // -1 unlabeled, 1 foreground, 0 background
    std::vector<int> fixed(n, -1);
    for (const Point& p : seeds.fg) fixed[p.y * w + p.x] = 1;
    for (const Point& p : seeds.bg) fixed[p.y * w + p.x] = 0;

    // every unlabeled node must reach a seed through positive-weight edges
    {
        std::vector<std::uint8_t> seen(n, 0);
        std::deque<int> q;
        for (int i = 0; i < n; ++i)
            if (fixed[i] >= 0) {
                seen[i] = 1;
                q.push_back(i);
            }
        while (!q.empty()) {
            const int i = q.front();
            q.pop_front();
            graph.for_each_edge(i, [&](int j, double wt) {
                if (wt > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    q.push_back(j);
                }
            });
        }
        for (int i = 0; i < n; ++i)
            if (!seen[i])
                throw AlgorithmError("random_walker: unlabeled region without a reachable seed at (" +
                                     std::to_string(i % w) + "," + std::to_string(i / w) + ")");
    }

    std::vector<int> slot(n, -1);
    int m = 0;
    for (int i = 0; i < n; ++i)
        if (fixed[i] < 0) slot[i] = m++;

    RwResult res;
    res.probability = FloatImage(w, h);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    if (m > 0) {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(m) * 5);
        for (int i = 0; i < n; ++i) {
            if (slot[i] < 0) continue;
            double deg = 0.0;
            graph.for_each_edge(i, [&](int j, double wt) {
                deg += wt;
                if (slot[j] >= 0)
                    trip.emplace_back(slot[i], slot[j], -wt);
                else if (fixed[j] == 1)
                    b[slot[i]] += wt;
            });
            trip.emplace_back(slot[i], slot[i], deg);
        }
        Eigen::SparseMatrix<double> L(m, m);
        L.setFromTriplets(trip.begin(), trip.end());

        bool solved = false;
        if (opt.solver != RwSolver::Dense) {
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
            cg.setTolerance(opt.tolerance);
            cg.setMaxIterations(std::max(1000, 10 * m));
            cg.compute(L);
            x = cg.solve(b);
            res.iterations = static_cast<int>(cg.iterations());
            res.solver = "cg";
            solved = cg.info() == Eigen::Success;
            if (!solved && opt.solver == RwSolver::CG) throw AlgorithmError("random_walker: CG did not converge");
        }
        if (!solved) {
            if (opt.solver == RwSolver::Auto && m >= 10000)
                throw AlgorithmError("random_walker: CG did not converge and the system is too large for a dense solve");
            const Eigen::MatrixXd dense(L);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(dense);
            if (ldlt.info() != Eigen::Success) throw AlgorithmError("random_walker: singular system");
            x = ldlt.solve(b);
            res.solver = "dense";
            res.iterations = 0;
        }
    } else {
        res.solver = "none";
    }
    for (int i = 0; i < n; ++i)
        res.probability[i] = fixed[i] >= 0 ? fixed[i] : std::clamp(x[slot[i]], 0.0, 1.0);
    res.mask = BinaryMask(w, h);
    for (int i = 0; i < n; ++i) res.mask[i] = res.probability[i] >= opt.threshold;
    return res;
}

RwResult rw_weighted(const FloatImage& pet, const BinaryMask& mri_mask, const SeedSet& seeds,
                     const RwWeightedConfig& cfg) {
    if (!pet.same_shape(mri_mask)) throw ConfigError("rw_weighted: mask size mismatch");
    if (!(cfg.gain_in > 0.0) || !(cfg.gain_out > 0.0)) throw ConfigError("rw_weighted: gains must be positive");
    FloatImage scaled = pet;
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= mri_mask[i] ? cfg.gain_in : cfg.gain_out;
    return random_walker(rw_build(scaled, cfg.beta), seeds, cfg.rw);
}

}  // namespace medimg::graph
