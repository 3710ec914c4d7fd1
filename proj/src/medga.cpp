#include "medimg/medga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "medimg/imgcore.hpp"

namespace medimg::medga {

threshold::Histogram induced_histogram(const Individual& ind, const InputHistogram& in) {
    if (ind.genes.size() != in.levels.size()) throw ConfigError("medga: individual length differs from input levels");
    std::vector<double> bins(static_cast<std::size_t>(in.lmax) + 1, 0.0);
    for (std::size_t j = 0; j < ind.genes.size(); ++j) {
        const int g = ind.genes[j];
        if (g < 0 || g > in.lmax) throw ConfigError("medga: gene outside the output range");
        bins[g] += in.freq[j];
    }
    return threshold::Histogram::from_counts(std::move(bins));
}

FitnessTerms fitness(const Individual& ind, const InputHistogram& in, double iots_eps) {
    const threshold::Histogram h = induced_histogram(ind, in);
    const threshold::ThresholdResult t = threshold::iots(h, iots_eps);
    FitnessTerms f;
    f.theta = t.theta;
    f.mu1 = t.mu1;
    f.mu2 = t.mu2;
    const int cut = static_cast<int>(std::floor(t.theta));
    double n1 = 0, q1 = 0, n2 = 0, q2 = 0;
    for (int r = 0; r < h.levels(); ++r) {
        const double fr = h.bins[r];
        if (fr == 0.0) continue;
        if (r <= cut) {
            n1 += fr;
            q1 += fr * (r - t.mu1) * (r - t.mu1);
        } else {
            n2 += fr;
            q2 += fr * (r - t.mu2) * (r - t.mu2);
        }
    }
    f.sigma1 = std::sqrt(q1 / n1);
    f.sigma2 = std::sqrt(q2 / n2);
    const auto [lo, hi] = std::minmax_element(ind.genes.begin(), ind.genes.end());
    f.omega1 = 0.5 * (t.theta - *lo);
    f.omega2 = 0.5 * (*hi - t.theta);
    f.tau1 = std::abs(2.0 * t.theta - t.mu1 - t.mu2);
    f.tau2 = std::abs(f.omega1 - 3.0 * f.sigma1);
    f.tau3 = std::abs(f.omega2 - 3.0 * f.sigma2);
    return f;
}

double fitness_value(const Individual& ind, const InputHistogram& in, double iots_eps) {
    try {
        return fitness(ind, in, iots_eps).total();
    } catch (const AlgorithmError&) {
        return std::numeric_limits<double>::infinity();
    }
}

const Individual& tournament_select(const std::vector<Individual>& pop, int k, Rng& rng) {
    if (pop.empty()) throw ConfigError("tournament_select: empty population");
    if (k < 1 || k > static_cast<int>(pop.size())) throw ConfigError("tournament_select: need 1 <= k <= |P|");
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    const Individual* best = &pop[pick(rng)];
    for (int i = 1; i < k; ++i) {
        const Individual* c = &pop[pick(rng)];
        if (c->fitness < best->fitness) best = c;
    }
    return *best;
}

std::pair<Individual, Individual> crossover_at(const Individual& p1, const Individual& p2, int cp) {
    const int n = static_cast<int>(p1.genes.size());
    if (static_cast<int>(p2.genes.size()) != n) throw ConfigError("crossover: parents differ in length");
    if (cp < 1 || cp > n) throw ConfigError("crossover: point outside [1, n]");
    const int hp = static_cast<int>(std::lround(n / 2.0));
    // from_first[j] (1-based j) says whether offspring 1 takes position j from parent 1
    std::vector<std::uint8_t> from_first(n + 1, 0);
    if (cp > hp) {
        for (int j = 1; j <= cp - hp - 1; ++j) from_first[j] = 1;
        for (int j = cp; j <= n; ++j) from_first[j] = 1;
    } else {
        for (int j = cp; j <= cp + hp - 1 && j <= n; ++j) from_first[j] = 1;
    }
    Individual a, b;
    a.genes.resize(n);
    b.genes.resize(n);
    for (int j = 1; j <= n; ++j) {
        a.genes[j - 1] = from_first[j] ? p1.genes[j - 1] : p2.genes[j - 1];
        b.genes[j - 1] = from_first[j] ? p2.genes[j - 1] : p1.genes[j - 1];
    }
    std::sort(a.genes.begin(), a.genes.end());
    std::sort(b.genes.begin(), b.genes.end());
    return {a, b};
}

std::pair<Individual, Individual> crossover(const Individual& p1, const Individual& p2, Rng& rng) {
    if (p1.genes.size() != p2.genes.size() || p1.genes.empty())
        throw ConfigError("crossover: parents differ in length");
    std::uniform_int_distribution<int> pick(1, static_cast<int>(p1.genes.size()));
    return crossover_at(p1, p2, pick(rng));
}

Individual mutate(const Individual& ind, double p_m, double theta, Rng& rng) {
    if (!(p_m >= 0.0 && p_m <= 1.0)) throw ConfigError("mutate: p_m must be in [0,1]");
    Individual out = ind;
    if (out.genes.empty() || p_m == 0.0) return out;
    const int lo = *std::min_element(ind.genes.begin(), ind.genes.end());
    const int hi = *std::max_element(ind.genes.begin(), ind.genes.end());
    const int t = static_cast<int>(std::ceil(theta));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int& g : out.genes) {
        if (!(coin(rng) < p_m)) continue;
        const int a = g < theta ? lo : t;
        const int b = g < theta ? t - 1 : hi;
        if (a > b) continue;
        g = std::uniform_int_distribution<int>(a, b)(rng);
    }
    std::sort(out.genes.begin(), out.genes.end());
    return out;
}

namespace {

struct Prepared {
    GrayImage img;  // roi stretched to [1, lmax], 0 elsewhere
    InputHistogram hist;
};

Prepared prepare(const GrayImage& img, const BinaryMask& roi) {
    validate(img);
    if (!img.same_shape(roi)) throw ConfigError("medga: roi size mismatch");
    int vmin = std::numeric_limits<int>::max(), vmax = -1;
    for (std::size_t i = 0; i < img.size(); ++i)
        if (roi[i]) {
            vmin = std::min<int>(vmin, img[i]);
            vmax = std::max<int>(vmax, img[i]);
        }
    if (vmax < 0) throw ConfigError("medga: empty roi");
    if (vmin == vmax) throw AlgorithmError("medga: roi has a single gray level");
    if (vmax < 2) throw AlgorithmError("medga: extended range [1, max] holds a single level");
    Prepared p;
    p.hist.lmax = vmax;
    p.img = GrayImage(img.width, img.height, img.depth);
    std::vector<double> count(static_cast<std::size_t>(p.hist.lmax) + 1, 0.0);
    const double scale = static_cast<double>(p.hist.lmax - 1) / (vmax - vmin);
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (!roi[i]) continue;
        const int v = 1 + static_cast<int>(std::floor((img[i] - vmin) * scale + 0.5));
        p.img[i] = static_cast<std::uint16_t>(v);
        count[v] += 1.0;
    }
    for (int r = 1; r <= p.hist.lmax; ++r)
        if (count[r] > 0) {
            p.hist.levels.push_back(r);
            p.hist.freq.push_back(count[r]);
        }
    return p;
}

std::size_t best_index(const std::vector<Individual>& pop) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[i].fitness < pop[b].fitness) b = i;
    return b;
}

double iots_theta(const Individual& ind, const InputHistogram& in, double eps, bool& ok) {
    try {
        ok = true;
        return threshold::iots(induced_histogram(ind, in), eps).theta;
    } catch (const AlgorithmError&) {
        ok = false;
        return 0.0;
    }
}

}  // namespace

MedGaResult medga_run(const GrayImage& img, const BinaryMask& roi, const MedGaConfig& cfg, GenerationHook hook,
                      void* ctx) {
    if (cfg.population < 2) throw ConfigError("medga: population must be >= 2");
    if (cfg.tournament < 1 || cfg.tournament > cfg.population) throw ConfigError("medga: need 1 <= k <= |P|");
    if (!(cfg.p_crossover >= 0 && cfg.p_crossover <= 1) || !(cfg.p_mutation >= 0 && cfg.p_mutation <= 1))
        throw ConfigError("medga: rates must be in [0,1]");
    if (cfg.generations < 0) throw ConfigError("medga: generations must be >= 0");

    Prepared prep = prepare(img, roi);
    const InputHistogram& in = prep.hist;
    const int n = static_cast<int>(in.levels.size());
    Rng rng(cfg.seed);
    std::uniform_int_distribution<int> gene(1, in.lmax);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    std::vector<Individual> pop(cfg.population);
    for (Individual& ind : pop) {
        ind.genes.resize(n);
        for (int& g : ind.genes) g = gene(rng);
        std::sort(ind.genes.begin(), ind.genes.end());
        ind.fitness = fitness_value(ind, in, cfg.iots_eps);
    }
    MedGaResult res;
    res.best_history.push_back(pop[best_index(pop)].fitness);
    if (hook) hook(0, pop, ctx);

    auto vary = [&](Individual ind) {
        bool ok = false;
        const double theta = iots_theta(ind, in, cfg.iots_eps, ok);
        if (ok) ind = mutate(ind, cfg.p_mutation, theta, rng);
        ind.fitness = fitness_value(ind, in, cfg.iots_eps);
        return ind;
    };

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        const Individual elite = pop[best_index(pop)];
        std::vector<Individual> next;
        next.reserve(pop.size());
        for (int pair = 0; pair < cfg.population / 2; ++pair) {
            Individual a = tournament_select(pop, cfg.tournament, rng);
            Individual b = tournament_select(pop, cfg.tournament, rng);
            if (coin(rng) < cfg.p_crossover) std::tie(a, b) = crossover(a, b, rng);
            next.push_back(vary(std::move(a)));
            next.push_back(vary(std::move(b)));
        }
        if (cfg.population % 2) next.push_back(vary(tournament_select(pop, cfg.tournament, rng)));
        // elitism: the previous best replaces the worst offspring
        std::size_t worst = 0;
        for (std::size_t i = 1; i < next.size(); ++i)
            if (next[i].fitness >= next[worst].fitness) worst = i;
        next[worst] = elite;
        pop = std::move(next);
        res.best_history.push_back(pop[best_index(pop)].fitness);
        if (hook) hook(gen, pop, ctx);
    }

    res.best = pop[best_index(pop)];
    res.input = in;
    res.enhanced = GrayImage(img.width, img.height, img.depth);
    std::vector<int> map(static_cast<std::size_t>(in.lmax) + 1, 0);
    for (int j = 0; j < n; ++j) map[in.levels[j]] = res.best.genes[j];
    for (std::size_t i = 0; i < img.size(); ++i)
        if (roi[i]) res.enhanced[i] = static_cast<std::uint16_t>(map[prep.img[i]]);
    res.prepared = std::move(prep.img);
    return res;
}

GrayImage baseline_enhance(const GrayImage& img, const Baseline& b) {
    validate(img);
    const int lmax = img.max_level();
    GrayImage out = img;
    if (img.empty()) return out;
    std::vector<double> hist(static_cast<std::size_t>(lmax) + 1, 0.0);
    for (auto v : img.data) hist[v] += 1.0;
    std::vector<int> map(static_cast<std::size_t>(lmax) + 1, 0);
    for (int r = 0; r <= lmax; ++r) map[r] = r;

    // HE of the levels [a, b] onto [out_lo, out_hi]
    auto equalize = [&](int a, int bnd, int out_lo, int out_hi) {
        double n = 0, cdf_min = -1, cdf = 0;
        for (int r = a; r <= bnd; ++r) n += hist[r];
        if (n == 0) return;
        for (int r = a; r <= bnd; ++r) {
            cdf += hist[r];
            if (cdf_min < 0 && hist[r] > 0) cdf_min = cdf;
            if (hist[r] == 0) continue;
            const double c = n > cdf_min ? (cdf - cdf_min) / (n - cdf_min) : 0.0;
            map[r] = out_lo + static_cast<int>(std::floor(c * (out_hi - out_lo) + 0.5));
        }
    };

    switch (b.kind) {
        case BaselineKind::HE: {
            int lo = 0;
            while (hist[lo] == 0) ++lo;
            int hi = lmax;
            while (hist[hi] == 0) --hi;
            if (lo == hi) return out;
            equalize(0, lmax, 0, lmax);
            break;
        }
        case BaselineKind::BiHE: {
            double s = 0;
            for (auto v : img.data) s += v;
            const int xm = static_cast<int>(std::floor(s / img.size()));
            equalize(0, xm, 0, xm);
            if (xm < lmax) equalize(xm + 1, lmax, xm + 1, lmax);
            break;
        }
        case BaselineKind::Gamma:
            if (!(b.param > 0)) throw ConfigError("baseline: gamma must be positive");
            for (int r = 0; r <= lmax; ++r)
                map[r] = static_cast<int>(std::floor(lmax * std::pow(static_cast<double>(r) / lmax, b.param) + 0.5));
            break;
        case BaselineKind::Sigmoid: {
            if (!(b.param > 0)) throw ConfigError("baseline: lambda must be positive");
            int lo = -1, hi = 0;
            for (int r = 1; r <= lmax; ++r)
                if (hist[r] > 0) {
                    if (lo < 0) lo = r;
                    hi = r;
                }
            if (lo < 0) return out;  // all zero
            const double alpha = 0.5 * (hi - lo);
            for (int r = 0; r <= lmax; ++r)
                map[r] = static_cast<int>(std::floor(hi / (1.0 + std::exp(-b.param * (r - alpha))) + 0.5));
            break;
        }
    }
    for (auto& v : out.data) v = static_cast<std::uint16_t>(std::clamp(map[v], 0, lmax));
    return out;
}

namespace {

BinaryMask keep_components(const BinaryMask& m, bool (*keep)(const ComponentFeatures&, const void*), const void* ctx) {
    const LabelMap lm = connected_components(m, Connectivity::Eight);
    const auto feats = all_features(lm);
    std::vector<std::uint8_t> ok(lm.count + 1, 0);
    for (const auto& f : feats) ok[f.label] = keep(f, ctx);
    BinaryMask out(m.width, m.height);
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = lm[i] && ok[lm[i]];
    return out;
}

}  // namespace

SegmentResult medga_segment(const GrayImage& img, const BinaryMask& roi, const MedGaConfig& cfg, PostProc post) {
    SegmentResult res;
    res.ga = medga_run(img, roi, cfg);
    const threshold::Histogram h = threshold::histogram(res.ga.enhanced, &roi);
    res.theta = threshold::iots(h, cfg.iots_eps).theta;
    const Rect box = bounding_box(roi);
    BinaryMask m = mask_and(
        threshold::binarize(res.ga.enhanced, res.theta,
                            post == PostProc::Fibroid ? threshold::Polarity::Below : threshold::Polarity::Above),
        roi);

    if (post == PostProc::Fibroid) {
        m = open(m, StructuringElement::disk(2));
        m = mask_and(m, erode(roi, StructuringElement::disk(5)));
        m = fill_holes(m);
        m = remove_small(m, 120);
        m = keep_components(
            m, [](const ComponentFeatures& f, const void*) { return f.extent >= 0.3 && f.extent < 0.8 && f.eccentricity < 0.8; },
            nullptr);
        struct Cut {
            double cx, cy, dmax;
        } cut{box.x + (box.width - 1) / 2.0, box.y + (box.height - 1) / 2.0,
              std::sqrt(static_cast<double>(box.width) * box.width + static_cast<double>(box.height) * box.height) / 3.0};
        m = keep_components(
            m,
            [](const ComponentFeatures& f, const void* c) {
                const Cut* k = static_cast<const Cut*>(c);
                return std::hypot(f.cx - k->cx, f.cy - k->cy) < k->dmax;
            },
            &cut);
    } else {
        m = fill_holes(m);
        m = remove_small(m, box.width * box.height > 300 ? 30 : 10);
        if (connected_components(m, Connectivity::Eight).count > 1)
            m = keep_components(
                m, [](const ComponentFeatures& f, const void*) { return f.extent >= 0.6 && f.eccentricity < 0.8; },
                nullptr);
        if (count_nonzero(m)) m = convex_hull(m);
    }
    res.mask = std::move(m);
    return res;
}

}  // namespace medimg::medga
