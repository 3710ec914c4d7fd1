#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "medimg/graphseg.hpp"
#include "medimg/phantom.hpp"

using namespace medimg;
using namespace medimg::graph;

namespace {

// Dirichlet problem solved by plain Gaussian elimination with partial pivoting.
std::vector<double> dirichlet_oracle(const RwGraph& g, const SeedSet& s) {
    const int n = g.nodes();
    std::vector<int> fixed(n, -1);
    for (auto p : s.fg) fixed[p.y * g.width + p.x] = 1;
    for (auto p : s.bg) fixed[p.y * g.width + p.x] = 0;
    std::vector<int> idx(n, -1), free;
    for (int i = 0; i < n; ++i)
        if (fixed[i] < 0) {
            idx[i] = static_cast<int>(free.size());
            free.push_back(i);
        }
    const int m = static_cast<int>(free.size());
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (int r = 0; r < m; ++r) {
        g.for_each_edge(free[r], [&](int j, double w) {
            a[r][r] += w;
            if (fixed[j] < 0)
                a[r][idx[j]] -= w;
            else
                a[r][m] += w * fixed[j];
        });
    }
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (int r = 0; r < m; ++r) {
            if (r == c || a[r][c] == 0) continue;
            const double f = a[r][c] / a[c][c];
            for (int k = c; k <= m; ++k) a[r][k] -= f * a[c][k];
        }
    }
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = fixed[i] >= 0 ? fixed[i] : a[idx[i]][m] / a[idx[i]][idx[i]];
    return x;
}

SeedSet random_seeds(std::mt19937_64& rng, int w, int h) {
    std::vector<int> cells(w * h);
    for (int i = 0; i < w * h; ++i) cells[i] = i;
    std::shuffle(cells.begin(), cells.end(), rng);
    SeedSet s;
    const int nf = 1 + static_cast<int>(rng() % 3), nb = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < nf; ++k) s.fg.push_back({cells[k] % w, cells[k] / w});
    for (int k = nf; k < nf + nb; ++k) s.bg.push_back({cells[k] % w, cells[k] / w});
    return s;
}

}  // namespace

TEST_CASE("random walker on a 4-node chain") {
    const FloatImage flat(4, 1, 5.0);
    const auto g = rw_build(flat);
    for (auto solver : {RwSolver::CG, RwSolver::Dense}) {
        RwOptions o;
        o.solver = solver;
        const auto r = random_walker(g, {{{0, 0}}, {{3, 0}}}, o);
        CHECK(r.probability[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
        CHECK(r.probability[2] == doctest::Approx(1.0 / 3).epsilon(1e-12));
        CHECK(r.mask.data == std::vector<std::uint8_t>{1, 1, 0, 0});
    }
}

TEST_CASE("random walker solvers agree with elimination on random lattices") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 20; ++k) {
        const auto img = testing::random_gray(8, 8, 500 + k);
        const auto g = rw_build(img, 10.0);
        const auto s = random_seeds(rng, 8, 8);
        const auto oracle = dirichlet_oracle(g, s);
        RwOptions cg, dense;
        cg.solver = RwSolver::CG;
        dense.solver = RwSolver::Dense;
        const auto a = random_walker(g, s, cg), b = random_walker(g, s, dense);
        CHECK(a.solver == "cg");
        CHECK(b.solver == "dense");
        for (int i = 0; i < 64; ++i) {
            CHECK(std::abs(a.probability[i] - oracle[i]) <= 1e-8);
            CHECK(std::abs(b.probability[i] - oracle[i]) <= 1e-8);
        }
    }
}

TEST_CASE("random walker probabilities are harmonic and bounded") {
    const auto img = testing::random_gray(12, 10, 3);
    const auto g = rw_build(img, 20.0);
    SeedSet s{{{2, 2}, {3, 2}}, {{10, 8}}};
    const auto r = random_walker(g, s);
    for (int i = 0; i < g.nodes(); ++i) {
        const double p = r.probability[i];
        CHECK(p >= -1e-12);
        CHECK(p <= 1 + 1e-12);
        const Point q{i % 12, i / 12};
        if (std::find(s.fg.begin(), s.fg.end(), q) != s.fg.end() || std::find(s.bg.begin(), s.bg.end(), q) != s.bg.end())
            continue;
        double num = 0, den = 0;
        g.for_each_edge(i, [&](int j, double w) {
            num += w * r.probability[j];
            den += w;
        });
        CHECK(std::abs(num / den - p) <= 1e-8);
    }
}

TEST_CASE("edge weights follow the Gaussian of normalised differences") {
    GrayImage img(2, 1);
    img.data = {0, 100};
    const auto g = rw_build(img, 3.0);
    CHECK(g.right(0, 0) == doctest::Approx(std::exp(-3.0)));
    CHECK_THROWS_AS(rw_build(img, 0.0), ConfigError);
}

TEST_CASE("random walker input validation") {
    const auto g = rw_build(FloatImage(4, 4, 1.0));
    CHECK_THROWS_AS(random_walker(g, {{}, {{0, 0}}}), ConfigError);
    CHECK_THROWS_AS(random_walker(g, {{{9, 0}}, {{0, 0}}}), ConfigError);
    CHECK_THROWS_AS(random_walker(g, {{{1, 1}}, {{1, 1}}}), ConfigError);
    RwOptions o;
    o.threshold = 1.0;
    CHECK_THROWS_AS(random_walker(g, {{{1, 1}}, {{2, 2}}}, o), ConfigError);
}

TEST_CASE("SUV conversion and MRI-weighted walker") {
    FloatImage act(2, 1);
    act.data = {10.0, 30.0};
    const auto suv = suv_convert(act, 200.0, 70.0);
    CHECK(suv[0] == doctest::Approx(3.5));
    CHECK(suv[1] == doctest::Approx(10.5));
    CHECK_THROWS_AS(suv_convert(act, 0.0, 70.0), ConfigError);

    const auto img = to_float(testing::random_gray(10, 10, 8));
    SeedSet s{{{5, 5}}, {{0, 0}, {9, 9}}};
    RwWeightedConfig neutral;
    neutral.gain_in = neutral.gain_out = 1.0;
    const auto a = rw_weighted(img, BinaryMask(10, 10, 1), s, neutral);
    const auto b = random_walker(rw_build(img), s);
    CHECK(a.probability == b.probability);
}

TEST_CASE("cellular automaton similarity functions") {
    CHECK(ca_similarity(Similarity::GM, 10, 12, 50) == doctest::Approx(std::exp(-2.0)));
    CHECK(ca_similarity(Similarity::IFD, 10, 20, 40) == doctest::Approx(0.75));
    CHECK(ca_similarity(Similarity::IFD, 3, 3, 0) == 1.0);
}

TEST_CASE("automaton strengths never decrease and seeds keep their labels") {
    FloatImage img(24, 24, 20.0);
    for (int y = 6; y < 18; ++y)
        for (int x = 6; x < 18; ++x) img.at(x, y) = 200.0;
    const SeedSet s{{{12, 12}}, {{0, 0}, {23, 23}}};
    std::vector<double> last(img.size(), 0.0);
    bool monotone = true;
    const auto st = ca_run(img, s, {Similarity::GM, 0}, [&](const CaState& c) {
        for (std::size_t i = 0; i < last.size(); ++i) {
            if (c.strength[i] < last[i]) monotone = false;
            if (c.strength[i] > 1.0) monotone = false;
        }
        last = c.strength;
    });
    CHECK(monotone);
    CHECK(st.label[12 * 24 + 12] == 1);
    CHECK(st.label[0] == 2);
    for (auto l : st.label) CHECK(l != 0);
    const auto m = ca_grow(img, s, Similarity::GM);
    CHECK(m == testing::rect_mask(24, 24, 6, 6, 18, 18));
    CHECK(ca_grow(img, s, Similarity::IFD) == m);
}

TEST_CASE("adaptive seeds fit inside the crop") {
    for (auto [w, h] : {std::pair{5, 5}, {9, 11}, {40, 30}}) {
        const auto s = adaptive_seeds(w, h);
        CHECK_NOTHROW(validate_seeds(s, w, h));
    }
    CHECK_THROWS_AS(adaptive_seeds(4, 10), ConfigError);
}

TEST_CASE("gtvcut segments lesions with and without a dark core") {
    for (bool core : {false, true}) {
        double gm = 0, ifd = 0, mutual = 0;
        for (int s = 0; s < 4; ++s) {
            const auto ph = phantom::gtv_blob(90 + s, core);
            const auto a = gtvcut_pipeline(ph.image, ph.bbox, Similarity::GM);
            const auto b = gtvcut_pipeline(ph.image, ph.bbox, Similarity::IFD);
            gm += testing::dice(a, ph.truth);
            ifd += testing::dice(b, ph.truth);
            mutual += testing::dice(a, b);
        }
        CHECK(gm / 4 >= 0.95);
        CHECK(ifd / 4 >= 0.95);
        CHECK(mutual / 4 >= 0.95);
    }
}
