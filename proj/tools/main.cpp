// Batch front end: one subcommand per pipeline, JSON config with flag overrides.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "medimg/acdc.hpp"
#include "medimg/clusterseg.hpp"
#include "medimg/colony.hpp"
#include "medimg/graphseg.hpp"
#include "medimg/io.hpp"
#include "medimg/medga.hpp"
#include "medimg/metrics.hpp"
#include "medimg/phantom.hpp"
#include "medimg/regionseg.hpp"
#include "medimg/register.hpp"
#include "medimg/threshold.hpp"

using json = nlohmann::json;
using namespace medimg;
namespace fs = std::filesystem;

namespace {

struct Opt {
    std::string name;
    json def;
    std::string help;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Opt> opts;
    void (*run)(const json& cfg, const fs::path& out);
};

// ---- argument helpers -------------------------------------------------------

std::vector<double> numbers(const std::string& s, char sep = ',') {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("not a number: '" + item + "'");
        }
    }
    return v;
}

// "x,y;x,y"
std::vector<Point> points(const std::string& s) {
    std::vector<Point> pts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const auto v = numbers(item);
        if (v.size() != 2) throw ConfigError("point must be x,y: '" + item + "'");
        pts.push_back({static_cast<int>(v[0]), static_cast<int>(v[1])});
    }
    return pts;
}

std::string str(const json& cfg, const char* key) { return cfg.at(key).get<std::string>(); }

std::string need(const json& cfg, const char* key) {
    const std::string v = str(cfg, key);
    if (v.empty()) throw ConfigError(std::string("missing --") + key);
    return v;
}

BinaryMask mask_or_all(const json& cfg, const char* key, int w, int h) {
    const std::string p = str(cfg, key);
    if (p.empty()) return BinaryMask(w, h, 1);
    BinaryMask m = io::read_mask(p);
    if (!m.same_shape(w, h)) throw ConfigError(std::string(key) + " size differs from the input image");
    return m;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

threshold::Polarity polarity(const std::string& s) {
    if (s == "above") return threshold::Polarity::Above;
    if (s == "below") return threshold::Polarity::Below;
    throw ConfigError("polarity must be above or below");
}

graph::Similarity similarity(const std::string& s) {
    if (s == "gm") return graph::Similarity::GM;
    if (s == "ifd") return graph::Similarity::IFD;
    throw ConfigError("similarity must be gm or ifd");
}

medga::MedGaConfig medga_cfg(const json& c) {
    medga::MedGaConfig m;
    m.population = c.at("population");
    m.generations = c.at("generations");
    m.p_crossover = c.at("p-crossover");
    m.p_mutation = c.at("p-mutation");
    m.tournament = c.at("tournament");
    m.seed = c.at("seed");
    return m;
}

cluster::FcmConfig fcm_cfg(const json& c, int clusters) {
    cluster::FcmConfig f;
    f.clusters = clusters;
    f.m = c.at("fuzziness");
    f.eps = c.at("eps");
    f.max_iter = c.at("max-iter");
    f.seed = c.at("seed");
    return f;
}

// ---- subcommands ------------------------------------------------------------

void run_threshold(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    const BinaryMask roi = mask_or_all(c, "mask", img.width, img.height);
    const std::string method = str(c, "method");
    const auto pol = polarity(str(c, "polarity"));
    json rep;
    BinaryMask m;
    if (method == "local") {
        m = mask_and(threshold::local_adaptive_threshold(img, pol), roi);
    } else {
        const auto h = threshold::histogram(img, &roi);
        threshold::ThresholdResult t;
        if (method == "iots")
            t = threshold::iots(h, c.at("eps"));
        else if (method == "otsu")
            t = threshold::otsu(h);
        else
            throw ConfigError("method must be iots, otsu or local");
        m = mask_and(threshold::binarize(img, t.theta, pol), roi);
        rep = {{"theta", t.theta}, {"mu1", finite(t.mu1)}, {"mu2", finite(t.mu2)}, {"iterations", t.iterations}};
    }
    rep["foreground"] = count_nonzero(m);
    io::write_mask((out / "mask.png").string(), m);
    write_json(out / "report.json", rep);
}

void run_fibroid(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    const BinaryMask roi = mask_or_all(c, "roi", img.width, img.height);
    region::FibroidConfig f;
    f.split.mean_hi = c.at("mean-hi");
    f.split.rho_min = c.at("rho-min");
    const BinaryMask m = region::fibroid_pipeline(img, roi, f);
    io::write_mask((out / "mask.png").string(), m);
    write_json(out / "report.json", {{"area", count_nonzero(m)}});
}

void run_gtv_fcm(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    const BinaryMask roi = mask_or_all(c, "roi", img.width, img.height);
    cluster::GtvConfig g;
    g.fcm = fcm_cfg(c, 2);
    g.min_area = c.at("min-area");
    const auto res = cluster::gtv_pipeline(img, roi, g);
    BinaryMask m = res.mask;
    if (c.at("necrosis").get<bool>())
        m = cluster::necrosis_inclusion(img, roi, res.pre_hull, res.mask, fcm_cfg(c, 3));
    io::write_mask((out / "mask.png").string(), m);
    write_json(out / "report.json", {{"area", count_nonzero(m)}});
}

void run_next(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    const BinaryMask gtv = io::read_mask(need(c, "gtv"));
    cluster::NextConfig n;
    n.fcm = fcm_cfg(c, 2);
    const BinaryMask m = cluster::next_pipeline(img, gtv, n);
    io::write_mask((out / "necrosis.png").string(), m);
    write_json(out / "report.json", {{"area", count_nonzero(m)}});
}

void run_prostate(const json& c, const fs::path& out) {
    const GrayImage t2 = io::read_gray(need(c, "t2"));
    const std::string t1p = str(c, "t1");
    const GrayImage t1 = t1p.empty() ? t2 : io::read_gray(t1p);
    const BinaryMask roi = mask_or_all(c, "roi", t2.width, t2.height);
    cluster::ProstateConfig p;
    p.fcm = fcm_cfg(c, 3);
    p.use_t1 = !t1p.empty();
    p.min_area = c.at("min-area");
    const BinaryMask m = cluster::prostate_pipeline(t2, t1, roi, p);
    io::write_mask((out / "mask.png").string(), m);
    write_json(out / "report.json", {{"area", count_nonzero(m)}});
}

json overlap_row(const BinaryMask& seg, const BinaryMask& gold) {
    const auto o = metrics::overlap_metrics(seg, gold);
    return {{"dsc", finite(o.dsc)}, {"ji", finite(o.ji)}, {"sen", finite(o.sen)}, {"spc", finite(o.spc)}};
}

void run_gtvcut(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    const auto b = numbers(need(c, "bbox"));
    if (b.size() != 4) throw ConfigError("bbox must be x0,y0,x1,y1");
    const Rect r{static_cast<int>(b[0]), static_cast<int>(b[1]), static_cast<int>(b[2] - b[0]),
                 static_cast<int>(b[3] - b[1])};
    const BinaryMask m = graph::gtvcut_pipeline(img, r, similarity(str(c, "similarity")));
    io::write_mask((out / "mask.png").string(), m);
    json rep = {{"area", count_nonzero(m)}};
    if (!str(c, "truth").empty()) rep["vs_truth"] = overlap_row(m, io::read_mask(str(c, "truth")));
    write_json(out / "report.json", rep);
}

void run_rw(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    graph::SeedSet s{points(need(c, "fg")), points(need(c, "bg"))};
    graph::RwOptions o;
    o.threshold = c.at("threshold");
    const std::string solver = str(c, "solver");
    o.solver = solver == "cg" ? graph::RwSolver::CG : solver == "dense" ? graph::RwSolver::Dense : graph::RwSolver::Auto;
    const auto res = graph::random_walker(graph::rw_build(img, c.at("beta")), s, o);
    GrayImage prob(img.width, img.height);
    for (std::size_t i = 0; i < prob.size(); ++i)
        prob[i] = static_cast<std::uint16_t>(std::floor(res.probability[i] * 255.0 + 0.5));
    io::write_mask((out / "mask.png").string(), res.mask);
    io::write_gray((out / "probability.png").string(), prob);
    write_json(out / "report.json", {{"solver", res.solver}, {"area", count_nonzero(res.mask)}});
}

void run_medga_enhance(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    const BinaryMask roi = mask_or_all(c, "roi", img.width, img.height);
    const auto res = medga::medga_run(img, roi, medga_cfg(c));
    io::write_gray((out / "enhanced.png").string(), res.enhanced);
    const auto m = metrics::enhancement_metrics(img, res.enhanced);
    write_json(out / "report.json", {{"fitness", res.best.fitness},
                                     {"psnr", finite(m.psnr)},
                                     {"edges", m.num_edges},
                                     {"ambe", m.ambe},
                                     {"ssim", m.ssim}});
}

void run_medga_segment(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    const BinaryMask roi = mask_or_all(c, "roi", img.width, img.height);
    const std::string post = str(c, "post");
    if (post != "fibroid" && post != "brain") throw ConfigError("post must be fibroid or brain");
    const auto res = medga::medga_segment(img, roi, medga_cfg(c),
                                          post == "fibroid" ? medga::PostProc::Fibroid : medga::PostProc::Brain);
    io::write_gray((out / "enhanced.png").string(), res.ga.enhanced);
    io::write_mask((out / "mask.png").string(), res.mask);
    write_json(out / "report.json", {{"theta", res.theta}, {"area", count_nonzero(res.mask)}});
}

void run_colony(const json& c, const fs::path& out) {
    const ColorImage plate = io::read_color(need(c, "input"));
    const int n = c.at("wells");
    const double r = c.at("radius");
    const auto det = colony::detect_wells(plate, r, n);
    if (!det.ok) throw AlgorithmError("colony: found " + std::to_string(det.candidates) + " of " + std::to_string(n) + " wells");
    const auto wells = colony::order_wells(det.wells);
    const std::string masking = str(c, "masking");
    if (masking != "white" && masking != "black") throw ConfigError("masking must be white or black");
    const auto stain = colony::stain_image(plate);
    std::ofstream csv(out / "wells.csv");
    if (!csv) throw IoError("cannot write wells.csv");
    csv << "well,x,y,r,acc\n";
    json rows = json::array();
    BinaryMask all(plate.width, plate.height);
    for (std::size_t i = 0; i < wells.size(); ++i) {
        const BinaryMask m =
            colony::extract_colonies(stain, wells[i], masking == "white" ? colony::Masking::White : colony::Masking::Black);
        all = mask_or(all, m);
        const double a = colony::acc(m, wells[i]);
        csv << i + 1 << ',' << wells[i].x << ',' << wells[i].y << ',' << wells[i].r << ',' << a << '\n';
        rows.push_back({{"well", i + 1}, {"x", wells[i].x}, {"y", wells[i].y}, {"acc", a}});
    }
    io::write_mask((out / "colonies.png").string(), all);
    write_json(out / "report.json", {{"sensitivity", det.sensitivity}, {"wells", rows}});
}

void run_acdc(const json& c, const fs::path& out) {
    const GrayImage img = io::read_gray(need(c, "input"));
    acdc::AcdcConfig a;
    a.tophat_radius = c.at("tophat-radius");
    a.min_area = c.at("min-area");
    const auto rep = acdc::acdc_segment(img, a);
    io::write_labels((out / "labels.png").string(), rep.labels);
    std::ofstream csv(out / "cells.csv");
    if (!csv) throw IoError("cannot write cells.csv");
    csv << "label,area,cx,cy,eccentricity,extent\n";
    for (const auto& f : rep.cells)
        csv << f.label << ',' << f.area << ',' << f.cx << ',' << f.cy << ',' << f.eccentricity << ',' << f.extent << '\n';
    write_json(out / "report.json", {{"count", rep.count}});
}

void run_register(const json& c, const fs::path& out) {
    const GrayImage mov = io::read_gray(need(c, "moving"));
    const GrayImage fix = io::read_gray(need(c, "fixed"));
    reg::RegisterConfig r;
    const std::string metric = str(c, "metric");
    if (metric != "mi" && metric != "nmi") throw ConfigError("metric must be mi or nmi");
    r.metric = metric == "mi" ? reg::Metric::MI : reg::Metric::NMI;
    r.bins = c.at("bins");
    r.smooth_histogram = c.at("smooth");
    r.refine = c.at("refine").get<bool>() ? reg::Refine::CoordinateDescent : reg::Refine::None;
    r.pso.particles = c.at("particles");
    r.pso.t_max = c.at("iterations");
    r.pso.seed = c.at("seed");
    r.pso.p_c = c.at("p-c");
    r.pso.c_ret = c.at("c-ret");
    r.pso.chi_mode = c.at("chi");
    if (r.pso.chi_mode) r.pso.c_soc = r.pso.c_cog = 2.05;
    static const std::map<std::string, reg::PsoVariant> variants{{"standard", reg::PsoVariant::Standard},
                                                                 {"initial", reg::PsoVariant::InitialOrientation},
                                                                 {"hybrid", reg::PsoVariant::Hybrid},
                                                                 {"subpopulation", reg::PsoVariant::Subpopulation},
                                                                 {"decaying", reg::PsoVariant::Decaying}};
    const auto v = variants.find(str(c, "variant"));
    if (v == variants.end()) throw ConfigError("unknown PSO variant");
    r.pso.variant = v->second;
    const auto res = reg::register_images(mov, fix, r);
    reg::save_transform((out / "transform.txt").string(), res.transform, (mov.width - 1) / 2.0, (mov.height - 1) / 2.0);
    io::write_gray((out / "registered.png").string(), reg::apply_transform(mov, res.transform));
    const auto& t = res.transform;
    json rep = {{"metric", res.metric},
                {"tx", t.tx},
                {"ty", t.ty},
                {"rotation_deg", t.rotation * 180.0 / std::numbers::pi},
                {"scale_x", t.scale_x},
                {"scale_y", t.scale_y},
                {"shear", t.shear},
                {"iterations", res.pso.iterations}};
    if (!str(c, "truth").empty()) {
        const auto truth = reg::load_transform(str(c, "truth"));
        rep["translation_error"] = std::hypot(t.tx - truth.tx, t.ty - truth.ty);
        rep["rotation_error_deg"] = std::abs(t.rotation - truth.rotation) * 180.0 / std::numbers::pi;
    }
    write_json(out / "report.json", rep);
}

void run_metrics(const json& c, const fs::path& out) {
    json rep;
    std::ostringstream header, row;
    auto col = [&](const char* name, double v) {
        header << (header.tellp() > 0 ? "," : "") << name;
        row << (row.tellp() > 0 ? "," : "") << v;
        rep[name] = finite(v);
    };
    const bool seg_given = !str(c, "seg").empty() || !str(c, "gold").empty();
    if (seg_given) {
        const BinaryMask s = io::read_mask(need(c, "seg")), g = io::read_mask(need(c, "gold"));
        const auto o = metrics::overlap_metrics(s, g);
        col("dsc", o.dsc);
        col("ji", o.ji);
        col("sen", o.sen);
        col("spc", o.spc);
        col("fpr", o.fpr);
        col("fnr", o.fnr);
        if (count_nonzero(s) > 0 && count_nonzero(g) > 0) {
            const auto d = metrics::distance_metrics(s, g);
            col("avg_d", d.avg_d);
            col("max_d", d.max_d);
            col("hd", d.hd);
            col("mhd", d.mhd);
        }
        if (count_nonzero(g) > 0) {
            const auto v = metrics::volume_metrics(s, g);
            col("avd", v.avd);
            col("vs", v.vs);
        }
    }
    if (!str(c, "orig").empty() || !str(c, "enh").empty()) {
        const GrayImage a = io::read_gray(need(c, "orig")), b = io::read_gray(need(c, "enh"));
        metrics::EnhancementOptions opt;
        opt.remap = c.at("remap");
        const auto e = metrics::enhancement_metrics(a, b, opt);
        col("psnr", e.psnr);
        col("edges", static_cast<double>(e.num_edges));
        col("ambe", e.ambe);
        col("ssim", e.ssim);
    }
    if (rep.is_null()) throw ConfigError("metrics: give --seg/--gold and/or --orig/--enh");
    std::ofstream csv(out / "report.csv");
    if (!csv) throw IoError("cannot write report.csv");
    csv << header.str() << '\n' << row.str() << '\n';
    write_json(out / "report.json", rep);
}

void run_phantom(const json& c, const fs::path& out) {
    const std::string kind = str(c, "kind");
    const std::uint64_t seed = c.at("seed");
    const int size = c.at("size");
    json rep = {{"kind", kind}, {"seed", seed}};
    auto box = [](const Rect& r) { return json{r.x, r.y, r.x + r.width, r.y + r.height}; };
    if (kind == "bimodal-blob" || kind == "bimodal") {
        phantom::BlobParams p;
        if (size > 0) p.size = size;
        p.dark_target = c.at("dark-target");
        const auto ph = phantom::bimodal_blob(seed, p);
        io::write_gray((out / "image.png").string(), ph.image);
        io::write_mask((out / "truth.png").string(), ph.truth);
        io::write_mask((out / "roi.png").string(), ph.roi);
        rep["bbox"] = box(ph.bbox);
    } else if (kind == "gtv-blob") {
        const auto ph = phantom::gtv_blob(seed, c.at("dark-core"));
        io::write_gray((out / "image.png").string(), ph.image);
        io::write_mask((out / "truth.png").string(), ph.truth);
        io::write_mask((out / "roi.png").string(), ph.roi);
        rep["bbox"] = box(ph.bbox);
    } else if (kind == "mixture") {
        phantom::MixtureParams p;
        if (size > 0) p.size = size;
        const auto ph = phantom::bimodal_mixture(seed, p);
        io::write_gray((out / "image.png").string(), ph.image);
        io::write_mask((out / "truth.png").string(), ph.truth);
        io::write_mask((out / "roi.png").string(), ph.roi);
    } else if (kind == "prostate") {
        const auto ph = phantom::prostate(seed, size > 0 ? size : 96);
        io::write_gray((out / "t2.png").string(), ph.t2);
        io::write_gray((out / "t1.png").string(), ph.t1);
        io::write_mask((out / "roi.png").string(), ph.roi);
        io::write_mask((out / "truth.png").string(), ph.truth);
    } else if (kind == "plate") {
        phantom::PlateParams p;
        p.wells = c.at("wells");
        p.dx = c.at("dx");
        p.dy = c.at("dy");
        p.angle_deg = c.at("angle");
        p.half_covered = c.at("half-covered");
        const auto ph = phantom::plate(seed, p);
        io::write_color((out / "plate.png").string(), ph.image);
        std::ofstream csv(out / "wells.csv");
        if (!csv) throw IoError("cannot write wells.csv");
        csv << std::setprecision(10) << "well,x,y,r,coverage\n";
        for (std::size_t i = 0; i < ph.wells.size(); ++i)
            csv << i + 1 << ',' << ph.wells[i].x << ',' << ph.wells[i].y << ',' << ph.wells[i].r << ','
                << ph.coverage[i] << '\n';
        rep["wells"] = ph.wells.size();
        rep["radius"] = ph.radius;
    } else if (kind == "nuclei") {
        phantom::NucleiParams p;
        if (size > 0) p.size = size;
        p.count = c.at("count");
        p.overlapping_pairs = c.at("overlap");
        const auto ph = phantom::nuclei(seed, p);
        io::write_gray((out / "image.png").string(), ph.image);
        io::write_labels((out / "truth_labels.png").string(), ph.truth);
        rep["count"] = ph.truth.count;
    } else if (kind == "register-pair") {
        reg::AffineTransform2D t;
        t.tx = c.at("tx");
        t.ty = c.at("ty");
        t.rotation = c.at("rot").get<double>() * std::numbers::pi / 180.0;
        t.scale_x = c.at("sx");
        t.scale_y = c.at("sy");
        t.shear = c.at("shear");
        const auto ph = phantom::register_pair(seed, t, size > 0 ? size : 112);
        io::write_gray((out / "moving.png").string(), ph.moving);
        io::write_gray((out / "fixed.png").string(), ph.fixed);
        const double cc = (ph.moving.width - 1) / 2.0;
        reg::save_transform((out / "truth_transform.txt").string(), t, cc, cc);
    } else {
        throw ConfigError("unknown phantom kind '" + kind + "'");
    }
    write_json(out / "report.json", rep);
}

std::vector<Opt> fcm_opts() {
    return {{"seed", 1, "RNG seed"},
            {"fuzziness", 2.0, "FCM fuzzifier m"},
            {"eps", 1e-6, "FCM stopping tolerance"},
            {"max-iter", 300, "FCM iteration cap"}};
}

std::vector<Opt> medga_opts() {
    return {{"seed", 1, "RNG seed"},
            {"population", 100, "population size"},
            {"generations", 100, "generations"},
            {"p-crossover", 0.9, "crossover rate"},
            {"p-mutation", 0.01, "mutation rate"},
            {"tournament", 20, "tournament size"}};
}

template <class... V>
std::vector<Opt> join(std::vector<Opt> a, const V&... rest) {
    (a.insert(a.end(), rest.begin(), rest.end()), ...);
    return a;
}

std::vector<Command> commands() {
    return {
        {"threshold", "global or local thresholding",
         {{"input", "", "gray image"},
          {"mask", "", "restrict to mask"},
          {"method", "iots", "iots | otsu | local"},
          {"polarity", "above", "above | below"},
          {"eps", 0.5, "IOTS tolerance"}},
         run_threshold},
        {"fibroid", "split-and-merge + region growing in a uterus ROI",
         {{"input", "", "gray image"}, {"roi", "", "uterus mask"}, {"mean-hi", 0.58, "upper mean"}, {"rho-min", 4, "smallest quadrant"}},
         run_fibroid},
        {"gtv-fcm", "FCM gross tumour volume",
         join(std::vector<Opt>{{"input", "", "gray image"}, {"roi", "", "ROI mask"}, {"min-area", 10, "small-area cut"},
                               {"necrosis", false, "include necrotic components"}},
              fcm_opts()),
         run_gtv_fcm},
        {"next", "necrosis extraction inside a GTV",
         join(std::vector<Opt>{{"input", "", "gray image"}, {"gtv", "", "GTV mask"}}, fcm_opts()), run_next},
        {"prostate", "multispectral prostate gland",
         join(std::vector<Opt>{{"t2", "", "T2 image"}, {"t1", "", "T1 image (optional)"}, {"roi", "", "ROI mask"},
                               {"min-area", 500, "small-area cut"}},
              fcm_opts()),
         run_prostate},
        {"gtvcut", "cellular automaton in a bounding box",
         {{"input", "", "gray image"},
          {"bbox", "", "x0,y0,x1,y1 (end exclusive)"},
          {"similarity", "gm", "gm | ifd"},
          {"truth", "", "optional truth mask for a metrics row"}},
         run_gtvcut},
        {"rw", "random walker",
         {{"input", "", "gray image"},
          {"fg", "", "foreground seeds x,y;x,y"},
          {"bg", "", "background seeds x,y;x,y"},
          {"beta", 90.0, "edge weight beta"},
          {"threshold", 0.5, "probability cut"},
          {"solver", "auto", "auto | cg | dense"}},
         run_rw},
        {"medga-enhance", "genetic histogram enhancement",
         join(std::vector<Opt>{{"input", "", "gray image"}, {"roi", "", "ROI mask"}}, medga_opts()), run_medga_enhance},
        {"medga-segment", "enhancement + IOTS segmentation",
         join(std::vector<Opt>{{"input", "", "gray image"}, {"roi", "", "ROI mask"}, {"post", "fibroid", "fibroid | brain"}},
              medga_opts()),
         run_medga_segment},
        {"colony", "well detection and area coverage",
         {{"input", "", "RGB plate image"},
          {"wells", 6, "number of wells"},
          {"radius", 36.0, "well radius in px"},
          {"masking", "white", "white | black"}},
         run_colony},
        {"acdc", "nuclei counting",
         {{"input", "", "gray image"}, {"tophat-radius", 21, "top-hat disk radius"}, {"min-area", 40, "small-area cut"}},
         run_acdc},
        {"register", "PSO affine registration",
         {{"moving", "", "moving image"},
          {"fixed", "", "fixed image"},
          {"metric", "mi", "mi | nmi"},
          {"bins", 64, "joint histogram bins"},
          {"smooth", true, "smooth the joint histogram"},
          {"refine", true, "coordinate-descent polish"},
          {"variant", "standard", "standard | initial | hybrid | subpopulation | decaying"},
          {"particles", 30, "swarm size"},
          {"iterations", 200, "T_max"},
          {"p-c", 0.2, "crossover rate (hybrid, subpopulation)"},
          {"c-ret", 0.5, "return acceleration (initial, decaying)"},
          {"chi", false, "constriction mode"},
          {"seed", 1, "RNG seed"},
          {"truth", "", "optional truth transform file"}},
         run_register},
        {"metrics", "segmentation and enhancement metrics",
         {{"seg", "", "segmentation mask"},
          {"gold", "", "gold-standard mask"},
          {"orig", "", "original image"},
          {"enh", "", "enhanced image"},
          {"remap", true, "remap enhanced range before PSNR/AMBE/SSIM"}},
         run_metrics},
        {"phantom", "synthetic images with ground truth",
         {{"kind", "bimodal-blob", "bimodal-blob | gtv-blob | mixture | prostate | plate | nuclei | register-pair"},
          {"seed", 1, "RNG seed"},
          {"size", 0, "image side (0: kind default)"},
          {"dark-target", false, "bimodal-blob: dark target in a bright ROI"},
          {"dark-core", false, "gtv-blob: necrotic core"},
          {"wells", 6, "plate: 6, 12 or 24"},
          {"dx", 0.0, "plate: translation x"},
          {"dy", 0.0, "plate: translation y"},
          {"angle", 0.0, "plate: rotation in degrees"},
          {"half-covered", false, "plate: stain the left half of every well"},
          {"count", 50, "nuclei: count (pairs when overlapping)"},
          {"overlap", false, "nuclei: overlapping pairs"},
          {"tx", 7.0, "register-pair: translation x"},
          {"ty", -4.0, "register-pair: translation y"},
          {"rot", 10.0, "register-pair: rotation in degrees"},
          {"sx", 1.0, "register-pair: scale x"},
          {"sy", 1.0, "register-pair: scale y"},
          {"shear", 0.0, "register-pair: shear"}},
         run_phantom},
    };
}

json convert(const std::string& raw, const json& def, const std::string& key) {
    try {
        if (def.is_boolean()) {
            if (raw == "true" || raw == "1") return true;
            if (raw == "false" || raw == "0") return false;
            throw ConfigError("");
        }
        std::size_t used = 0;
        if (def.is_number_integer()) {
            const long long v = std::stoll(raw, &used);
            if (used != raw.size() || (def.is_number_unsigned() && v < 0)) throw ConfigError("");
            return v;
        }
        if (def.is_number()) {
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw ConfigError("");
            return v;
        }
        return raw;
    } catch (const std::exception&) {
        throw ConfigError("invalid value for " + key + ": '" + raw + "'");
    }
}

void merge_file_values(json& cfg, const json& src, const std::string& where) {
    for (const auto& [k, v] : src.items()) {
        if (!cfg.contains(k)) throw ConfigError("unknown key '" + k + "' in " + where);
        const json& d = cfg[k];
        const bool ok = (d.is_boolean() && v.is_boolean()) || (d.is_string() && v.is_string()) ||
                        (d.is_number_integer() && v.is_number_integer()) || (d.is_number_float() && v.is_number());
        if (!ok) throw ConfigError("wrong type for '" + k + "' in " + where);
        cfg[k] = d.is_number_float() ? json(v.get<double>()) : v;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"medimg: medical image segmentation, enhancement and registration pipelines"};
    app.require_subcommand(1);
    const auto cmds = commands();
    std::string config_path, out_dir;
    std::vector<std::map<std::string, std::string>> raw(cmds.size());
    std::vector<std::map<std::string, CLI::Option*>> given(cmds.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        CLI::App* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--out", out_dir, "output directory")->default_val("out");
        for (const Opt& o : cmds[i].opts) {
            raw[i][o.name];
            const std::string def = o.def.is_string() ? o.def.get<std::string>() : o.def.dump();
            given[i][o.name] = sub->add_option("--" + o.name, raw[i][o.name], o.help + " [" + def + "]");
        }
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        std::size_t which = 0;
        while (!subs[which]->parsed()) ++which;
        const Command& cmd = cmds[which];
        json cfg = json::object();
        for (const Opt& o : cmd.opts) cfg[o.name] = o.def;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw IoError("cannot read " + config_path);
            json file;
            try {
                file = json::parse(f);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config: ") + e.what());
            }
            if (!file.is_object()) throw ConfigError("config: top level must be an object");
            json top = json::object();
            for (const auto& [k, v] : file.items())
                if (!v.is_object()) top[k] = v;
            merge_file_values(cfg, top, config_path);
            if (file.contains(cmd.name)) merge_file_values(cfg, file[cmd.name], config_path + ":" + cmd.name);
        }
        for (const Opt& o : cmd.opts)
            if (given[which].at(o.name)->count() > 0) cfg[o.name] = convert(raw[which].at(o.name), o.def, o.name);

        const fs::path out = out_dir;
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw IoError("cannot create " + out.string());
        json resolved = {{"command", cmd.name}, {"config", cfg}};
        std::cout << resolved.dump(2) << std::endl;
        write_json(out / "config.json", resolved);
        cmd.run(cfg, out);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const AlgorithmError& e) {
        std::cerr << "algorithm error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 4;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "algorithm error: " << e.what() << '\n';
        return 3;
    }
}
