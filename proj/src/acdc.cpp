#include "medimg/acdc.hpp"

#include <algorithm>
#include <cmath>

#include "medimg/metrics.hpp"
#include "medimg/threshold.hpp"

namespace medimg::acdc {

GrayImage acdc_preprocess(const GrayImage& img, const AcdcConfig& cfg) {
    validate(img);
    if (cfg.tophat_radius < 0) throw ConfigError("acdc: tophat_radius must be >= 0");
    double mean = 0.0;
    for (auto v : img.data) mean += v;
    mean /= static_cast<double>(img.size());
    double var = 0.0;
    for (auto v : img.data) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(img.size()));
    const GrayImage smooth = sd > 0.0 ? bilateral_filter(img, cfg.sigma_spatial, sd) : img;
    return white_tophat(smooth, StructuringElement::disk(cfg.tophat_radius));
}

Markers acdc_markers(const GrayImage& pre, const AcdcConfig& cfg) {
    if (cfg.open_radius < 0 || cfg.close_radius < 0 || cfg.maxima_half < 0 || cfg.marker_dilate < 0)
        throw ConfigError("acdc: radii must be >= 0");
    const auto hist = threshold::histogram(pre);
    threshold::ThresholdResult t;
    try {
        t = threshold::otsu(hist);
    } catch (const AlgorithmError&) {
        throw AlgorithmError("acdc: no foreground after thresholding");
    }
    BinaryMask cells = threshold::binarize(pre, t.theta, threshold::Polarity::Above);
    if (count_nonzero(cells) == 0) throw AlgorithmError("acdc: no foreground after thresholding");
    cells = fill_holes(cells);
    cells = open(cells, StructuringElement::disk(cfg.open_radius));
    cells = remove_small(cells, cfg.min_area);
    cells = close(cells, StructuringElement::disk(cfg.close_radius));

    const FloatImage edt = distance_transform(cells, cfg.edt_mode);
    const double top = *std::max_element(edt.data.begin(), edt.data.end());
    GrayImage edt8(cells.width, cells.height);
    if (top > 0.0)
        for (std::size_t i = 0; i < edt8.size(); ++i)
            edt8[i] = static_cast<std::uint16_t>(std::floor(255.0 * edt[i] / top + 0.5));
    BinaryMask peaks = regional_maxima(edt8, StructuringElement::square(cfg.maxima_half));
    for (std::size_t i = 0; i < peaks.size(); ++i)
        if (edt[i] <= 0.0) peaks[i] = 0;
    peaks = mask_and(dilate(peaks, StructuringElement::disk(cfg.marker_dilate)), cells);
    return {connected_components(peaks, Connectivity::Eight), std::move(cells)};
}

CellReport acdc_segment(const GrayImage& img, const AcdcConfig& cfg) {
    const GrayImage pre = acdc_preprocess(img, cfg);
    CellReport rep;
    Markers mk;
    try {
        mk = acdc_markers(pre, cfg);
    } catch (const AlgorithmError&) {
        rep.labels = LabelMap(img.width, img.height);
        return rep;  // blank field
    }
    rep.labels = LabelMap(img.width, img.height);
    if (mk.markers.count == 0) return rep;

    // background marker on the complement of the cell mask keeps basins inside the cells
    LabelMap seeds = mk.markers;
    const int bg = mk.markers.count + 1;
    for (std::size_t i = 0; i < seeds.size(); ++i)
        if (!mk.cells[i]) seeds[i] = bg;
    LabelMap ws = watershed(laplacian_magnitude(pre), seeds, Connectivity::Four);
    for (std::size_t i = 0; i < ws.size(); ++i)
        rep.labels[i] = ws[i] == bg ? 0 : ws[i];
    rep.labels.count = mk.markers.count;
    rep.count = mk.markers.count;
    rep.cells = all_features(rep.labels);
    return rep;
}

double count_correlation(const std::vector<double>& automatic, const std::vector<double>& manual) {
    if (automatic.size() < 3) throw ConfigError("count_correlation: need at least three images");
    return metrics::pearson(automatic, manual);
}

}  // namespace medimg::acdc
