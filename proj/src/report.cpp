#include "evsom/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "evsom/csv.hpp"

namespace evsom {

Eigen::MatrixXi cell_counts(const SomMap& map) {
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(map.rows, map.cols);
    for (int label : map.labels) {
        auto [i, j] = map.cell_coords(label);
        counts(i, j) += 1;
    }
    return counts;
}

CellGrid component_plane(const SomMap& map, const FeatureMatrix& meta, int column) {
    if (column < 0 || column >= meta.dim()) {
        throw std::invalid_argument("component_plane: unknown column " + std::to_string(column));
    }
    CellGrid grid;
    grid.rows = map.rows;
    grid.cols = map.cols;
    grid.counts = cell_counts(map);
    grid.values.resize(map.rows, map.cols);
    for (int i = 0; i < map.rows; ++i) {
        for (int j = 0; j < map.cols; ++j) {
            grid.values(i, j) = meta.destandardize(column, map.refs(map.cell_index(i, j), column));
        }
    }
    return grid;
}

CellGrid empirical_plane(const SomMap& map, const std::vector<std::string>& tickers,
                         const std::map<std::string, double>& raw_by_ticker) {
    if (tickers.size() != map.labels.size()) {
        throw std::invalid_argument("empirical_plane: tickers do not align with labels");
    }
    CellGrid grid;
    grid.rows = map.rows;
    grid.cols = map.cols;
    grid.counts = Eigen::MatrixXi::Zero(map.rows, map.cols);
    grid.values = Eigen::MatrixXd::Zero(map.rows, map.cols);
    for (std::size_t k = 0; k < tickers.size(); ++k) {
        auto it = raw_by_ticker.find(tickers[k]);
        if (it == raw_by_ticker.end()) {
            throw std::invalid_argument("empirical_plane: no raw value for " + tickers[k]);
        }
        auto [i, j] = map.cell_coords(map.labels[k]);
        grid.values(i, j) += it->second;
        grid.counts(i, j) += 1;
    }
    for (int i = 0; i < map.rows; ++i) {
        for (int j = 0; j < map.cols; ++j) {
            if (grid.counts(i, j) > 0) grid.values(i, j) /= grid.counts(i, j);
        }
    }
    return grid;
}

std::string to_string(StatKind kind) { return kind == StatKind::AR ? "AR" : "CAR"; }

StatKind stat_kind_from(const std::string& text) {
    if (text == "AR") return StatKind::AR;
    if (text == "CAR") return StatKind::CAR;
    throw std::invalid_argument("unknown statistic kind '" + text + "'");
}

CellGrid significance_plane(const SomMap& map, const std::vector<std::string>& tickers,
                            const std::map<std::string, EventStats>& stats, int offset,
                            double crit, StatKind kind) {
    if (tickers.size() != map.labels.size()) {
        throw std::invalid_argument("significance_plane: tickers do not align with labels");
    }
    CellGrid grid;
    grid.rows = map.rows;
    grid.cols = map.cols;
    grid.counts = Eigen::MatrixXi::Zero(map.rows, map.cols);
    grid.values = Eigen::MatrixXd::Zero(map.rows, map.cols);
    for (std::size_t k = 0; k < tickers.size(); ++k) {
        auto it = stats.find(tickers[k]);
        if (it == stats.end()) {
            throw std::invalid_argument("significance_plane: no event stats for " + tickers[k]);
        }
        const EventStats& es = it->second;
        const int h = es.half_window();
        if (offset < -h || offset > h) {
            throw std::invalid_argument("significance_plane: offset out of event window");
        }
        const Eigen::Index tau = offset + h;
        const double t = kind == StatKind::AR ? es.t_ar[tau] : es.t_car[tau];
        auto [i, j] = map.cell_coords(map.labels[k]);
        if (std::abs(t) > crit) grid.values(i, j) += 1.0;
        grid.counts(i, j) += 1;
    }
    for (int i = 0; i < map.rows; ++i) {
        for (int j = 0; j < map.cols; ++j) {
            if (grid.counts(i, j) > 0) grid.values(i, j) /= grid.counts(i, j);
        }
    }
    return grid;
}

namespace {

struct Rgb {
    double r, g, b;
};

// Anchor ramps sampled at evenly spaced stops.
const std::vector<Rgb>& palette_anchors(const std::string& name) {
    static const std::vector<Rgb> viridis = {
        {0.267004, 0.004874, 0.329415}, {0.282623, 0.140926, 0.457517},
        {0.253935, 0.265254, 0.529983}, {0.206756, 0.371758, 0.553117},
        {0.163625, 0.471133, 0.558148}, {0.127568, 0.566949, 0.550556},
        {0.134692, 0.658636, 0.517649}, {0.266941, 0.748751, 0.440573},
        {0.477504, 0.821444, 0.318195}, {0.741388, 0.873449, 0.149561},
        {0.993248, 0.906157, 0.143936}};
    static const std::vector<Rgb> heat = {{0.0, 0.0, 0.5},  {0.0, 0.35, 1.0}, {0.3, 0.7, 1.0},
                                          {0.9, 0.95, 0.9}, {1.0, 0.7, 0.25}, {1.0, 0.35, 0.0},
                                          {0.7, 0.0, 0.0}};
    static const std::vector<Rgb> gray = {{0.95, 0.95, 0.95}, {0.05, 0.05, 0.05}};
    if (name == "viridis") return viridis;
    if (name == "heat") return heat;
    if (name == "gray") return gray;
    throw std::invalid_argument("unknown palette '" + name + "'");
}

std::string ramp_color(const std::string& palette, double pos) {
    const auto& anchors = palette_anchors(palette);
    pos = std::clamp(pos, 0.0, 1.0);
    const double scaled = pos * static_cast<double>(anchors.size() - 1);
    const int lo = std::min(static_cast<int>(scaled), static_cast<int>(anchors.size()) - 2);
    const double frac = scaled - lo;
    auto mix = [&](double a, double b) { return a + frac * (b - a); };
    const Rgb c{mix(anchors[lo].r, anchors[lo + 1].r), mix(anchors[lo].g, anchors[lo + 1].g),
                mix(anchors[lo].b, anchors[lo + 1].b)};
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(c.r * 255.0)),
                  static_cast<int>(std::lround(c.g * 255.0)),
                  static_cast<int>(std::lround(c.b * 255.0)));
    return buf;
}

// Linear-interpolation quantile of a sorted sample.
double quantile_of(const std::vector<double>& sorted_values, double q) {
    const std::size_t m = sorted_values.size();
    if (m == 1) return sorted_values[0];
    const double pos = q * static_cast<double>(m - 1);
    const std::size_t lo = std::min(static_cast<std::size_t>(pos), m - 2);
    const double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

}  // namespace

int quantile_bin(const std::vector<double>& sorted_values, int bins, double v) {
    int bin = 0;
    for (int k = 1; k < bins; ++k) {
        const double edge = quantile_of(sorted_values, static_cast<double>(k) / bins);
        if (v >= edge) bin = k;
    }
    return bin;
}

std::string render_heatmap_svg(const CellGrid& grid, int bins, const std::string& palette,
                               const std::string& title) {
    if (bins < 2) throw std::invalid_argument("render_heatmap_svg: need bins >= 2");
    palette_anchors(palette);  // validate the name up front

    std::vector<double> occupied_values;
    for (int i = 0; i < grid.rows; ++i) {
        for (int j = 0; j < grid.cols; ++j) {
            if (grid.occupied(i, j)) occupied_values.push_back(grid.values(i, j));
        }
    }
    std::sort(occupied_values.begin(), occupied_values.end());

    constexpr int cell = 22;
    constexpr int pad = 12;
    constexpr int legend_h = 58;
    const int title_h = title.empty() ? 0 : 22;
    const int width = std::max(grid.cols * cell + 2 * pad, 420);
    const int height = title_h + grid.rows * cell + 2 * pad + legend_h;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"#ffffff\"/>\n";
    if (!title.empty()) {
        svg << "<text x=\"" << pad << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">"
            << title << "</text>\n";
    }
    for (int i = 0; i < grid.rows; ++i) {
        for (int j = 0; j < grid.cols; ++j) {
            std::string fill = "#cccccc";
            if (grid.occupied(i, j)) {
                const int bin = quantile_bin(occupied_values, bins, grid.values(i, j));
                fill = ramp_color(palette, bins > 1 ? static_cast<double>(bin) / (bins - 1) : 0.0);
            }
            svg << "<rect x=\"" << pad + j * cell << "\" y=\"" << title_h + pad + i * cell
                << "\" width=\"" << cell - 1 << "\" height=\"" << cell - 1 << "\" fill=\"" << fill
                << "\"/>\n";
        }
    }

    // Legend: one swatch per bin with the lower edge annotated underneath.
    const int legend_y = title_h + pad + grid.rows * cell + 14;
    const int swatch_w = std::max(18, (width - 2 * pad) / bins);
    for (int k = 0; k < bins; ++k) {
        svg << "<rect x=\"" << pad + k * swatch_w << "\" y=\"" << legend_y
            << "\" width=\"" << swatch_w - 1 << "\" height=\"12\" fill=\""
            << ramp_color(palette, bins > 1 ? static_cast<double>(k) / (bins - 1) : 0.0)
            << "\"/>\n";
        double edge = 0.0;
        if (!occupied_values.empty()) {
            edge = k == 0 ? occupied_values.front()
                          : quantile_of(occupied_values, static_cast<double>(k) / bins);
        }
        svg << "<text x=\"" << pad + k * swatch_w << "\" y=\"" << legend_y + 24
            << "\" font-family=\"sans-serif\" font-size=\"9\">" << csv::format_short(edge, 4)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void render_heatmap(const CellGrid& grid, int bins, const std::string& palette,
                    const std::filesystem::path& out_path, const std::string& title) {
    csv::write_text_file(out_path, render_heatmap_svg(grid, bins, palette, title));
}

RegionReport region_report(const SomMap& map, const std::vector<std::string>& tickers,
                           const std::vector<std::pair<int, int>>& cells,
                           const std::map<std::string, CovariateRow>& covariates,
                           const std::map<std::string, FitSummary>& fits,
                           const std::map<std::string, EventStats>& stats) {
    if (tickers.size() != map.labels.size()) {
        throw std::invalid_argument("region_report: tickers do not align with labels");
    }
    for (const auto& [i, j] : cells) {
        if (i < 0 || i >= map.rows || j < 0 || j >= map.cols) {
            throw std::invalid_argument("region_report: cell (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") out of range");
        }
    }
    std::set<int> wanted;
    for (const auto& [i, j] : cells) wanted.insert(map.cell_index(i, j));

    RegionReport report;
    for (std::size_t k = 0; k < tickers.size(); ++k) {
        if (!wanted.count(map.labels[k])) continue;
        auto [i, j] = map.cell_coords(map.labels[k]);
        RegionRow row;
        row.ticker = tickers[k];
        row.i = i;
        row.j = j;
        row.cov = covariates.at(row.ticker);
        const FitSummary& fit = fits.at(row.ticker);
        row.dwr = fit.dw;
        row.alpha = fit.alpha;
        row.beta = fit.beta;
        const EventStats& es = stats.at(row.ticker);
        row.t_ar = es.t_ar;
        row.t_car = es.t_car;
        report.rows.push_back(std::move(row));
        report.cell_counts[{i, j}] += 1;
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const RegionRow& a, const RegionRow& b) {
        return std::tie(a.i, a.j, a.ticker) < std::tie(b.i, b.j, b.ticker);
    });
    return report;
}

CumulativeSeries cumulative_residual_series(const MarketModelFit& fit, const ReturnsPanel& panel,
                                            const WindowIndex& windows, const std::string& ticker,
                                            const std::string& market_ticker) {
    auto si = panel.ticker_index(ticker);
    if (!si) throw std::runtime_error("cumulative_residual_series: unknown ticker " + ticker);
    auto mi = panel.ticker_index(market_ticker);
    if (!mi) throw std::runtime_error("cumulative_residual_series: unknown market ticker");
    if (fit.residuals.size() != windows.est_len()) {
        throw std::invalid_argument("cumulative_residual_series: fit does not match windows");
    }

    CumulativeSeries series;
    series.est_dates.assign(panel.calendar.begin() + windows.est_begin,
                            panel.calendar.begin() + windows.est_end);
    series.cum_residual = cumulate(fit.residuals);

    series.event_dates.assign(panel.calendar.begin() + windows.event_begin(),
                              panel.calendar.begin() + windows.event_end());
    const Eigen::VectorXd y_event =
        panel.returns.row(*si).segment(windows.event_begin(), windows.event_days()).transpose();
    const Eigen::VectorXd x_event =
        panel.returns.row(*mi).segment(windows.event_begin(), windows.event_days()).transpose();
    series.cum_ar = cumulate(abnormal_returns(fit, y_event, x_event));
    return series;
}

std::string cumulative_series_csv(const CumulativeSeries& series) {
    std::ostringstream out;
    out << "segment,index,date,value\n";
    for (Eigen::Index t = 0; t < series.cum_residual.size(); ++t) {
        out << "estimation," << t << ',' << series.est_dates[static_cast<std::size_t>(t)].to_string()
            << ',' << csv::format_full(series.cum_residual[t]) << '\n';
    }
    const int h = (static_cast<int>(series.cum_ar.size()) - 1) / 2;
    for (Eigen::Index t = 0; t < series.cum_ar.size(); ++t) {
        out << "event," << (static_cast<int>(t) - h) << ','
            << series.event_dates[static_cast<std::size_t>(t)].to_string() << ','
            << csv::format_full(series.cum_ar[t]) << '\n';
    }
    return out.str();
}

}  // namespace evsom
