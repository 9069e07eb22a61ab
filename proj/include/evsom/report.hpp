#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evsom/event_study.hpp"
#include "evsom/features.hpp"
#include "evsom/som.hpp"

namespace evsom {

/// A value per grid cell plus occupancy (how many securities label there).
struct CellGrid {
    int rows = 0;
    int cols = 0;
    Eigen::MatrixXd values;
    Eigen::MatrixXi counts;

    bool occupied(int i, int j) const { return counts(i, j) > 0; }
    int total_count() const { return counts.sum(); }
};

/// Occupancy counts shared by every plane of a map.
Eigen::MatrixXi cell_counts(const SomMap& map);

/// De-standardized reference-vector component per cell.
CellGrid component_plane(const SomMap& map, const FeatureMatrix& meta, int column);

/// Mean raw per-security value per cell; unoccupied cells are masked.
/// `tickers` aligns with the map labels row-by-row.
CellGrid empirical_plane(const SomMap& map, const std::vector<std::string>& tickers,
                         const std::map<std::string, double>& raw_by_ticker);

enum class StatKind { AR, CAR };

std::string to_string(StatKind kind);
StatKind stat_kind_from(const std::string& text);

/// Fraction of each cell's securities whose |t| exceeds `crit` for the chosen
/// statistic at the given event offset.
CellGrid significance_plane(const SomMap& map, const std::vector<std::string>& tickers,
                            const std::map<std::string, EventStats>& stats, int offset,
                            double crit, StatKind kind);

/// Self-contained SVG heat map: occupied cells are binned into `bins`
/// quantile classes of the value distribution and filled from the palette
/// ramp; unoccupied cells are neutral gray. Output bytes are deterministic.
std::string render_heatmap_svg(const CellGrid& grid, int bins, const std::string& palette,
                               const std::string& title = "");

void render_heatmap(const CellGrid& grid, int bins, const std::string& palette,
                    const std::filesystem::path& out_path, const std::string& title = "");

/// Quantile bin index of each occupied cell value (exposed for tests).
int quantile_bin(const std::vector<double>& sorted_values, int bins, double v);

struct RegionRow {
    std::string ticker;
    int i = 0, j = 0;
    CovariateRow cov;
    double dwr = 0.0, alpha = 0.0, beta = 0.0;
    Eigen::VectorXd t_ar, t_car;
};

struct RegionReport {
    std::vector<RegionRow> rows;  // sorted by (i, j, ticker)
    std::map<std::pair<int, int>, int> cell_counts;
};

/// Drill-down over an explicit cell list: every security labeled in those
/// cells with its covariates, fit diagnostics, and t-statistics.
RegionReport region_report(const SomMap& map, const std::vector<std::string>& tickers,
                           const std::vector<std::pair<int, int>>& cells,
                           const std::map<std::string, CovariateRow>& covariates,
                           const std::map<std::string, FitSummary>& fits,
                           const std::map<std::string, EventStats>& stats);

struct CumulativeSeries {
    std::vector<Date> est_dates;
    Eigen::VectorXd cum_residual;  // running sum of fit residuals
    std::vector<Date> event_dates;
    Eigen::VectorXd cum_ar;        // running sum of abnormal returns
};

/// Estimation-window cumulative residuals and event-window cumulative
/// abnormal returns for one security.
CumulativeSeries cumulative_residual_series(const MarketModelFit& fit, const ReturnsPanel& panel,
                                            const WindowIndex& windows, const std::string& ticker,
                                            const std::string& market_ticker);

std::string cumulative_series_csv(const CumulativeSeries& series);

}  // namespace evsom
