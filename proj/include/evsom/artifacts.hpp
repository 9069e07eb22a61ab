#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "evsom/event_study.hpp"
#include "evsom/features.hpp"
#include "evsom/market_model.hpp"
#include "evsom/report.hpp"
#include "evsom/som.hpp"

namespace evsom::artifacts {

// fits.csv: ticker,alpha,beta,sigma,dw,n,flags
void write_fits_csv(const std::map<std::string, MarketModelFit>& fits,
                    const std::filesystem::path& path);
std::map<std::string, FitSummary> read_fits_csv(const std::filesystem::path& path);

// event_stats.csv: ticker,offset,ar,car,t_ar,t_car,det_ar,det_car
void write_event_stats_csv(const std::map<std::string, EventStats>& stats,
                           const std::filesystem::path& path);
std::map<std::string, EventStats> read_event_stats_csv(const std::filesystem::path& path);

// table2.csv: offset,pct_car,pct_ar
void write_table2_csv(const DetectionTable& table, const std::filesystem::path& path);
DetectionTable read_table2_csv(const std::filesystem::path& path);

/// Detection grid rows for the per-rank yes/no charts: securities ranked by
/// modified active weight and portfolios ranked by sort order, one row per
/// (level, rank, statistic kind).
struct DetectionGridRow {
    std::string level;  // "security" | "portfolio"
    int rank = 0;       // 1 = highest weight / first portfolio
    std::string id;
    StatKind kind = StatKind::AR;
    std::vector<int> detected;  // one 0/1 per offset, earliest first
};

void write_detection_grid_csv(const std::vector<DetectionGridRow>& rows, int half_window,
                              const std::filesystem::path& path);
std::vector<DetectionGridRow> read_detection_grid_csv(const std::filesystem::path& path,
                                                      int* half_window = nullptr);

// plane_<name>.csv: i,j,value,count (value blank when the cell is empty)
void write_plane_csv(const CellGrid& grid, const std::filesystem::path& path);
CellGrid read_plane_csv(const std::filesystem::path& path);

// features_{raw,std}.csv: ticker + one column per feature
void write_features_csv(const std::vector<std::string>& tickers, const Eigen::MatrixXd& values,
                        const std::vector<std::string>& column_names,
                        const std::filesystem::path& path);
struct FeatureTable {
    std::vector<std::string> tickers;
    Eigen::MatrixXd values;
    std::vector<std::string> column_names;
};
FeatureTable read_features_csv(const std::filesystem::path& path);

// feature_meta.csv: column,mean,std,constant
void write_feature_meta_csv(const FeatureMatrix& fm, const std::filesystem::path& path);
/// Rebuilds a FeatureMatrix (standardized values + meta) from the two files.
FeatureMatrix read_feature_matrix(const std::filesystem::path& std_csv,
                                  const std::filesystem::path& meta_csv);

// som_refs.csv: i,j + one column per feature dimension
// som_labels.csv: ticker,i,j,distance
// som_error.csv: t,e
void write_som_refs_csv(const SomMap& map, const std::vector<std::string>& column_names,
                        const std::filesystem::path& path);
void write_som_labels_csv(const SomMap& map, const std::vector<std::string>& tickers,
                          const std::filesystem::path& path);
void write_som_error_csv(const SomMap& map, const std::filesystem::path& path);

/// Rebuilds the grid and per-ticker labels. Label order follows `tickers`
/// (which must equal the label file's ticker set).
SomMap read_som_map(const std::filesystem::path& refs_csv, const std::filesystem::path& labels_csv,
                    const std::vector<std::string>& tickers);

}  // namespace evsom::artifacts
