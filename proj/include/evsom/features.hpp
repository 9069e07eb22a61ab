#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evsom/calendar.hpp"
#include "evsom/event_study.hpp"
#include "evsom/market_model.hpp"
#include "evsom/panel.hpp"

namespace evsom {

/// (w_market - w_gpif) / w_market. Requires w_market > 0.
double modified_active_weight(double w_market, double w_gpif);

/// Omega = tanh(1 / d) with d the signed business-day count from announcement
/// to event (positive when the announcement precedes the event). Conventions:
/// no announcement -> 0; same day -> +1; off-calendar announcement dates map
/// to the next business day.
double announcement_proximity(int event_index, const std::optional<Date>& announce,
                              const std::vector<Date>& calendar);

struct RateCorr {
    double rho = 0.0;
    bool degenerate = false;  // zero variance in either series
};

/// Pearson correlation between security returns and daily rate changes over
/// the estimation window.
RateCorr rate_correlation(const Eigen::Ref<const Eigen::VectorXd>& returns,
                          const Eigen::Ref<const Eigen::VectorXd>& rate_changes);

struct CovariateRow {
    double maw = 0.0;
    double omega = 0.0;
    double rho = 0.0;
    bool rho_degenerate = false;
};

/// Covariates for each requested ticker. Tickers without weights are skipped
/// and reported through *missing_weights.
std::map<std::string, CovariateRow> compute_covariates(
    const ReturnsPanel& panel, const WindowIndex& windows, const CovariateTables& tables,
    const std::vector<std::string>& tickers, std::vector<std::string>* missing_weights = nullptr);

/// The standardized analysis matrix: one row per security, fixed column order
/// mAW, tCAR[-h..+h], tAR[-h..+h], rho, Omega, DWR, alpha, beta.
/// Columns are z-scored (sample std, n-1); constant columns are zeroed and
/// flagged. Means/stds are retained so reports can de-standardize.
struct FeatureMatrix {
    std::vector<std::string> tickers;
    Eigen::MatrixXd values;  // N x D, standardized
    std::vector<std::string> column_names;
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_stds;  // 0 for constant columns
    std::vector<bool> constant_flag;

    int dim() const { return static_cast<int>(column_names.size()); }
    std::optional<int> column_index(const std::string& name) const;
    double destandardize(int column, double v) const;
    double restandardize(int column, double raw) const;
};

std::vector<std::string> feature_column_names(int half_window);

/// Filename-safe slug for a feature column ("tCAR[-5]" -> "tCAR_m5").
std::string column_slug(const std::string& column_name);

/// Assembles the raw matrix in fixed column order and standardizes it.
/// The three maps must share exactly the same ticker set.
FeatureMatrix assemble_feature_matrix(const std::map<std::string, EventStats>& stats,
                                      const std::map<std::string, FitSummary>& fits,
                                      const std::map<std::string, CovariateRow>& covariates);

/// Raw (de-standardized) copy of the matrix.
Eigen::MatrixXd raw_values(const FeatureMatrix& fm);

}  // namespace evsom
