#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evsom/market_model.hpp"
#include "evsom/panel.hpp"

namespace evsom {

/// Per-security abnormal returns over the event window with t-statistics and
/// two-sided detection flags. Offsets run -half_window..+half_window; index 0
/// of each vector is the earliest offset.
struct EventStats {
    std::string ticker;
    Eigen::VectorXd ar;
    Eigen::VectorXd car;   // car[tau] = sum of ar up to and including tau
    Eigen::VectorXd t_ar;
    Eigen::VectorXd t_car;
    std::vector<bool> detected_ar;
    std::vector<bool> detected_car;

    int half_window() const { return (static_cast<int>(ar.size()) - 1) / 2; }
};

/// Detection rule: two-sided Student-t at level theta, or an explicit
/// threshold override.
struct Detection {
    double theta = 0.05;
    std::optional<double> threshold_override;

    double critical_for(int dof) const;
};

/// ar[tau] = y[tau] - (alpha + beta * x[tau]).
Eigen::VectorXd abnormal_returns(const MarketModelFit& fit,
                                 const Eigen::Ref<const Eigen::VectorXd>& y_event,
                                 const Eigen::Ref<const Eigen::VectorXd>& x_event);

/// Running sum of abnormal returns.
Eigen::VectorXd cumulate(const Eigen::Ref<const Eigen::VectorXd>& ar);

struct TStats {
    Eigen::VectorXd t_ar;
    Eigen::VectorXd t_car;
};

/// t_ar[tau] = ar[tau] / sigma; t_car[tau] = car[tau] / (sigma * sqrt(L))
/// with L the number of days accumulated into car[tau]. Throws when sigma
/// is zero (perfect fit).
TStats t_statistics(const Eigen::Ref<const Eigen::VectorXd>& ar, double sigma_hat);

/// Two-sided Student-t critical value for significance level theta.
double critical_value(double theta, int dof);

EventStats make_event_stats(const std::string& ticker, const MarketModelFit& fit,
                            const Eigen::Ref<const Eigen::VectorXd>& y_event,
                            const Eigen::Ref<const Eigen::VectorXd>& x_event, double crit);

struct StudyResult {
    std::map<std::string, EventStats> stats;
    std::vector<Exclusion> skipped;  // perfect fits: t undefined
    double critical = 0.0;
    int dof = 0;
};

/// Event statistics for every fitted security; perfect fits are skipped with
/// a reason.
StudyResult study_all(const ReturnsPanel& panel, const WindowIndex& windows,
                      const FitAllResult& fits, const std::string& market_ticker,
                      const Detection& detection);

/// Sorted equal-count partition: tickers ordered by weight descending (ties by
/// ticker ascending), split into `quantile_count` contiguous groups whose
/// sizes differ by at most one.
std::vector<std::vector<std::string>> build_sorted_portfolios(
    const std::map<std::string, double>& weight_by_ticker, int quantile_count);

struct PortfolioStudy {
    std::vector<std::vector<std::string>> memberships;
    std::vector<EventStats> stats;  // ticker field carries the portfolio id
    std::vector<bool> perfect_fit;  // aligned with stats; such entries have
                                    // empty t vectors and no detections
};

/// Equal-weight portfolio returns per group, market model re-estimated on the
/// portfolio series, event statistics per portfolio.
PortfolioStudy portfolio_event_study(const std::vector<std::vector<std::string>>& memberships,
                                     const ReturnsPanel& panel, const WindowIndex& windows,
                                     const std::string& market_ticker, const Detection& detection);

struct DetectionTable {
    Eigen::VectorXd pct_ar;   // per offset, fraction in [0, 1]
    Eigen::VectorXd pct_car;
    int n_securities = 0;
    int half_window = 0;
};

DetectionTable detection_percentages(const std::map<std::string, EventStats>& stats);

}  // namespace evsom
