#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evsom/calendar.hpp"

namespace evsom {

struct Exclusion {
    std::string ticker;
    std::string reason;
};

/// Per-security daily returns on a shared business-day calendar.
/// `calendar[t]` is the date of return column t; an entry is usable only
/// where `valid(i, t)` is true.
struct ReturnsPanel {
    std::vector<std::string> tickers;  // unique, sorted
    std::vector<Date> calendar;        // strictly increasing return dates
    Eigen::MatrixXd returns;           // N x T
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;  // N x T

    int n_securities() const { return static_cast<int>(tickers.size()); }
    int n_days() const { return static_cast<int>(calendar.size()); }

    std::optional<int> ticker_index(const std::string& ticker) const;
    std::optional<int> date_index(const Date& d) const { return calendar_index(calendar, d); }

    /// True when security `i` has a valid return on every day of [begin, end).
    bool window_valid(int i, int begin, int end) const;
};

enum class ReturnKind { Simple, Log };

struct PanelLoadResult {
    ReturnsPanel panel;
    std::vector<Exclusion> dropped;     // securities below the coverage floor
    std::vector<std::string> warnings;  // rejected rows etc.
};

/// Loads `date,ticker,close` rows and differences them into daily returns.
/// Securities whose valid-return coverage falls below `min_coverage` are
/// dropped and reported. Non-positive closes reject the row with a warning;
/// duplicate (date, ticker) observations are an error.
PanelLoadResult load_returns_panel(const std::filesystem::path& prices_csv, double min_coverage,
                                   ReturnKind kind = ReturnKind::Simple);

/// Wide-matrix serialization (one row per date, one column per ticker, blanks
/// where invalid). Values round-trip bit-exactly.
void save_panel_csv(const ReturnsPanel& panel, const std::filesystem::path& path);
ReturnsPanel load_panel_csv(const std::filesystem::path& path);

/// Estimation/event window placement inside a panel calendar.
/// The estimation interval is half-open; the event window covers offsets
/// -half_window..+half_window around event_index.
struct WindowIndex {
    int event_index = 0;
    int est_begin = 0;
    int est_end = 0;  // half-open [est_begin, est_end)
    int half_window = 0;

    int est_len() const { return est_end - est_begin; }
    int event_begin() const { return event_index - half_window; }
    int event_end() const { return event_index + half_window + 1; }  // half-open
    int event_days() const { return 2 * half_window + 1; }
};

WindowIndex align_windows(const ReturnsPanel& panel, const Date& event_date, int est_len,
                          int half_window, int gap = 0);

/// Static holdings weights, earnings-announcement dates, and the short-rate
/// level series.
struct CovariateTables {
    std::map<std::string, double> market_weight;
    std::map<std::string, double> fund_weight;
    std::map<std::string, Date> announce_date;  // absent key = no announcement
    std::vector<std::pair<Date, double>> rate_series;  // sorted by date

    std::optional<Date> announcement_for(const std::string& ticker) const;
};

CovariateTables load_covariates(const std::filesystem::path& weights_csv,
                                const std::filesystem::path& announcements_csv,
                                const std::filesystem::path& rates_csv);

// Individual loaders for stages that need only part of the tables.
void load_weights_into(CovariateTables& tables, const std::filesystem::path& weights_csv);
void load_announcements_into(CovariateTables& tables, const std::filesystem::path& announcements_csv);
void load_rates_into(CovariateTables& tables, const std::filesystem::path& rates_csv);

/// Rate level on each calendar date, forward-filled from the most recent
/// quote on or before it. Counts calendar dates without an exact quote into
/// *gap_count. Throws if the series starts after the first calendar date.
Eigen::VectorXd align_rate_levels(const CovariateTables& tables, const std::vector<Date>& calendar,
                                  int* gap_count = nullptr);

/// Daily first differences of the forward-filled rate level. The change on
/// calendar[0] uses the last quote strictly before it when available,
/// otherwise 0.
Eigen::VectorXd rate_changes(const CovariateTables& tables, const std::vector<Date>& calendar);

void write_exclusions_csv(const std::vector<Exclusion>& rows, const std::filesystem::path& path);
std::vector<Exclusion> read_exclusions_csv(const std::filesystem::path& path);

}  // namespace evsom
