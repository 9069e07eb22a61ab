#include "evsom/panel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "evsom/csv.hpp"

namespace evsom {

std::optional<int> ReturnsPanel::ticker_index(const std::string& ticker) const {
    auto it = std::lower_bound(tickers.begin(), tickers.end(), ticker);
    if (it == tickers.end() || *it != ticker) return std::nullopt;
    return static_cast<int>(it - tickers.begin());
}

bool ReturnsPanel::window_valid(int i, int begin, int end) const {
    for (int t = begin; t < end; ++t) {
        if (!valid(i, t)) return false;
    }
    return true;
}

PanelLoadResult load_returns_panel(const std::filesystem::path& prices_csv, double min_coverage,
                                   ReturnKind kind) {
    csv::File f = csv::read(prices_csv, {"date", "ticker", "close"});

    PanelLoadResult result;
    std::map<std::string, std::map<Date, double>> closes;
    std::set<Date> dates;

    for (const csv::Row& r : f.rows) {
        Date d = csv::parse_date(f, r, 0);
        const std::string& ticker = r.fields[1];
        if (ticker.empty()) csv::fail(f, r, "empty ticker");
        double close = csv::parse_double(f, r, 2);
        if (close <= 0.0) {
            result.warnings.push_back(prices_csv.string() + ":" + std::to_string(r.line) +
                                      ": rejected row, non-positive close for " + ticker);
            continue;
        }
        auto [it, inserted] = closes[ticker].emplace(d, close);
        if (!inserted) {
            csv::fail(f, r, "duplicate observation for (" + d.to_string() + ", " + ticker + ")");
        }
        dates.insert(d);
    }

    if (dates.size() < 2) {
        throw std::runtime_error(prices_csv.string() +
                                 ": need at least two distinct dates to form returns");
    }

    const std::vector<Date> price_dates(dates.begin(), dates.end());
    const int t_len = static_cast<int>(price_dates.size()) - 1;

    ReturnsPanel& panel = result.panel;
    panel.calendar.assign(price_dates.begin() + 1, price_dates.end());

    std::vector<std::string> kept;
    std::vector<Eigen::VectorXd> kept_returns;
    std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> kept_valid;

    for (const auto& [ticker, series] : closes) {
        Eigen::VectorXd ret = Eigen::VectorXd::Zero(t_len);
        Eigen::Array<bool, Eigen::Dynamic, 1> ok =
            Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(t_len, false);
        int n_valid = 0;
        for (int t = 0; t < t_len; ++t) {
            auto prev = series.find(price_dates[static_cast<std::size_t>(t)]);
            auto cur = series.find(price_dates[static_cast<std::size_t>(t) + 1]);
            if (prev == series.end() || cur == series.end()) continue;
            ret[t] = kind == ReturnKind::Simple ? cur->second / prev->second - 1.0
                                                : std::log(cur->second / prev->second);
            ok[t] = true;
            ++n_valid;
        }
        const double coverage = static_cast<double>(n_valid) / static_cast<double>(t_len);
        if (coverage < min_coverage) {
            result.dropped.push_back(
                {ticker, "coverage " + csv::format_short(100.0 * coverage, 4) + "% below minimum " +
                             csv::format_short(100.0 * min_coverage, 4) + "%"});
            continue;
        }
        kept.push_back(ticker);
        kept_returns.push_back(std::move(ret));
        kept_valid.push_back(std::move(ok));
    }

    panel.tickers = kept;
    panel.returns.resize(static_cast<Eigen::Index>(kept.size()), t_len);
    panel.valid.resize(static_cast<Eigen::Index>(kept.size()), t_len);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        panel.returns.row(static_cast<Eigen::Index>(i)) = kept_returns[i];
        panel.valid.row(static_cast<Eigen::Index>(i)) = kept_valid[i].transpose();
    }
    return result;
}

void save_panel_csv(const ReturnsPanel& panel, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "date";
    for (const std::string& t : panel.tickers) out << ',' << t;
    out << '\n';
    for (int t = 0; t < panel.n_days(); ++t) {
        out << panel.calendar[static_cast<std::size_t>(t)].to_string();
        for (int i = 0; i < panel.n_securities(); ++i) {
            out << ',';
            if (panel.valid(i, t)) out << csv::format_full(panel.returns(i, t));
        }
        out << '\n';
    }
    csv::write_text_file(path, out.str());
}

ReturnsPanel load_panel_csv(const std::filesystem::path& path) {
    csv::File f = csv::read_any(path);
    if (f.header.empty() || f.header[0] != "date") {
        throw std::runtime_error(path.string() + ":1: expected 'date' as first column");
    }
    ReturnsPanel panel;
    panel.tickers.assign(f.header.begin() + 1, f.header.end());
    std::set<std::string> unique(panel.tickers.begin(), panel.tickers.end());
    if (unique.size() != panel.tickers.size()) {
        throw std::runtime_error(path.string() + ":1: duplicate ticker column");
    }
    const int n = static_cast<int>(panel.tickers.size());
    const int t_len = static_cast<int>(f.rows.size());
    panel.returns = Eigen::MatrixXd::Zero(n, t_len);
    panel.valid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, t_len, false);
    panel.calendar.reserve(static_cast<std::size_t>(t_len));
    for (int t = 0; t < t_len; ++t) {
        const csv::Row& r = f.rows[static_cast<std::size_t>(t)];
        if (static_cast<int>(r.fields.size()) != n + 1) {
            csv::fail(f, r, "expected " + std::to_string(n + 1) + " fields");
        }
        panel.calendar.push_back(csv::parse_date(f, r, 0));
        for (int i = 0; i < n; ++i) {
            const std::string& cell = r.fields[static_cast<std::size_t>(i) + 1];
            if (cell.empty()) continue;
            panel.returns(i, t) = csv::parse_double(f, r, i + 1);
            panel.valid(i, t) = true;
        }
    }
    for (std::size_t t = 1; t < panel.calendar.size(); ++t) {
        if (!(panel.calendar[t - 1] < panel.calendar[t])) {
            throw std::runtime_error(path.string() + ": calendar not strictly increasing");
        }
    }
    return panel;
}

WindowIndex align_windows(const ReturnsPanel& panel, const Date& event_date, int est_len,
                          int half_window, int gap) {
    if (est_len < 1) throw std::invalid_argument("align_windows: est_len must be >= 1");
    if (half_window < 0) throw std::invalid_argument("align_windows: half_window must be >= 0");
    if (gap < 0) throw std::invalid_argument("align_windows: gap must be >= 0");

    auto idx = panel.date_index(event_date);
    if (!idx) {
        throw std::runtime_error("event date " + event_date.to_string() + " not in panel calendar");
    }
    WindowIndex w;
    w.event_index = *idx;
    w.half_window = half_window;
    w.est_end = w.event_begin() - gap;
    w.est_begin = w.est_end - est_len;
    if (w.est_begin < 0) {
        throw std::runtime_error("insufficient history before event window: need " +
                                 std::to_string(est_len + gap + half_window) + " days, have " +
                                 std::to_string(w.event_index));
    }
    if (w.event_end() > panel.n_days()) {
        throw std::runtime_error("insufficient data after event day: need " +
                                 std::to_string(half_window) + " days, have " +
                                 std::to_string(panel.n_days() - 1 - w.event_index));
    }
    return w;
}

std::optional<Date> CovariateTables::announcement_for(const std::string& ticker) const {
    auto it = announce_date.find(ticker);
    if (it == announce_date.end()) return std::nullopt;
    return it->second;
}

void load_weights_into(CovariateTables& tables, const std::filesystem::path& weights_csv) {
    csv::File f = csv::read(weights_csv, {"ticker", "w_market", "w_gpif"});
    for (const csv::Row& r : f.rows) {
        const std::string& ticker = r.fields[0];
        double wm = csv::parse_double(f, r, 1);
        double wg = csv::parse_double(f, r, 2);
        if (wm < 0.0 || wg < 0.0) csv::fail(f, r, "negative weight for " + ticker);
        if (tables.market_weight.count(ticker)) csv::fail(f, r, "duplicate ticker " + ticker);
        tables.market_weight[ticker] = wm;
        tables.fund_weight[ticker] = wg;
    }
}

void load_announcements_into(CovariateTables& tables,
                             const std::filesystem::path& announcements_csv) {
    csv::File f = csv::read(announcements_csv, {"ticker", "announce_date"});
    for (const csv::Row& r : f.rows) {
        const std::string& ticker = r.fields[0];
        if (tables.announce_date.count(ticker)) csv::fail(f, r, "duplicate ticker " + ticker);
        tables.announce_date[ticker] = csv::parse_date(f, r, 1);
    }
}

void load_rates_into(CovariateTables& tables, const std::filesystem::path& rates_csv) {
    csv::File f = csv::read(rates_csv, {"date", "rate"});
    for (const csv::Row& r : f.rows) {
        Date d = csv::parse_date(f, r, 0);
        tables.rate_series.emplace_back(d, csv::parse_double(f, r, 1));
    }
    std::sort(tables.rate_series.begin(), tables.rate_series.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < tables.rate_series.size(); ++i) {
        if (tables.rate_series[i - 1].first == tables.rate_series[i].first) {
            throw std::runtime_error(rates_csv.string() + ": duplicate rate date " +
                                     tables.rate_series[i].first.to_string());
        }
    }
}

CovariateTables load_covariates(const std::filesystem::path& weights_csv,
                                const std::filesystem::path& announcements_csv,
                                const std::filesystem::path& rates_csv) {
    CovariateTables tables;
    load_weights_into(tables, weights_csv);
    load_announcements_into(tables, announcements_csv);
    load_rates_into(tables, rates_csv);
    return tables;
}

namespace {

// Index into rate_series of the last quote with date <= d, or -1.
int last_quote_at_or_before(const std::vector<std::pair<Date, double>>& series, const Date& d) {
    int lo = 0, hi = static_cast<int>(series.size());
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (series[static_cast<std::size_t>(mid)].first <= d) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return lo - 1;
}

}  // namespace

Eigen::VectorXd align_rate_levels(const CovariateTables& tables, const std::vector<Date>& calendar,
                                  int* gap_count) {
    if (tables.rate_series.empty()) throw std::runtime_error("rate series is empty");
    Eigen::VectorXd levels(static_cast<Eigen::Index>(calendar.size()));
    int gaps = 0;
    std::size_t cursor = 0;
    for (std::size_t t = 0; t < calendar.size(); ++t) {
        while (cursor + 1 < tables.rate_series.size() &&
               tables.rate_series[cursor + 1].first <= calendar[t]) {
            ++cursor;
        }
        if (tables.rate_series[cursor].first > calendar[t]) {
            throw std::runtime_error("no interest rate on or before " + calendar[t].to_string());
        }
        if (tables.rate_series[cursor].first != calendar[t]) ++gaps;
        levels[static_cast<Eigen::Index>(t)] = tables.rate_series[cursor].second;
    }
    if (gap_count) *gap_count = gaps;
    return levels;
}

Eigen::VectorXd rate_changes(const CovariateTables& tables, const std::vector<Date>& calendar) {
    Eigen::VectorXd levels = align_rate_levels(tables, calendar);
    Eigen::VectorXd changes = Eigen::VectorXd::Zero(levels.size());
    for (Eigen::Index t = 1; t < levels.size(); ++t) {
        changes[t] = levels[t] - levels[t - 1];
    }
    if (!calendar.empty()) {
        // The first day differences against the last quote strictly before the
        // calendar starts, when one exists.
        Date before = calendar.front();
        int idx = last_quote_at_or_before(tables.rate_series, before);
        while (idx >= 0 && tables.rate_series[static_cast<std::size_t>(idx)].first == before) --idx;
        if (idx >= 0) {
            changes[0] = levels[0] - tables.rate_series[static_cast<std::size_t>(idx)].second;
        }
    }
    return changes;
}

void write_exclusions_csv(const std::vector<Exclusion>& rows, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "ticker,reason\n";
    for (const Exclusion& e : rows) out << e.ticker << ',' << e.reason << '\n';
    csv::write_text_file(path, out.str());
}

std::vector<Exclusion> read_exclusions_csv(const std::filesystem::path& path) {
    csv::File f = csv::read(path, {"ticker", "reason"});
    std::vector<Exclusion> rows;
    rows.reserve(f.rows.size());
    for (const csv::Row& r : f.rows) rows.push_back({r.fields[0], r.fields[1]});
    return rows;
}

}  // namespace evsom
