#include "evsom/synth.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "evsom/calendar.hpp"
#include "evsom/csv.hpp"
#include "evsom/rng.hpp"

namespace evsom {

const char* const kMarketTicker = "MKT";

std::string to_string(GroupKind kind) {
    switch (kind) {
        case GroupKind::Earnings: return "earnings";
        case GroupKind::Rate: return "rate";
        case GroupKind::Spike: return "spike";
        case GroupKind::FundWeight: return "fund-weight";
    }
    throw std::logic_error("unreachable");
}

GroupKind group_kind_from(const std::string& text) {
    if (text == "earnings") return GroupKind::Earnings;
    if (text == "rate") return GroupKind::Rate;
    if (text == "spike") return GroupKind::Spike;
    if (text == "fund-weight") return GroupKind::FundWeight;
    throw std::invalid_argument("unknown group kind '" + text + "'");
}

void ScenarioSpec::validate() const {
    if (n_securities < 1) throw std::invalid_argument("scenario: n_securities must be >= 1");
    if (n_days < 3) throw std::invalid_argument("scenario: n_days too small");
    if (event_index < est_len + half_window) {
        throw std::invalid_argument("scenario: event_index leaves fewer than est_len + half_window prior days");
    }
    if (event_index + half_window >= n_days) {
        throw std::invalid_argument("scenario: event window runs past the calendar");
    }
    if (beta_hi < beta_lo) throw std::invalid_argument("scenario: empty beta range");
    if (noise_sigma < 0.0 || market_sigma <= 0.0 || rate_sigma < 0.0) {
        throw std::invalid_argument("scenario: sigmas must be non-negative (market_sigma > 0)");
    }
    double total = 0.0;
    for (const GroupSpec& g : groups) {
        if (g.fraction < 0.0 || g.fraction > 1.0) {
            throw std::invalid_argument("scenario: group fraction outside [0, 1]");
        }
        total += g.fraction;
    }
    if (total > 1.0 + 1e-12) throw std::invalid_argument("scenario: group fractions sum above 1");
}

namespace {

std::string ticker_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%04d", index + 1);
    return buf;
}

}  // namespace

ScenarioFiles generate_scenario(const ScenarioSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir);

    Rng rng(spec.seed);
    const int n = spec.n_securities;
    const int t_len = spec.n_days;
    const int est_begin = spec.event_index - spec.half_window - spec.est_len;
    const int est_end = spec.event_index - spec.half_window;

    // Weekday price calendar: t_len + 1 dates starting 2015-01-05 (a Monday).
    std::vector<Date> price_dates;
    price_dates.reserve(static_cast<std::size_t>(t_len) + 1);
    Date d{2015, 1, 5};
    for (int t = 0; t <= t_len; ++t) {
        price_dates.push_back(d);
        d = d.next_weekday();
    }
    // Return day t corresponds to price date t + 1.
    auto return_date = [&](int t) { return price_dates[static_cast<std::size_t>(t) + 1]; };

    // Market returns.
    Eigen::VectorXd market(t_len);
    for (int t = 0; t < t_len; ++t) market[t] = rng.normal(0.0, spec.market_sigma);

    // Rate level walk on price dates; the change on return day t is eta[t].
    Eigen::VectorXd rate_level(t_len + 1);
    Eigen::VectorXd rate_change(t_len);
    rate_level[0] = 0.5;
    for (int t = 0; t < t_len; ++t) {
        rate_change[t] = spec.rate_sigma > 0.0 ? rng.normal(0.0, spec.rate_sigma) : 0.0;
        rate_level[t + 1] = rate_level[t] + rate_change[t];
    }

    // Per-security draws.
    Eigen::VectorXd betas(n);
    for (int i = 0; i < n; ++i) betas[i] = rng.uniform(spec.beta_lo, spec.beta_hi);
    Eigen::VectorXd w_market(n), maw(n);
    for (int i = 0; i < n; ++i) {
        w_market[i] = rng.uniform(0.001, 0.01);
        maw[i] = rng.uniform(-0.5, 0.5);
    }

    // Group membership: contiguous slices of a shuffled index list.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<int> group_of(static_cast<std::size_t>(n), -1);
    std::size_t cursor = 0;
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
        auto count = static_cast<std::size_t>(
            std::llround(spec.groups[g].fraction * static_cast<double>(n)));
        count = std::min(count, order.size() - cursor);
        for (std::size_t k = 0; k < count; ++k) {
            group_of[static_cast<std::size_t>(order[cursor++])] = static_cast<int>(g);
        }
    }

    // Spike placement. Auto placement pins the chosen day's market return to
    // the exact mean of the remaining estimation-window days so the OLS
    // intercept shift is closed-form.
    std::vector<int> spike_day(spec.groups.size(), -1);
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
        if (spec.groups[g].kind != GroupKind::Spike) continue;
        int t0;
        if (spec.groups[g].timing) {
            t0 = *spec.groups[g].timing;
            if (t0 < est_begin || t0 >= est_end) {
                throw std::invalid_argument("scenario: spike timing outside estimation window");
            }
        } else {
            const auto est = market.segment(est_begin, spec.est_len);
            const double mean = est.mean();
            int best = 0;
            for (int t = 1; t < spec.est_len; ++t) {
                if (std::abs(est[t] - mean) < std::abs(est[best] - mean)) best = t;
            }
            t0 = est_begin + best;
            double sum_others = 0.0;
            for (int t = est_begin; t < est_end; ++t) {
                if (t != t0) sum_others += market[t];
            }
            market[t0] = sum_others / static_cast<double>(spec.est_len - 1);
        }
        spike_day[g] = t0;
    }

    // Earnings announcement offsets (relative to the event day).
    std::vector<int> announce_offset(static_cast<std::size_t>(n), 0);
    std::vector<bool> has_announcement(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        const int g = group_of[static_cast<std::size_t>(i)];
        if (g < 0 || spec.groups[static_cast<std::size_t>(g)].kind != GroupKind::Earnings) continue;
        const GroupSpec& gs = spec.groups[static_cast<std::size_t>(g)];
        announce_offset[static_cast<std::size_t>(i)] =
            gs.timing ? *gs.timing : rng.uniform_int(-2, 2);
        has_announcement[static_cast<std::size_t>(i)] = true;
    }

    // Security returns.
    Eigen::MatrixXd returns(n, t_len);
    for (int i = 0; i < n; ++i) {
        const int g = group_of[static_cast<std::size_t>(i)];
        const GroupKind kind =
            g >= 0 ? spec.groups[static_cast<std::size_t>(g)].kind : GroupKind::Earnings;
        const double magnitude = g >= 0 ? spec.groups[static_cast<std::size_t>(g)].magnitude : 0.0;
        for (int t = 0; t < t_len; ++t) {
            double r = betas[i] * market[t];
            if (spec.noise_sigma > 0.0) r += rng.normal(0.0, spec.noise_sigma);
            if (g >= 0 && kind == GroupKind::Rate) r += magnitude * rate_change[t];
            returns(i, t) = r;
        }
        if (g >= 0 && kind == GroupKind::Earnings) {
            returns(i, spec.event_index + announce_offset[static_cast<std::size_t>(i)]) +=
                magnitude;
        }
        if (g >= 0 && kind == GroupKind::Spike) {
            returns(i, spike_day[static_cast<std::size_t>(g)]) += magnitude;
        }
        if (g >= 0 && kind == GroupKind::FundWeight) {
            maw[i] = magnitude;
        }
    }

    // Emit CSVs.
    ScenarioFiles files;
    files.prices = out_dir / "prices.csv";
    files.weights = out_dir / "weights.csv";
    files.announcements = out_dir / "announcements.csv";
    files.rates = out_dir / "rates.csv";
    files.truth = out_dir / "truth.csv";

    {
        std::ostringstream out;
        out << "date,ticker,close\n";
        std::vector<double> price(static_cast<std::size_t>(n), 100.0);
        double market_price = 100.0;
        out << price_dates[0].to_string() << ',' << kMarketTicker << ','
            << csv::format_full(market_price) << '\n';
        for (int i = 0; i < n; ++i) {
            out << price_dates[0].to_string() << ',' << ticker_name(i) << ','
                << csv::format_full(price[static_cast<std::size_t>(i)]) << '\n';
        }
        for (int t = 0; t < t_len; ++t) {
            market_price *= 1.0 + market[t];
            out << return_date(t).to_string() << ',' << kMarketTicker << ','
                << csv::format_full(market_price) << '\n';
            for (int i = 0; i < n; ++i) {
                price[static_cast<std::size_t>(i)] *= 1.0 + returns(i, t);
                out << return_date(t).to_string() << ',' << ticker_name(i) << ','
                    << csv::format_full(price[static_cast<std::size_t>(i)]) << '\n';
            }
        }
        csv::write_text_file(files.prices, out.str());
    }
    {
        std::ostringstream out;
        out << "ticker,w_market,w_gpif\n";
        for (int i = 0; i < n; ++i) {
            const double wg = w_market[i] * (1.0 - maw[i]);
            out << ticker_name(i) << ',' << csv::format_full(w_market[i]) << ','
                << csv::format_full(wg) << '\n';
        }
        csv::write_text_file(files.weights, out.str());
    }
    {
        std::ostringstream out;
        out << "ticker,announce_date\n";
        for (int i = 0; i < n; ++i) {
            if (!has_announcement[static_cast<std::size_t>(i)]) continue;
            const int t = spec.event_index + announce_offset[static_cast<std::size_t>(i)];
            out << ticker_name(i) << ',' << return_date(t).to_string() << '\n';
        }
        csv::write_text_file(files.announcements, out.str());
    }
    {
        std::ostringstream out;
        out << "date,rate\n";
        for (int t = 0; t <= t_len; ++t) {
            out << price_dates[static_cast<std::size_t>(t)].to_string() << ','
                << csv::format_full(rate_level[t]) << '\n';
        }
        csv::write_text_file(files.rates, out.str());
    }
    {
        std::vector<TruthRow> rows;
        rows.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            TruthRow row;
            row.ticker = ticker_name(i);
            const int g = group_of[static_cast<std::size_t>(i)];
            if (g < 0) {
                row.group = "none";
            } else {
                const GroupSpec& gs = spec.groups[static_cast<std::size_t>(g)];
                row.group = to_string(gs.kind);
                row.magnitude = gs.magnitude;
                if (gs.kind == GroupKind::Earnings) {
                    row.timing = announce_offset[static_cast<std::size_t>(i)];
                } else if (gs.kind == GroupKind::Spike) {
                    row.timing = spike_day[static_cast<std::size_t>(g)];
                }
            }
            rows.push_back(std::move(row));
        }
        write_truth_csv(rows, files.truth);
    }
    return files;
}

void write_truth_csv(const std::vector<TruthRow>& rows, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "ticker,group,magnitude,timing\n";
    for (const TruthRow& row : rows) {
        out << row.ticker << ',' << row.group << ',' << csv::format_full(row.magnitude) << ',';
        if (row.timing) out << *row.timing;
        out << '\n';
    }
    csv::write_text_file(path, out.str());
}

std::vector<TruthRow> load_truth(const std::filesystem::path& path) {
    csv::File f = csv::read(path, {"ticker", "group", "magnitude", "timing"});
    std::vector<TruthRow> rows;
    rows.reserve(f.rows.size());
    for (const csv::Row& r : f.rows) {
        TruthRow row;
        row.ticker = r.fields[0];
        row.group = r.fields[1];
        row.magnitude = csv::parse_double(f, r, 2);
        if (!r.fields[3].empty()) row.timing = csv::parse_int(f, r, 3);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ConfusionRow> ground_truth_confusion(const std::map<std::string, bool>& detected,
                                                 const std::vector<TruthRow>& truth) {
    std::map<std::string, std::string> group_of;
    for (const TruthRow& row : truth) group_of[row.ticker] = row.group;

    std::map<std::string, ConfusionRow> by_kind;
    for (const auto& [ticker, is_detected] : detected) {
        auto it = group_of.find(ticker);
        if (it == group_of.end()) {
            throw std::invalid_argument("ground_truth_confusion: ticker '" + ticker +
                                        "' missing from truth");
        }
        const std::string& kind = it->second;
        ConfusionRow& row = by_kind[kind];
        row.kind = kind;
        row.total += 1;
        const bool has_event_effect = kind == "earnings" || kind == "rate";
        if (is_detected) {
            row.detected += 1;
            (has_event_effect ? row.true_pos : row.false_pos) += 1;
        } else {
            (has_event_effect ? row.false_neg : row.true_neg) += 1;
        }
    }
    std::vector<ConfusionRow> rows;
    rows.reserve(by_kind.size());
    for (auto& [kind, row] : by_kind) rows.push_back(row);
    return rows;
}

}  // namespace evsom
