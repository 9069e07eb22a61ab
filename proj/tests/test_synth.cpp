#include <doctest.h>

#include <cmath>
#include <map>

#include "evsom/event_study.hpp"
#include "evsom/features.hpp"
#include "evsom/market_model.hpp"
#include "evsom/panel.hpp"
#include "evsom/synth.hpp"
#include "helpers.hpp"

using namespace evsom;
using test_helpers::TempDir;

namespace {

ScenarioSpec small_spec() {
    ScenarioSpec spec;
    spec.n_securities = 30;
    spec.n_days = 62;
    spec.event_index = 56;
    spec.est_len = 50;
    spec.half_window = 5;
    spec.noise_sigma = 0.01;
    spec.seed = 9;
    return spec;
}

}  // namespace

TEST_CASE("same seed gives byte-identical scenario files") {
    TempDir a, b;
    ScenarioSpec spec = small_spec();
    spec.groups = {{GroupKind::Earnings, 0.2, 0.05, std::nullopt},
                   {GroupKind::Rate, 0.2, 1.0, std::nullopt},
                   {GroupKind::Spike, 0.1, 0.5, std::nullopt}};
    generate_scenario(spec, a.path());
    generate_scenario(spec, b.path());
    for (const char* name :
         {"prices.csv", "weights.csv", "announcements.csv", "rates.csv", "truth.csv"}) {
        CHECK(test_helpers::slurp(a.file(name)) == test_helpers::slurp(b.file(name)));
    }

    // A different seed changes the data.
    TempDir c;
    ScenarioSpec other = spec;
    other.seed = 10;
    generate_scenario(other, c.path());
    CHECK(test_helpers::slurp(a.file("prices.csv")) != test_helpers::slurp(c.file("prices.csv")));
}

TEST_CASE("group fractions partition the universe within one security") {
    TempDir dir;
    ScenarioSpec spec = small_spec();
    spec.n_securities = 41;
    spec.groups = {{GroupKind::Earnings, 0.25, 0.05, std::nullopt},
                   {GroupKind::Rate, 0.25, 1.0, std::nullopt},
                   {GroupKind::Spike, 0.1, 0.5, std::nullopt}};
    generate_scenario(spec, dir.path());
    auto truth = load_truth(dir.file("truth.csv"));
    REQUIRE(truth.size() == 41);
    std::map<std::string, int> counts;
    for (const TruthRow& row : truth) counts[row.group] += 1;
    CHECK(std::abs(counts["earnings"] - 0.25 * 41) <= 1.0);
    CHECK(std::abs(counts["rate"] - 0.25 * 41) <= 1.0);
    CHECK(std::abs(counts["spike"] - 0.1 * 41) <= 1.0);
    CHECK(counts["none"] ==
          41 - counts["earnings"] - counts["rate"] - counts["spike"]);
}

TEST_CASE("scenario validation") {
    ScenarioSpec spec = small_spec();
    spec.event_index = 10;  // leaves too little history
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("event_index"),
                         std::invalid_argument);
    spec = small_spec();
    spec.groups = {{GroupKind::Earnings, 0.7, 0.05, std::nullopt},
                   {GroupKind::Rate, 0.6, 1.0, std::nullopt}};
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("sum above 1"),
                         std::invalid_argument);
}

TEST_CASE("null noiseless scenario is fully model-consistent") {
    TempDir dir;
    ScenarioSpec spec = small_spec();
    spec.noise_sigma = 0.0;
    ScenarioFiles files = generate_scenario(spec, dir.path());

    auto load = load_returns_panel(files.prices, 0.9);
    WindowIndex w = align_windows(load.panel, load.panel.calendar[spec.event_index], spec.est_len,
                                  spec.half_window);
    FitAllResult fits = fit_all(load.panel, w, kMarketTicker);
    CHECK(fits.fits.size() == 30);
    for (const auto& [ticker, fit] : fits.fits) {
        CHECK(fit.perfect_fit);  // zero residual noise
        CHECK(std::abs(fit.alpha) < 1e-12);
    }
    StudyResult study = study_all(load.panel, w, fits, kMarketTicker, Detection{});
    CHECK(study.stats.empty());  // every security skipped as a perfect fit
    CHECK(study.skipped.size() == 30);
}

TEST_CASE("pinned spike inflates the intercept by exactly s/n downstream") {
    TempDir dir;
    ScenarioSpec spec = small_spec();
    spec.noise_sigma = 0.0;
    const double s = 0.5;
    spec.groups = {{GroupKind::Spike, 0.2, s, std::nullopt}};
    ScenarioFiles files = generate_scenario(spec, dir.path());

    auto load = load_returns_panel(files.prices, 0.9);
    WindowIndex w = align_windows(load.panel, load.panel.calendar[spec.event_index], spec.est_len,
                                  spec.half_window);
    FitAllResult fits = fit_all(load.panel, w, kMarketTicker);

    auto truth = load_truth(files.truth);
    int checked = 0;
    for (const TruthRow& row : truth) {
        if (row.group != "spike") continue;
        const MarketModelFit& fit = fits.fits.at(row.ticker);
        ++checked;
        // x_t0 pinned to the mean of the others: dbeta = 0, dalpha = s/n.
        CHECK(fit.alpha == doctest::Approx(s / 50.0).epsilon(1e-10));
        REQUIRE(row.timing);
        CHECK(*row.timing >= w.est_begin);
        CHECK(*row.timing < w.est_end);
        // Sigma absorbs the spike: sqrt(s^2 (n-1) / (n (n-2))).
        CHECK(fit.sigma ==
              doctest::Approx(s * std::sqrt(49.0 / (50.0 * 48.0))).epsilon(1e-9));
    }
    CHECK(checked == 6);

    // Event-window CAR drift is exactly -L * s / n.
    StudyResult study = study_all(load.panel, w, fits, kMarketTicker, Detection{});
    for (const TruthRow& row : truth) {
        if (row.group != "spike") continue;
        const EventStats& es = study.stats.at(row.ticker);
        CHECK(es.car[10] == doctest::Approx(-11.0 * s / 50.0).epsilon(1e-10));
    }
}

TEST_CASE("rate-group securities correlate with rate changes") {
    TempDir dir;
    ScenarioSpec spec = small_spec();
    spec.n_securities = 60;
    spec.groups = {{GroupKind::Rate, 0.3, 1.5, std::nullopt}};
    ScenarioFiles files = generate_scenario(spec, dir.path());

    auto load = load_returns_panel(files.prices, 0.9);
    WindowIndex w = align_windows(load.panel, load.panel.calendar[spec.event_index], spec.est_len,
                                  spec.half_window);
    CovariateTables tables = load_covariates(files.weights, files.announcements, files.rates);

    std::vector<std::string> tickers;
    for (const std::string& t : load.panel.tickers) {
        if (t != kMarketTicker) tickers.push_back(t);
    }
    auto cov = compute_covariates(load.panel, w, tables, tickers);

    auto truth = load_truth(files.truth);
    double member_rho = 0.0, other_abs_rho = 0.0;
    int members = 0, others = 0;
    for (const TruthRow& row : truth) {
        const CovariateRow& c = cov.at(row.ticker);
        if (row.group == "rate") {
            member_rho += c.rho;
            ++members;
        } else {
            other_abs_rho += std::abs(c.rho);
            ++others;
        }
    }
    member_rho /= members;
    other_abs_rho /= others;
    CHECK(members == 18);
    CHECK(member_rho > 0.5);
    CHECK(member_rho > other_abs_rho);
}

TEST_CASE("earnings group announcements cluster near the event day") {
    TempDir dir;
    ScenarioSpec spec = small_spec();
    spec.groups = {{GroupKind::Earnings, 0.3, 0.08, std::nullopt}};
    ScenarioFiles files = generate_scenario(spec, dir.path());
    auto truth = load_truth(files.truth);
    CovariateTables tables;
    load_announcements_into(tables, files.announcements);
    int with_announcement = 0;
    for (const TruthRow& row : truth) {
        if (row.group != "earnings") {
            CHECK(!tables.announcement_for(row.ticker));
            continue;
        }
        ++with_announcement;
        REQUIRE(row.timing);
        CHECK(*row.timing >= -2);
        CHECK(*row.timing <= 2);
        CHECK(tables.announcement_for(row.ticker).has_value());
    }
    CHECK(with_announcement == 9);
}

TEST_CASE("fund-weight group pins the modified active weight") {
    TempDir dir;
    ScenarioSpec spec = small_spec();
    spec.groups = {{GroupKind::FundWeight, 0.2, 0.42, std::nullopt}};
    ScenarioFiles files = generate_scenario(spec, dir.path());
    CovariateTables tables;
    load_weights_into(tables, files.weights);
    auto truth = load_truth(files.truth);
    for (const TruthRow& row : truth) {
        const double maw = modified_active_weight(tables.market_weight.at(row.ticker),
                                                  tables.fund_weight.at(row.ticker));
        if (row.group == "fund-weight") {
            CHECK(maw == doctest::Approx(0.42).epsilon(1e-12));
        } else {
            CHECK(std::abs(maw) <= 0.5 + 1e-12);
        }
    }
}

TEST_CASE("confusion table counting") {
    std::vector<TruthRow> truth = {{"A", "spike", 0.5, 10},
                                   {"B", "spike", 0.5, 10},
                                   {"C", "earnings", 0.05, 0},
                                   {"D", "none", 0.0, std::nullopt}};
    std::map<std::string, bool> detected = {{"A", true}, {"B", true}, {"C", true}, {"D", false}};
    auto rows = ground_truth_confusion(detected, truth);

    std::map<std::string, ConfusionRow> by_kind;
    for (const ConfusionRow& r : rows) by_kind[r.kind] = r;

    CHECK(by_kind.at("spike").false_pos == 2);
    CHECK(by_kind.at("spike").true_pos == 0);
    CHECK(by_kind.at("earnings").true_pos == 1);
    CHECK(by_kind.at("earnings").false_neg == 0);
    CHECK(by_kind.at("none").true_neg == 1);
    CHECK(by_kind.at("none").false_pos == 0);

    std::map<std::string, bool> unknown = {{"Z", true}};
    CHECK_THROWS_WITH_AS(ground_truth_confusion(unknown, truth), doctest::Contains("missing"),
                         std::invalid_argument);

    // Perfect separation: no false positives.
    std::map<std::string, bool> clean = {{"A", false}, {"B", false}, {"C", true}, {"D", false}};
    for (const ConfusionRow& r : ground_truth_confusion(clean, truth)) {
        CHECK(r.false_pos == 0);
    }
}
