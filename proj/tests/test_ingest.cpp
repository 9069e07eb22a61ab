#include <doctest.h>

#include <random>

#include "evsom/csv.hpp"
#include "evsom/panel.hpp"
#include "helpers.hpp"

using namespace evsom;
using test_helpers::TempDir;

TEST_CASE("simple returns from consecutive closes") {
    TempDir dir;
    auto path = dir.write("prices.csv",
                          "date,ticker,close\n"
                          "2016-01-04,AAA,100\n"
                          "2016-01-05,AAA,110\n");
    auto result = load_returns_panel(path, 0.0);
    const ReturnsPanel& p = result.panel;
    REQUIRE(p.n_securities() == 1);
    REQUIRE(p.n_days() == 1);
    CHECK(p.calendar[0] == Date{2016, 1, 5});
    CHECK(p.valid(0, 0));
    CHECK(p.returns(0, 0) == doctest::Approx(0.10).epsilon(1e-12));
}

TEST_CASE("log returns option") {
    TempDir dir;
    auto path = dir.write("prices.csv",
                          "date,ticker,close\n"
                          "2016-01-04,AAA,100\n"
                          "2016-01-05,AAA,110\n");
    auto result = load_returns_panel(path, 0.0, ReturnKind::Log);
    CHECK(result.panel.returns(0, 0) == doctest::Approx(std::log(1.1)).epsilon(1e-12));
}

TEST_CASE("low-coverage ticker dropped and reported") {
    TempDir dir;
    std::string content = "date,ticker,close\n";
    // AAA on every day, BBB on two days only (one valid return out of ten).
    for (int d = 1; d <= 11; ++d) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "2016-01-%02d,AAA,%d\n", d, 100 + d);
        content += buf;
    }
    content += "2016-01-01,BBB,50\n2016-01-02,BBB,51\n";
    auto path = dir.write("prices.csv", content);
    auto result = load_returns_panel(path, 0.9);
    CHECK(result.panel.n_securities() == 1);
    CHECK(result.panel.tickers[0] == "AAA");
    REQUIRE(result.dropped.size() == 1);
    CHECK(result.dropped[0].ticker == "BBB");
    CHECK(result.dropped[0].reason.find("coverage") != std::string::npos);
}

TEST_CASE("duplicate observation is an error") {
    TempDir dir;
    auto path = dir.write("prices.csv",
                          "date,ticker,close\n"
                          "2016-01-04,AAA,100\n"
                          "2016-01-04,AAA,101\n"
                          "2016-01-05,AAA,102\n");
    CHECK_THROWS_WITH_AS(load_returns_panel(path, 0.0),
                         doctest::Contains("duplicate observation"), std::runtime_error);
}

TEST_CASE("non-positive close rejects the row with a warning") {
    TempDir dir;
    auto path = dir.write("prices.csv",
                          "date,ticker,close\n"
                          "2016-01-04,AAA,100\n"
                          "2016-01-05,AAA,-3\n"
                          "2016-01-06,AAA,104\n"
                          "2016-01-04,BBB,50\n"
                          "2016-01-05,BBB,51\n"
                          "2016-01-06,BBB,52\n");
    auto result = load_returns_panel(path, 0.0);
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("non-positive") != std::string::npos);
    // BBB keeps 2016-01-05 on the calendar, so the rejected close punches a
    // hole through both of AAA's adjacent returns.
    auto ai = result.panel.ticker_index("AAA");
    REQUIRE(ai);
    CHECK(result.panel.valid.row(*ai).count() == 0);
    auto bi = result.panel.ticker_index("BBB");
    CHECK(result.panel.valid.row(*bi).count() == 2);
}

TEST_CASE("empty and malformed files are errors") {
    TempDir dir;
    CHECK_THROWS(load_returns_panel(dir.write("empty.csv", ""), 0.0));
    CHECK_THROWS(load_returns_panel(dir.write("head.csv", "date,ticker,close\n"), 0.0));
    CHECK_THROWS_WITH_AS(
        load_returns_panel(dir.write("bad.csv", "date,ticker,close\n2016-01-04,AAA\n"), 0.0),
        doctest::Contains(":2:"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        load_returns_panel(
            dir.write("badnum.csv", "date,ticker,close\n2016-01-04,AAA,12x\n2016-01-05,AAA,13\n"),
            0.0),
        doctest::Contains("invalid number"), std::runtime_error);
}

namespace {

ReturnsPanel synthetic_panel(int n, int t_len, unsigned seed, double mask_prob = 0.0) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ReturnsPanel p;
    for (int i = 0; i < n; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "T%03d", i);
        p.tickers.push_back(buf);
    }
    Date d{2015, 1, 5};
    for (int t = 0; t < t_len; ++t) {
        p.calendar.push_back(d);
        d = d.next_weekday();
    }
    p.returns.resize(n, t_len);
    p.valid.resize(n, t_len);
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < t_len; ++t) {
            p.returns(i, t) = noise(gen);
            p.valid(i, t) = unif(gen) >= mask_prob;
            if (!p.valid(i, t)) p.returns(i, t) = 0.0;
        }
    }
    return p;
}

}  // namespace

TEST_CASE("panel CSV round-trip is bit-exact") {
    TempDir dir;
    for (unsigned seed : {1u, 2u, 3u}) {
        ReturnsPanel p = synthetic_panel(7, 40, seed, 0.2);
        save_panel_csv(p, dir.file("panel.csv"));
        ReturnsPanel q = load_panel_csv(dir.file("panel.csv"));
        REQUIRE(q.tickers == p.tickers);
        REQUIRE(q.calendar == p.calendar);
        for (int i = 0; i < p.n_securities(); ++i) {
            for (int t = 0; t < p.n_days(); ++t) {
                REQUIRE(q.valid(i, t) == p.valid(i, t));
                if (p.valid(i, t)) REQUIRE(q.returns(i, t) == p.returns(i, t));
            }
        }
    }
}

TEST_CASE("align_windows index arithmetic") {
    ReturnsPanel p = synthetic_panel(1, 320, 42);
    WindowIndex w = align_windows(p, p.calendar[300], 250, 5);
    CHECK(w.event_index == 300);
    CHECK(w.est_begin == 45);
    CHECK(w.est_end == 295);
    CHECK(w.event_begin() == 295);
    CHECK(w.event_end() == 306);  // half-open: covers indices 295..305
    CHECK(w.est_len() == 250);
    CHECK(w.event_days() == 11);
}

TEST_CASE("align_windows is pure and windows never overlap") {
    std::mt19937 gen(7);
    ReturnsPanel p = synthetic_panel(1, 400, 9);
    for (int trial = 0; trial < 50; ++trial) {
        const int est_len = 10 + static_cast<int>(gen() % 100);
        const int half = static_cast<int>(gen() % 6);
        const int gap = static_cast<int>(gen() % 3);
        const int event = est_len + half + gap + static_cast<int>(gen() % 50);
        if (event + half >= p.n_days()) continue;
        WindowIndex a = align_windows(p, p.calendar[event], est_len, half, gap);
        WindowIndex b = align_windows(p, p.calendar[event], est_len, half, gap);
        CHECK(a.event_index == b.event_index);
        CHECK(a.est_begin == b.est_begin);
        CHECK(a.est_end == b.est_end);
        CHECK(a.est_end <= a.event_begin());  // no overlap
        CHECK(a.est_len() == est_len);
    }
}

TEST_CASE("align_windows error paths") {
    ReturnsPanel p = synthetic_panel(1, 260, 3);
    CHECK_THROWS_WITH_AS(align_windows(p, Date{1999, 1, 4}, 250, 5),
                         doctest::Contains("not in panel calendar"), std::runtime_error);
    // Only 200 days before the event window.
    CHECK_THROWS_WITH_AS(align_windows(p, p.calendar[205], 250, 5),
                         doctest::Contains("insufficient history"), std::runtime_error);
    CHECK_THROWS_WITH_AS(align_windows(p, p.calendar[257], 250, 5),
                         doctest::Contains("insufficient data after event day"),
                         std::runtime_error);

    WindowIndex w = align_windows(p, p.calendar[255], 250, 0);
    CHECK(w.event_days() == 1);
    CHECK(w.event_begin() == w.event_index);
}

TEST_CASE("covariate tables load and validate") {
    TempDir dir;
    auto weights = dir.write("weights.csv",
                             "ticker,w_market,w_gpif\n"
                             "AAA,0.02,0.01\n"
                             "BBB,0.005,0.005\n");
    auto ann = dir.write("announcements.csv",
                         "ticker,announce_date\nAAA,2016-07-29\n");
    auto rates = dir.write("rates.csv",
                           "date,rate\n"
                           "2016-01-04,0.5\n"
                           "2016-01-06,0.45\n");
    CovariateTables t = load_covariates(weights, ann, rates);
    CHECK(t.market_weight.at("AAA") == 0.02);
    CHECK(t.fund_weight.at("AAA") == 0.01);
    CHECK(t.announcement_for("AAA") == Date{2016, 7, 29});
    CHECK(!t.announcement_for("BBB"));

    // Forward fill across the missing 2016-01-05.
    std::vector<Date> cal = {Date{2016, 1, 4}, Date{2016, 1, 5}, Date{2016, 1, 6}};
    int gaps = 0;
    Eigen::VectorXd levels = align_rate_levels(t, cal, &gaps);
    CHECK(levels[0] == 0.5);
    CHECK(levels[1] == 0.5);
    CHECK(levels[2] == 0.45);
    CHECK(gaps == 1);

    Eigen::VectorXd changes = rate_changes(t, cal);
    CHECK(changes[0] == 0.0);  // nothing quoted before the calendar
    CHECK(changes[1] == 0.0);
    CHECK(changes[2] == doctest::Approx(-0.05).epsilon(1e-12));

    // A quote before the calendar start feeds the first change.
    std::vector<Date> cal2 = {Date{2016, 1, 6}};
    Eigen::VectorXd c2 = rate_changes(t, cal2);
    CHECK(c2[0] == doctest::Approx(-0.05).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(align_rate_levels(t, {Date{2015, 12, 1}}, nullptr),
                         doctest::Contains("no interest rate"), std::runtime_error);
}

TEST_CASE("covariate loader error paths") {
    TempDir dir;
    auto ann = dir.write("a.csv", "ticker,announce_date\n");
    auto rates = dir.write("r.csv", "date,rate\n2016-01-04,0.5\n");
    CHECK_THROWS_WITH_AS(
        load_covariates(dir.write("w1.csv", "ticker,w_market,w_gpif\nAAA,-0.1,0\n"), ann, rates),
        doctest::Contains("negative weight"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        load_covariates(
            dir.write("w2.csv", "ticker,w_market,w_gpif\nAAA,0.1,0\nAAA,0.1,0\n"), ann, rates),
        doctest::Contains("duplicate ticker"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        load_covariates(dir.write("w3.csv", "ticker,bad,header\n"), ann, rates),
        doctest::Contains("unexpected header"), std::runtime_error);
}

TEST_CASE("exclusions csv round trip") {
    TempDir dir;
    std::vector<Exclusion> rows = {{"AAA", "missing returns in estimation window"},
                                   {"BBB", "perfect fit"}};
    write_exclusions_csv(rows, dir.file("excluded.csv"));
    auto back = read_exclusions_csv(dir.file("excluded.csv"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].ticker == "AAA");
    CHECK(back[1].reason == "perfect fit");
}
