#include <doctest.h>

#include <cmath>
#include <random>

#include "evsom/features.hpp"

using namespace evsom;

TEST_CASE("modified active weight") {
    CHECK(modified_active_weight(0.02, 0.02) == 0.0);
    CHECK(modified_active_weight(0.02, 0.01) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(modified_active_weight(0.02, 0.0) == 1.0);
    CHECK_THROWS_WITH_AS(modified_active_weight(0.0, 0.01), doctest::Contains("zero market weight"),
                         std::invalid_argument);
}

namespace {

std::vector<Date> weekday_calendar(int days) {
    std::vector<Date> cal;
    Date d{2016, 7, 4};  // a Monday
    for (int t = 0; t < days; ++t) {
        cal.push_back(d);
        d = d.next_weekday();
    }
    return cal;
}

}  // namespace

TEST_CASE("announcement proximity") {
    auto cal = weekday_calendar(40);
    const int event = 20;

    CHECK(announcement_proximity(event, std::nullopt, cal) == 0.0);
    CHECK(announcement_proximity(event, cal[20], cal) == 1.0);  // same day
    CHECK(announcement_proximity(event, cal[19], cal) ==
          doctest::Approx(0.7615941559557649).epsilon(1e-12));
    CHECK(announcement_proximity(event, cal[21], cal) ==
          doctest::Approx(-0.7615941559557649).epsilon(1e-12));
    // Distant announcements fade toward zero.
    CHECK(std::abs(announcement_proximity(1000, cal[0], weekday_calendar(1001))) < 0.0011);

    // Odd in the signed day count.
    for (int d = 1; d <= 10; ++d) {
        CHECK(announcement_proximity(event, cal[event - d], cal) ==
              doctest::Approx(-announcement_proximity(event, cal[event + d], cal)).epsilon(1e-14));
    }

    // Weekend announcements map to the next business day.
    Date saturday{2016, 7, 9};
    CHECK(saturday.is_weekend());
    const double mapped = announcement_proximity(event, saturday, cal);
    const double monday = announcement_proximity(event, Date{2016, 7, 11}, cal);
    CHECK(mapped == monday);
}

TEST_CASE("rate correlation") {
    Eigen::VectorXd r(3), c(3);
    r << 1, 2, 3;
    c << 2, 4, 6;
    SUBCASE("proportional series correlate perfectly") {
        RateCorr rc = rate_correlation(r, c);
        CHECK(rc.rho == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(!rc.degenerate);
    }
    SUBCASE("negated series flip the sign") {
        RateCorr rc = rate_correlation(r, (-c).eval());
        CHECK(rc.rho == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("self correlation") {
        RateCorr rc = rate_correlation(r, r);
        CHECK(rc.rho == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("degenerate series flag") {
        Eigen::VectorXd flat = Eigen::VectorXd::Constant(3, 0.5);
        RateCorr rc = rate_correlation(r, flat);
        CHECK(rc.rho == 0.0);
        CHECK(rc.degenerate);
    }
    SUBCASE("invariant under positive affine transforms") {
        std::mt19937 gen(13);
        std::normal_distribution<double> noise(0.0, 1.0);
        Eigen::VectorXd a(50), b(50);
        for (int t = 0; t < 50; ++t) {
            a[t] = noise(gen);
            b[t] = 0.4 * a[t] + noise(gen);
        }
        RateCorr base = rate_correlation(a, b);
        RateCorr moved = rate_correlation((3.0 * a.array() + 7.0).matrix().eval(),
                                          (0.5 * b.array() - 2.0).matrix().eval());
        CHECK(moved.rho == doctest::Approx(base.rho).epsilon(1e-12));
    }
    SUBCASE("length checks") {
        Eigen::VectorXd two(2);
        two << 1, 2;
        CHECK_THROWS(rate_correlation(two, two));
        CHECK_THROWS(rate_correlation(r, two));
    }
}

namespace {

// Minimal consistent inputs for three tickers with a 3-day event window.
struct ToyInputs {
    std::map<std::string, EventStats> stats;
    std::map<std::string, FitSummary> fits;
    std::map<std::string, CovariateRow> cov;
};

ToyInputs toy_inputs(const std::vector<std::string>& tickers) {
    ToyInputs in;
    std::mt19937 gen(41);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t k = 0; k < tickers.size(); ++k) {
        EventStats es;
        es.ticker = tickers[k];
        es.ar = Eigen::VectorXd::Zero(3);
        es.car = Eigen::VectorXd::Zero(3);
        es.t_ar = Eigen::VectorXd::Zero(3);
        es.t_car = Eigen::VectorXd::Zero(3);
        for (int t = 0; t < 3; ++t) {
            es.t_ar[t] = noise(gen);
            es.t_car[t] = noise(gen);
        }
        es.detected_ar.assign(3, false);
        es.detected_car.assign(3, false);
        in.stats.emplace(es.ticker, es);
        in.fits.emplace(tickers[k],
                        FitSummary{0.001 * (k + 1.0), 1.0 + 0.1 * k, 0.01, 1.9 + 0.05 * k,
                                   250, false});
        in.cov.emplace(tickers[k], CovariateRow{static_cast<double>(k + 1), 0.5, -0.2, false});
    }
    return in;
}

}  // namespace

TEST_CASE("feature matrix columns and standardization") {
    auto in = toy_inputs({"AAA", "BBB", "CCC"});
    FeatureMatrix fm = assemble_feature_matrix(in.stats, in.fits, in.cov);

    // 1 + (2h+1) + (2h+1) + 5 columns with h = 1; the default h = 5 gives 28.
    REQUIRE(fm.dim() == 12);
    CHECK(feature_column_names(5).size() == 28);
    CHECK(fm.column_names.front() == "mAW");
    CHECK(fm.column_names[1] == "tCAR[-1]");
    CHECK(fm.column_names[3] == "tCAR[+1]");
    CHECK(fm.column_names[4] == "tAR[-1]");
    CHECK(fm.column_names[7] == "rho");
    CHECK(fm.column_names[8] == "Omega");
    CHECK(fm.column_names[9] == "DWR");
    CHECK(fm.column_names[10] == "alpha");
    CHECK(fm.column_names[11] == "beta");

    // mAW raw column was (1, 2, 3): sample std 1, so standardized (-1, 0, 1).
    CHECK(fm.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fm.values(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fm.values(2, 0) == doctest::Approx(1.0).epsilon(1e-12));

    // Constant columns (rho, Omega here) are zeroed and flagged.
    const int rho_col = *fm.column_index("rho");
    CHECK(fm.constant_flag[rho_col]);
    CHECK(fm.values.col(rho_col).cwiseAbs().maxCoeff() == 0.0);
    CHECK(fm.column_stds[rho_col] == 0.0);
    CHECK(fm.column_means[rho_col] == doctest::Approx(-0.2).epsilon(1e-15));

    // Non-constant columns have mean 0 and sample std 1.
    for (int c = 0; c < fm.dim(); ++c) {
        if (fm.constant_flag[c]) continue;
        const Eigen::VectorXd col = fm.values.col(c);
        CHECK(std::abs(col.mean()) < 1e-8);
        const double sd = std::sqrt((col.array() - col.mean()).square().sum() / 2.0);
        CHECK(sd == doctest::Approx(1.0).epsilon(1e-8));
    }

    // De-standardization recovers the raw values.
    Eigen::MatrixXd raw = raw_values(fm);
    CHECK(raw(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(raw(2, 0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(raw(1, *fm.column_index("alpha")) == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(raw(0, rho_col) == doctest::Approx(-0.2).epsilon(1e-15));

    // Standardization is idempotent: re-standardizing changes nothing.
    for (int c = 0; c < fm.dim(); ++c) {
        if (fm.constant_flag[c]) continue;
        for (int r = 0; r < 3; ++r) {
            const double again = fm.restandardize(c, raw(r, c));
            CHECK(again == doctest::Approx(fm.values(r, c)).epsilon(1e-10));
        }
    }

    // Column order is stable across assemblies.
    FeatureMatrix fm2 = assemble_feature_matrix(in.stats, in.fits, in.cov);
    CHECK(fm2.column_names == fm.column_names);
}

TEST_CASE("feature matrix rejects mismatched ticker sets") {
    auto in = toy_inputs({"AAA", "BBB", "CCC"});
    auto fits_missing = in.fits;
    fits_missing.erase("BBB");
    CHECK_THROWS_WITH_AS(assemble_feature_matrix(in.stats, fits_missing, in.cov),
                         doctest::Contains("BBB"), std::invalid_argument);
}

TEST_CASE("column slugs are filename-safe") {
    CHECK(column_slug("mAW") == "mAW");
    CHECK(column_slug("tCAR[-5]") == "tCAR_m5");
    CHECK(column_slug("tAR[+3]") == "tAR_p3");
    CHECK(column_slug("rho") == "rho");
}
