#include <doctest.h>

#include <json.hpp>
#include <set>

#include "evsom/artifacts.hpp"
#include "evsom/csv.hpp"
#include "evsom/pipeline.hpp"
#include "helpers.hpp"

using namespace evsom;
using test_helpers::TempDir;

namespace {

// A scenario small enough to run the full pipeline in well under a second.
std::string small_scenario_config(const std::string& out_dir, unsigned seed = 5) {
    return R"({
      "seed": )" + std::to_string(seed) + R"(,
      "est_len": 50,
      "half_window": 3,
      "quantile_count": 5,
      "scenario": {
        "n_securities": 40,
        "n_days": 60,
        "event_index": 54,
        "noise_sigma": 0.01,
        "groups": [
          {"kind": "earnings", "fraction": 0.25, "magnitude": 0.06},
          {"kind": "rate", "fraction": 0.25, "magnitude": 1.5}
        ]
      },
      "som": {"rows": 6, "cols": 6, "iterations": 40},
      "report": {
        "bins": 4,
        "planes": ["mAW", "rho", "Omega"],
        "significance_offsets": [0, 3],
        "regions": {"A1": [[0, 0], [0, 1]]},
        "cumulative_residuals": ["S0001"]
      },
      "out_dir": ")" + out_dir + R"("
    })";
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_run_config("{", "."), ConfigError);

    // Neither inputs nor scenario.
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"theta": 0.05})", "."),
                         doctest::Contains("exactly one"), ConfigError);

    // Both at once.
    const std::string both = R"({
      "inputs": {"prices": "p.csv", "weights": "w.csv",
                 "announcements": "a.csv", "rates": "r.csv"},
      "event_date": "2016-08-01",
      "scenario": {"n_securities": 10, "n_days": 300, "event_index": 260}
    })";
    CHECK_THROWS_WITH_AS(parse_run_config(both, "."), doctest::Contains("exactly one"),
                         ConfigError);

    // Inputs without an event date.
    const std::string no_date = R"({
      "inputs": {"prices": "p.csv", "weights": "w.csv",
                 "announcements": "a.csv", "rates": "r.csv"}
    })";
    CHECK_THROWS_WITH_AS(parse_run_config(no_date, "."), doctest::Contains("event_date"),
                         ConfigError);

    // Bad theta.
    CHECK_THROWS_WITH_AS(
        parse_run_config(
            R"({"scenario": {"n_securities": 10, "n_days": 300, "event_index": 260}, "theta": 1.5})",
            "."),
        doctest::Contains("theta"), ConfigError);

    // Defaults mirror the reference parameterization.
    RunConfig cfg = parse_run_config(
        R"({"scenario": {"n_securities": 10, "n_days": 300, "event_index": 260}})", ".");
    CHECK(cfg.est_len == 250);
    CHECK(cfg.half_window == 5);
    CHECK(cfg.theta == 0.05);
    CHECK(cfg.quantile_count == 20);
    CHECK(cfg.som.rows == 20);
    CHECK(cfg.som.cols == 20);
    CHECK(cfg.som.lambda_init == 0.9);
    CHECK(cfg.som.xi_init == 0.001);
    CHECK(cfg.som.iterations == 2000);
}

TEST_CASE("full pipeline run produces the artifact set and is idempotent") {
    TempDir base;
    const std::string out1 = (base.path() / "run1").string();
    const std::string out2 = (base.path() / "run2").string();

    RunConfig cfg1 = parse_run_config(small_scenario_config(out1), base.path());
    auto written1 = run_command("run", cfg1);

    const std::vector<std::string> expected = {
        "prices.csv", "weights.csv", "announcements.csv", "rates.csv", "truth.csv",
        "excluded.csv", "fits.csv", "event_stats.csv", "table2.csv", "detection_grid.csv",
        "confusion.csv", "portfolios.csv", "features_raw.csv", "features_std.csv", "feature_meta.csv",
        "som_refs.csv", "som_labels.csv", "som_error.csv",
        "plane_comp_mAW.csv", "comp_mAW.svg", "plane_comp_rho.csv", "comp_rho.svg",
        "plane_emp_mAW.csv", "emp_mAW.svg",
        "plane_sig_AR_p0.csv", "sig_AR_p0.svg", "plane_sig_CAR_p3.csv", "sig_CAR_p3.svg",
        "region_A1.csv", "cumres_S0001.csv", "run_summary.json"};
    for (const std::string& name : expected) {
        CHECK_MESSAGE(std::filesystem::exists(std::filesystem::path(out1) / name),
                      "missing ", name);
    }

    // Bitwise-identical rerun into a clean directory (the summary echoes no
    // absolute paths, so it matches too).
    RunConfig cfg2 = parse_run_config(small_scenario_config(out2), base.path());
    run_command("run", cfg2);
    int compared = 0;
    for (const std::string& name : expected) {
        const std::string a = test_helpers::slurp(std::filesystem::path(out1) / name);
        const std::string b = test_helpers::slurp(std::filesystem::path(out2) / name);
        CHECK_MESSAGE(a == b, "differs: ", name);
        ++compared;
    }
    CHECK(compared == static_cast<int>(expected.size()));
}

TEST_CASE("staged invocation equals the one-shot run") {
    TempDir base;
    const std::string staged = (base.path() / "staged").string();
    const std::string oneshot = (base.path() / "oneshot").string();

    RunConfig cfg = parse_run_config(small_scenario_config(staged), base.path());
    run_command("generate", cfg);
    run_command("study", cfg);
    run_command("som", cfg);
    run_command("report", cfg);

    RunConfig cfg2 = parse_run_config(small_scenario_config(oneshot), base.path());
    run_command("run", cfg2);

    for (const auto& entry : std::filesystem::directory_iterator(oneshot)) {
        const std::string name = entry.path().filename().string();
        if (name == "run_summary.json") continue;  // records the command name
        CAPTURE(name);
        CHECK(test_helpers::slurp(std::filesystem::path(staged) / name) ==
              test_helpers::slurp(entry.path()));
    }
}

TEST_CASE("stages demand their upstream artifacts") {
    TempDir base;
    const std::string out = (base.path() / "out").string();
    RunConfig cfg = parse_run_config(small_scenario_config(out), base.path());

    CHECK_THROWS_WITH_AS(run_command("report", cfg), doctest::Contains("som_refs.csv"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(run_command("study", cfg), doctest::Contains("generate"),
                         std::runtime_error);
    run_command("generate", cfg);
    CHECK_THROWS_WITH_AS(run_command("som", cfg), doctest::Contains("fits.csv"),
                         std::runtime_error);
    run_command("study", cfg);
    run_command("som", cfg);
    run_command("report", cfg);
    CHECK(std::filesystem::exists(std::filesystem::path(out) / "som_refs.csv"));
}

TEST_CASE("failed runs remove their partial outputs") {
    TempDir base;
    const std::string out = (base.path() / "out").string();
    RunConfig cfg = parse_run_config(small_scenario_config(out), base.path());
    // Force a late failure: a region cell outside the 6x6 grid.
    cfg.report.regions["bad"] = {{99, 99}};
    CHECK_THROWS(run_command("run", cfg));
    CHECK(!std::filesystem::exists(std::filesystem::path(out) / "fits.csv"));
    CHECK(!std::filesystem::exists(std::filesystem::path(out) / "som_refs.csv"));
}

TEST_CASE("run summary lists every output with its content hash") {
    TempDir base;
    const std::string out = (base.path() / "out").string();
    RunConfig cfg = parse_run_config(small_scenario_config(out), base.path());
    auto written = run_command("run", cfg);

    auto j = nlohmann::json::parse(
        test_helpers::slurp(std::filesystem::path(out) / "run_summary.json"));
    CHECK(j.at("tool").at("name") == "evsom");
    CHECK(j.at("command") == "run");
    CHECK(j.at("config").at("est_len") == 50);
    CHECK(j.at("config").at("seed") == 5);

    std::set<std::string> listed;
    for (const auto& entry : j.at("outputs")) {
        const std::string rel = entry.at("path");
        listed.insert(rel);
        const std::string content =
            test_helpers::slurp(std::filesystem::path(out) / rel);
        CHECK(entry.at("fnv1a64") == csv::fnv1a64_hex(content));
    }
    CHECK(listed.count("fits.csv") == 1);
    CHECK(listed.count("som_refs.csv") == 1);
    // Everything in the directory except the summary itself is listed.
    for (const auto& entry : std::filesystem::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        if (name == "run_summary.json") continue;
        CHECK_MESSAGE(listed.count(name) == 1, "unlisted output ", name);
    }
}

TEST_CASE("artifact CSV round trips") {
    TempDir base;
    const std::string out = (base.path() / "out").string();
    RunConfig cfg = parse_run_config(small_scenario_config(out), base.path());
    run_command("run", cfg);
    const std::filesystem::path dir(out);

    SUBCASE("table2") {
        DetectionTable t = artifacts::read_table2_csv(dir / "table2.csv");
        artifacts::write_table2_csv(t, dir / "table2_copy.csv");
        CHECK(test_helpers::slurp(dir / "table2.csv") ==
              test_helpers::slurp(dir / "table2_copy.csv"));
    }
    SUBCASE("detection grid") {
        int half = 0;
        auto rows = artifacts::read_detection_grid_csv(dir / "detection_grid.csv", &half);
        CHECK(half == 3);
        CHECK(!rows.empty());
        artifacts::write_detection_grid_csv(rows, half, dir / "grid_copy.csv");
        CHECK(test_helpers::slurp(dir / "detection_grid.csv") ==
              test_helpers::slurp(dir / "grid_copy.csv"));
    }
    SUBCASE("planes") {
        CellGrid g = artifacts::read_plane_csv(dir / "plane_comp_mAW.csv");
        CHECK(g.rows == 6);
        CHECK(g.cols == 6);
        artifacts::write_plane_csv(g, dir / "plane_copy.csv");
        CHECK(test_helpers::slurp(dir / "plane_comp_mAW.csv") ==
              test_helpers::slurp(dir / "plane_copy.csv"));
    }
    SUBCASE("event stats and fits") {
        auto stats = artifacts::read_event_stats_csv(dir / "event_stats.csv");
        artifacts::write_event_stats_csv(stats, dir / "stats_copy.csv");
        CHECK(test_helpers::slurp(dir / "event_stats.csv") ==
              test_helpers::slurp(dir / "stats_copy.csv"));

        auto fits = artifacts::read_fits_csv(dir / "fits.csv");
        CHECK(!fits.empty());
        CHECK(fits.begin()->second.n_obs == 50);
    }
    SUBCASE("som map") {
        FeatureMatrix fm = artifacts::read_feature_matrix(dir / "features_std.csv",
                                                          dir / "feature_meta.csv");
        SomMap map = artifacts::read_som_map(dir / "som_refs.csv", dir / "som_labels.csv",
                                             fm.tickers);
        CHECK(map.rows == 6);
        CHECK(map.cols == 6);
        CHECK(map.labels.size() == fm.tickers.size());
        artifacts::write_som_refs_csv(map, fm.column_names, dir / "refs_copy.csv");
        CHECK(test_helpers::slurp(dir / "som_refs.csv") ==
              test_helpers::slurp(dir / "refs_copy.csv"));
        artifacts::write_som_labels_csv(map, fm.tickers, dir / "labels_copy.csv");
        CHECK(test_helpers::slurp(dir / "som_labels.csv") ==
              test_helpers::slurp(dir / "labels_copy.csv"));
    }
}

TEST_CASE("seed override changes scenario and map outputs coherently") {
    TempDir base;
    const std::string out1 = (base.path() / "s1").string();
    const std::string out2 = (base.path() / "s2").string();
    RunConfig a = parse_run_config(small_scenario_config(out1, 5), base.path());
    RunConfig b = parse_run_config(small_scenario_config(out2, 6), base.path());
    run_command("run", a);
    run_command("run", b);
    CHECK(test_helpers::slurp(std::filesystem::path(out1) / "prices.csv") !=
          test_helpers::slurp(std::filesystem::path(out2) / "prices.csv"));
}
