#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evsom/calendar.hpp"
#include "evsom/som.hpp"
#include "evsom/synth.hpp"

namespace evsom {

/// Configuration problems exit with status 1; runtime failures with 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputPaths {
    std::filesystem::path prices;
    std::filesystem::path weights;
    std::filesystem::path announcements;
    std::filesystem::path rates;
};

struct ReportConfig {
    int bins = 10;
    std::string palette = "viridis";
    std::vector<std::string> planes;            // empty = every feature column
    std::vector<std::string> empirical_planes;  // empty = the non-t columns
    std::vector<std::string> significance_kinds = {"AR", "CAR"};
    std::vector<int> significance_offsets;      // empty = every offset
    std::map<std::string, std::vector<std::pair<int, int>>> regions;
    std::vector<std::string> cumulative_residuals;  // tickers
};

/// Full pipeline configuration. Exactly one of `inputs` / `scenario` must be
/// present; defaults follow the reference parameterization (250-day
/// estimation window, 11-day event window, theta = 0.05, 20x20 map,
/// lambda_init = 0.9, T = 2000).
struct RunConfig {
    std::optional<InputPaths> inputs;
    std::optional<ScenarioSpec> scenario;
    std::optional<Date> event_date;  // required with `inputs`
    std::string market_ticker = "MKT";
    int est_len = 250;
    int half_window = 5;
    int gap = 0;
    double theta = 0.05;
    std::optional<double> threshold_override;
    int quantile_count = 20;
    double min_coverage = 0.9;
    bool log_returns = false;
    std::uint64_t seed = 1;
    SomParams som;
    ReportConfig report;
    std::filesystem::path out_dir = "out";

    void validate() const;  // throws ConfigError
};

RunConfig load_run_config(const std::filesystem::path& config_path);

/// Parses a config from JSON text (exposed for tests).
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);

struct CommandOverrides {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> theta;
};

/// Runs one of generate | study | som | report | run against the config.
/// Outputs land in the configured directory; files written by a failing
/// invocation are removed. Returns the list of files written.
std::vector<std::filesystem::path> run_command(const std::string& command, RunConfig config);

inline constexpr const char* kToolName = "evsom";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace evsom
