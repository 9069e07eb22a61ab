#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evsom/pipeline.hpp"

namespace {

struct Cli {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> theta;
};

void add_common(CLI::App* sub, Cli& cli) {
    sub->add_option("--config", cli.config_path, "JSON configuration file")->required();
    sub->add_option("--out", cli.out_dir, "Output directory (overrides the config)");
    sub->add_option("--seed", [&cli](const std::vector<std::string>& v) {
        cli.seed = std::stoull(v.front());
        return true;
    }, "Seed override for scenario generation and the map");
    sub->add_option("--theta", [&cli](const std::vector<std::string>& v) {
        cli.theta = std::stod(v.front());
        return true;
    }, "Significance level override");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-study analytics with map-based event attribution"};
    app.set_version_flag("--version", std::string(evsom::kToolName) + " " + evsom::kToolVersion);
    app.require_subcommand(1);

    Cli cli;
    const char* descriptions[][2] = {
        {"generate", "Emit a synthetic scenario (prices, weights, announcements, rates, truth)"},
        {"study", "Run ingest, market-model fits, and the event study"},
        {"som", "Build the feature matrix and train the map"},
        {"report", "Render planes, heat maps, and region reports from saved outputs"},
        {"run", "Full pipeline: generate (if scenario), study, som, report"},
    };
    for (const auto& d : descriptions) add_common(app.add_subcommand(d[0], d[1]), cli);

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        evsom::RunConfig cfg = evsom::load_run_config(cli.config_path);
        if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
        if (cli.seed) {
            cfg.seed = *cli.seed;
            if (cfg.scenario) cfg.scenario->seed = *cli.seed;
        }
        if (cli.theta) cfg.theta = *cli.theta;

        const auto written = evsom::run_command(command, cfg);
        std::cout << command << ": wrote " << written.size() << " files to "
                  << cfg.out_dir.string() << '\n';
        return 0;
    } catch (const evsom::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
