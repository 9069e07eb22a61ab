#include "evsom/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evsom/artifacts.hpp"
#include "evsom/csv.hpp"
#include "evsom/event_study.hpp"
#include "evsom/features.hpp"
#include "evsom/market_model.hpp"
#include "evsom/panel.hpp"
#include "evsom/report.hpp"

namespace evsom {

namespace {

using nlohmann::ordered_json;

struct StageContext {
    RunConfig cfg;
    std::filesystem::path out;
    std::vector<std::filesystem::path> written;
    std::map<std::string, std::string> input_hashes;  // name -> fnv1a64
    ordered_json metrics = ordered_json::object();

    void write_file(const std::string& name, const std::string& content) {
        const std::filesystem::path path = out / name;
        csv::write_text_file(path, content);
        written.push_back(path);
    }

    void note_written(const std::filesystem::path& path) { written.push_back(path); }

    std::filesystem::path artifact(const std::string& name, const std::string& produced_by) const {
        const std::filesystem::path path = out / name;
        if (!std::filesystem::exists(path)) {
            throw std::runtime_error("missing " + name + " (run the " + produced_by +
                                     " stage first)");
        }
        return path;
    }
};

// User-supplied names feed output filenames; keep them path-safe.
std::string safe_stem(const std::string& name) {
    std::string out;
    for (char c : name) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    }
    return out.empty() ? "_" : out;
}

InputPaths resolve_inputs(const StageContext& ctx) {
    if (ctx.cfg.inputs) return *ctx.cfg.inputs;
    // Scenario mode reads whatever `generate` emitted into the output directory.
    InputPaths p;
    p.prices = ctx.out / "prices.csv";
    p.weights = ctx.out / "weights.csv";
    p.announcements = ctx.out / "announcements.csv";
    p.rates = ctx.out / "rates.csv";
    for (const auto& [name, path] : std::initializer_list<std::pair<const char*, std::filesystem::path>>{
             {"prices.csv", p.prices},
             {"weights.csv", p.weights},
             {"announcements.csv", p.announcements},
             {"rates.csv", p.rates}}) {
        if (!std::filesystem::exists(path)) {
            throw std::runtime_error(std::string("missing ") + name +
                                     " (run the generate stage first)");
        }
    }
    return p;
}

void fingerprint_inputs(StageContext& ctx, const InputPaths& inputs) {
    ctx.input_hashes["prices"] = csv::fnv1a64_hex(csv::read_text_file(inputs.prices));
    ctx.input_hashes["weights"] = csv::fnv1a64_hex(csv::read_text_file(inputs.weights));
    ctx.input_hashes["announcements"] =
        csv::fnv1a64_hex(csv::read_text_file(inputs.announcements));
    ctx.input_hashes["rates"] = csv::fnv1a64_hex(csv::read_text_file(inputs.rates));
}

struct LoadedPanel {
    ReturnsPanel panel;
    WindowIndex windows;
    std::vector<Exclusion> dropped;
};

LoadedPanel load_and_align(const StageContext& ctx, const InputPaths& inputs) {
    PanelLoadResult load = load_returns_panel(
        inputs.prices, ctx.cfg.min_coverage,
        ctx.cfg.log_returns ? ReturnKind::Log : ReturnKind::Simple);
    for (const std::string& w : load.warnings) std::cerr << "warning: " << w << '\n';

    Date event_date{};
    if (ctx.cfg.inputs) {
        event_date = *ctx.cfg.event_date;
    } else {
        const int idx = ctx.cfg.scenario->event_index;
        if (idx < 0 || idx >= load.panel.n_days()) {
            throw std::runtime_error("scenario event_index outside the generated calendar");
        }
        event_date = load.panel.calendar[static_cast<std::size_t>(idx)];
    }
    WindowIndex windows = align_windows(load.panel, event_date, ctx.cfg.est_len,
                                        ctx.cfg.half_window, ctx.cfg.gap);
    return {std::move(load.panel), windows, std::move(load.dropped)};
}

Detection detection_of(const RunConfig& cfg) {
    Detection d;
    d.theta = cfg.theta;
    d.threshold_override = cfg.threshold_override;
    return d;
}

void stage_generate(StageContext& ctx) {
    if (!ctx.cfg.scenario) {
        throw ConfigError("generate requires a scenario section in the config");
    }
    ScenarioFiles files = generate_scenario(*ctx.cfg.scenario, ctx.out);
    ctx.note_written(files.prices);
    ctx.note_written(files.weights);
    ctx.note_written(files.announcements);
    ctx.note_written(files.rates);
    ctx.note_written(files.truth);
}

std::map<std::string, double> weight_map_for(const std::map<std::string, EventStats>& stats,
                                             const CovariateTables& tables,
                                             std::vector<std::string>* missing) {
    std::map<std::string, double> maw;
    for (const auto& [ticker, es] : stats) {
        auto it = tables.market_weight.find(ticker);
        if (it == tables.market_weight.end()) {
            if (missing) missing->push_back(ticker);
            continue;
        }
        maw[ticker] = modified_active_weight(it->second, tables.fund_weight.at(ticker));
    }
    return maw;
}

void stage_study(StageContext& ctx) {
    const InputPaths inputs = resolve_inputs(ctx);
    LoadedPanel loaded = load_and_align(ctx, inputs);

    FitAllResult fit_result = fit_all(loaded.panel, loaded.windows, ctx.cfg.market_ticker);
    StudyResult study = study_all(loaded.panel, loaded.windows, fit_result,
                                  ctx.cfg.market_ticker, detection_of(ctx.cfg));

    std::vector<Exclusion> exclusions = loaded.dropped;
    exclusions.insert(exclusions.end(), fit_result.excluded.begin(), fit_result.excluded.end());
    exclusions.insert(exclusions.end(), study.skipped.begin(), study.skipped.end());
    write_exclusions_csv(exclusions, ctx.out / "excluded.csv");
    ctx.note_written(ctx.out / "excluded.csv");

    artifacts::write_fits_csv(fit_result.fits, ctx.out / "fits.csv");
    ctx.note_written(ctx.out / "fits.csv");
    artifacts::write_event_stats_csv(study.stats, ctx.out / "event_stats.csv");
    ctx.note_written(ctx.out / "event_stats.csv");

    // Percentages and grids are over the studied universe; the denominator and
    // every drop reason are on the record.
    ctx.metrics["study"] = {{"event_date", loaded.panel.calendar[static_cast<std::size_t>(
                                               loaded.windows.event_index)].to_string()},
                            {"n_fitted", fit_result.fits.size()},
                            {"n_studied", study.stats.size()},
                            {"n_excluded", exclusions.size()},
                            {"dof", study.dof},
                            {"critical_value", study.critical}};

    if (!study.stats.empty()) {
        artifacts::write_table2_csv(detection_percentages(study.stats), ctx.out / "table2.csv");
        ctx.note_written(ctx.out / "table2.csv");
    }

    // Scenario runs carry ground truth: score the detections against it.
    if (ctx.cfg.scenario && std::filesystem::exists(ctx.out / "truth.csv")) {
        const auto truth = load_truth(ctx.out / "truth.csv");
        std::map<std::string, bool> detected;
        for (const auto& [ticker, es] : study.stats) {
            bool any = false;
            for (bool b : es.detected_car) any = any || b;
            detected[ticker] = any;
        }
        std::ostringstream out;
        out << "kind,total,detected,true_pos,false_pos,false_neg,true_neg\n";
        for (const ConfusionRow& row : ground_truth_confusion(detected, truth)) {
            out << row.kind << ',' << row.total << ',' << row.detected << ',' << row.true_pos
                << ',' << row.false_pos << ',' << row.false_neg << ',' << row.true_neg << '\n';
        }
        ctx.write_file("confusion.csv", out.str());
    }

    CovariateTables tables;
    load_weights_into(tables, inputs.weights);
    std::vector<std::string> missing_weights;
    const std::map<std::string, double> maw = weight_map_for(study.stats, tables, &missing_weights);
    for (const std::string& t : missing_weights) {
        std::cerr << "warning: " << t << " has no holdings weights; excluded from ranked outputs\n";
    }
    if (maw.empty()) return;

    // Ranked detection grid: individual securities by modified active weight,
    // then sorted portfolios.
    std::vector<std::pair<std::string, double>> ranked(maw.begin(), maw.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<artifacts::DetectionGridRow> grid_rows;
    for (StatKind kind : {StatKind::CAR, StatKind::AR}) {
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            const EventStats& es = study.stats.at(ranked[r].first);
            artifacts::DetectionGridRow row;
            row.level = "security";
            row.rank = static_cast<int>(r) + 1;
            row.id = ranked[r].first;
            row.kind = kind;
            const auto& flags = kind == StatKind::AR ? es.detected_ar : es.detected_car;
            for (bool b : flags) row.detected.push_back(b ? 1 : 0);
            grid_rows.push_back(std::move(row));
        }
    }

    if (ctx.cfg.quantile_count <= static_cast<int>(maw.size())) {
        const auto memberships = build_sorted_portfolios(maw, ctx.cfg.quantile_count);
        PortfolioStudy pstudy = portfolio_event_study(memberships, loaded.panel, loaded.windows,
                                                      ctx.cfg.market_ticker, detection_of(ctx.cfg));
        std::ostringstream members_csv;
        members_csv << "portfolio,ticker\n";
        for (std::size_t g = 0; g < memberships.size(); ++g) {
            for (const std::string& t : memberships[g]) {
                members_csv << pstudy.stats[g].ticker << ',' << t << '\n';
            }
        }
        ctx.write_file("portfolios.csv", members_csv.str());

        for (StatKind kind : {StatKind::CAR, StatKind::AR}) {
            for (std::size_t g = 0; g < pstudy.stats.size(); ++g) {
                if (pstudy.perfect_fit[g]) continue;  // no t-statistics to chart
                const EventStats& es = pstudy.stats[g];
                artifacts::DetectionGridRow row;
                row.level = "portfolio";
                row.rank = static_cast<int>(g) + 1;
                row.id = es.ticker;
                row.kind = kind;
                const auto& flags = kind == StatKind::AR ? es.detected_ar : es.detected_car;
                for (bool b : flags) row.detected.push_back(b ? 1 : 0);
                grid_rows.push_back(std::move(row));
            }
        }
    } else {
        std::cerr << "warning: quantile_count " << ctx.cfg.quantile_count
                  << " exceeds the weighted universe (" << maw.size()
                  << "); portfolio study skipped\n";
    }

    artifacts::write_detection_grid_csv(grid_rows, ctx.cfg.half_window,
                                        ctx.out / "detection_grid.csv");
    ctx.note_written(ctx.out / "detection_grid.csv");
}

void stage_som(StageContext& ctx) {
    const InputPaths inputs = resolve_inputs(ctx);
    LoadedPanel loaded = load_and_align(ctx, inputs);

    const auto fits = artifacts::read_fits_csv(ctx.artifact("fits.csv", "study"));
    const auto stats = artifacts::read_event_stats_csv(ctx.artifact("event_stats.csv", "study"));

    CovariateTables tables = load_covariates(inputs.weights, inputs.announcements, inputs.rates);

    std::vector<std::string> universe;
    universe.reserve(stats.size());
    for (const auto& [ticker, es] : stats) universe.push_back(ticker);

    std::vector<std::string> missing_weights;
    const auto covariates = compute_covariates(loaded.panel, loaded.windows, tables, universe,
                                               &missing_weights);
    for (const std::string& t : missing_weights) {
        std::cerr << "warning: " << t << " has no holdings weights; excluded from the feature matrix\n";
    }

    std::map<std::string, EventStats> stats_eligible;
    std::map<std::string, FitSummary> fits_eligible;
    for (const auto& [ticker, cov] : covariates) {
        auto fit = fits.find(ticker);
        if (fit == fits.end()) {
            throw std::runtime_error("fits.csv has no entry for " + ticker +
                                     " (stale study outputs? re-run the study stage)");
        }
        stats_eligible.emplace(ticker, stats.at(ticker));
        fits_eligible.emplace(ticker, fit->second);
    }
    if (stats_eligible.empty()) throw std::runtime_error("no securities eligible for the feature matrix");

    FeatureMatrix fm = assemble_feature_matrix(stats_eligible, fits_eligible, covariates);

    artifacts::write_features_csv(fm.tickers, raw_values(fm), fm.column_names,
                                  ctx.out / "features_raw.csv");
    ctx.note_written(ctx.out / "features_raw.csv");
    artifacts::write_features_csv(fm.tickers, fm.values, fm.column_names,
                                  ctx.out / "features_std.csv");
    ctx.note_written(ctx.out / "features_std.csv");
    artifacts::write_feature_meta_csv(fm, ctx.out / "feature_meta.csv");
    ctx.note_written(ctx.out / "feature_meta.csv");

    SomParams params = ctx.cfg.som;
    params.seed = ctx.cfg.seed;
    SomMap map = train(fm.values, params);

    ctx.metrics["som"] = {{"n_inputs", fm.tickers.size()},
                          {"dim", fm.dim()},
                          {"initial_error", map.error_history[0]},
                          {"final_error", map.error_history[map.error_history.size() - 1]},
                          {"degenerate", map.degenerate}};

    artifacts::write_som_refs_csv(map, fm.column_names, ctx.out / "som_refs.csv");
    ctx.note_written(ctx.out / "som_refs.csv");
    artifacts::write_som_labels_csv(map, fm.tickers, ctx.out / "som_labels.csv");
    ctx.note_written(ctx.out / "som_labels.csv");
    artifacts::write_som_error_csv(map, ctx.out / "som_error.csv");
    ctx.note_written(ctx.out / "som_error.csv");
}

void stage_report(StageContext& ctx) {
    const std::filesystem::path refs_path = ctx.artifact("som_refs.csv", "som");
    const std::filesystem::path labels_path = ctx.artifact("som_labels.csv", "som");
    FeatureMatrix fm = artifacts::read_feature_matrix(ctx.artifact("features_std.csv", "som"),
                                                      ctx.artifact("feature_meta.csv", "som"));
    SomMap map = artifacts::read_som_map(refs_path, labels_path, fm.tickers);
    const auto stats = artifacts::read_event_stats_csv(ctx.artifact("event_stats.csv", "study"));
    const auto fits = artifacts::read_fits_csv(ctx.artifact("fits.csv", "study"));
    const artifacts::FeatureTable raw = artifacts::read_features_csv(
        ctx.artifact("features_raw.csv", "som"));

    const ReportConfig& rc = ctx.cfg.report;
    const double crit = detection_of(ctx.cfg).critical_for(ctx.cfg.est_len - 2);

    auto raw_column = [&](const std::string& name) {
        auto it = std::find(raw.column_names.begin(), raw.column_names.end(), name);
        if (it == raw.column_names.end()) {
            throw std::runtime_error("report: unknown feature column '" + name + "'");
        }
        const Eigen::Index c = it - raw.column_names.begin();
        std::map<std::string, double> by_ticker;
        for (std::size_t k = 0; k < raw.tickers.size(); ++k) {
            by_ticker[raw.tickers[k]] = raw.values(static_cast<Eigen::Index>(k), c);
        }
        return by_ticker;
    };

    auto emit_plane = [&](const std::string& stem, const CellGrid& grid) {
        artifacts::write_plane_csv(grid, ctx.out / ("plane_" + stem + ".csv"));
        ctx.note_written(ctx.out / ("plane_" + stem + ".csv"));
        render_heatmap(grid, rc.bins, rc.palette, ctx.out / (stem + ".svg"), stem);
        ctx.note_written(ctx.out / (stem + ".svg"));
    };

    // Component planes (the learned reference-vector surfaces).
    std::vector<std::string> plane_columns =
        rc.planes.empty() ? fm.column_names : rc.planes;
    for (const std::string& name : plane_columns) {
        auto col = fm.column_index(name);
        if (!col) throw std::runtime_error("report: unknown feature column '" + name + "'");
        emit_plane("comp_" + column_slug(name), component_plane(map, fm, *col));
    }

    // Empirical planes (cell means of the raw security attributes).
    std::vector<std::string> empirical_columns = rc.empirical_planes;
    if (empirical_columns.empty()) {
        empirical_columns = {"mAW", "rho", "Omega", "DWR", "alpha", "beta"};
    }
    for (const std::string& name : empirical_columns) {
        emit_plane("emp_" + column_slug(name), empirical_plane(map, fm.tickers, raw_column(name)));
    }

    // Significance planes per statistic kind and offset.
    std::vector<int> offsets = rc.significance_offsets;
    if (offsets.empty()) {
        for (int off = -ctx.cfg.half_window; off <= ctx.cfg.half_window; ++off) {
            offsets.push_back(off);
        }
    }
    for (const std::string& kind_name : rc.significance_kinds) {
        const StatKind kind = stat_kind_from(kind_name);
        for (int off : offsets) {
            const std::string stem = "sig_" + kind_name + "_" +
                                     (off < 0 ? "m" + std::to_string(-off)
                                              : "p" + std::to_string(off));
            emit_plane(stem, significance_plane(map, fm.tickers, stats, off, crit, kind));
        }
    }

    // Region drill-downs.
    if (!rc.regions.empty()) {
        std::map<std::string, CovariateRow> covariates;
        const auto maw_col = raw_column("mAW");
        const auto rho_col = raw_column("rho");
        const auto omega_col = raw_column("Omega");
        for (const std::string& ticker : fm.tickers) {
            covariates[ticker] =
                CovariateRow{maw_col.at(ticker), omega_col.at(ticker), rho_col.at(ticker), false};
        }
        for (const auto& [name, cells] : rc.regions) {
            RegionReport region = region_report(map, fm.tickers, cells, covariates, fits, stats);
            std::ostringstream out;
            out << "ticker,i,j,mAW,Omega,rho,DWR,alpha,beta";
            const int h = ctx.cfg.half_window;
            for (int off = -h; off <= h; ++off) {
                out << ",tCAR_" << (off < 0 ? "m" + std::to_string(-off) : "p" + std::to_string(off));
            }
            for (int off = -h; off <= h; ++off) {
                out << ",tAR_" << (off < 0 ? "m" + std::to_string(-off) : "p" + std::to_string(off));
            }
            out << '\n';
            for (const RegionRow& row : region.rows) {
                out << row.ticker << ',' << row.i << ',' << row.j << ','
                    << csv::format_full(row.cov.maw) << ',' << csv::format_full(row.cov.omega)
                    << ',' << csv::format_full(row.cov.rho) << ',' << csv::format_full(row.dwr)
                    << ',' << csv::format_full(row.alpha) << ',' << csv::format_full(row.beta);
                for (Eigen::Index k = 0; k < row.t_car.size(); ++k) {
                    out << ',' << csv::format_full(row.t_car[k]);
                }
                for (Eigen::Index k = 0; k < row.t_ar.size(); ++k) {
                    out << ',' << csv::format_full(row.t_ar[k]);
                }
                out << '\n';
            }
            ctx.write_file("region_" + safe_stem(name) + ".csv", out.str());
            std::cerr << "region " << name << ": " << region.rows.size() << " securities in "
                      << region.cell_counts.size() << " occupied cells\n";
        }
    }

    // Cumulative residual / cumulative AR series.
    if (!rc.cumulative_residuals.empty()) {
        const InputPaths inputs = resolve_inputs(ctx);
        LoadedPanel loaded = load_and_align(ctx, inputs);
        auto mi = loaded.panel.ticker_index(ctx.cfg.market_ticker);
        if (!mi) throw std::runtime_error("market ticker not in panel");
        const Eigen::VectorXd x_est = loaded.panel.returns.row(*mi)
                                          .segment(loaded.windows.est_begin,
                                                   loaded.windows.est_len())
                                          .transpose();
        for (const std::string& ticker : rc.cumulative_residuals) {
            auto si = loaded.panel.ticker_index(ticker);
            if (!si) throw std::runtime_error("cumulative residuals: unknown ticker " + ticker);
            const Eigen::VectorXd y_est = loaded.panel.returns.row(*si)
                                              .segment(loaded.windows.est_begin,
                                                       loaded.windows.est_len())
                                              .transpose();
            MarketModelFit fit = fit_market_model(y_est, x_est);
            CumulativeSeries series = cumulative_residual_series(
                fit, loaded.panel, loaded.windows, ticker, ctx.cfg.market_ticker);
            ctx.write_file("cumres_" + safe_stem(ticker) + ".csv", cumulative_series_csv(series));
        }
    }
}

ordered_json config_echo(const RunConfig& cfg) {
    ordered_json j;
    j["market_ticker"] = cfg.market_ticker;
    if (cfg.event_date) j["event_date"] = cfg.event_date->to_string();
    j["est_len"] = cfg.est_len;
    j["half_window"] = cfg.half_window;
    j["gap"] = cfg.gap;
    j["theta"] = cfg.theta;
    if (cfg.threshold_override) j["threshold_override"] = *cfg.threshold_override;
    j["quantile_count"] = cfg.quantile_count;
    j["min_coverage"] = cfg.min_coverage;
    j["log_returns"] = cfg.log_returns;
    j["seed"] = cfg.seed;
    j["som"] = {{"rows", cfg.som.rows},
                {"cols", cfg.som.cols},
                {"lambda_init", cfg.som.lambda_init},
                {"xi_init", cfg.som.xi_init},
                {"xi_start", cfg.som.xi_start},
                {"iterations", cfg.som.iterations}};
    if (cfg.scenario) {
        const ScenarioSpec& s = *cfg.scenario;
        ordered_json groups = ordered_json::array();
        for (const GroupSpec& g : s.groups) {
            ordered_json gj = {{"kind", to_string(g.kind)},
                               {"fraction", g.fraction},
                               {"magnitude", g.magnitude}};
            if (g.timing) gj["timing"] = *g.timing;
            groups.push_back(gj);
        }
        j["scenario"] = {{"n_securities", s.n_securities}, {"n_days", s.n_days},
                         {"event_index", s.event_index},   {"beta_range", {s.beta_lo, s.beta_hi}},
                         {"noise_sigma", s.noise_sigma},   {"market_sigma", s.market_sigma},
                         {"rate_sigma", s.rate_sigma},     {"groups", groups}};
    }
    if (cfg.inputs) {
        j["inputs"] = {{"prices", cfg.inputs->prices.string()},
                       {"weights", cfg.inputs->weights.string()},
                       {"announcements", cfg.inputs->announcements.string()},
                       {"rates", cfg.inputs->rates.string()}};
    }
    return j;
}

void write_run_summary(StageContext& ctx, const std::string& command) {
    ordered_json j;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["command"] = command;
    j["config"] = config_echo(ctx.cfg);
    if (!ctx.input_hashes.empty()) {
        ordered_json inputs;
        for (const auto& [name, hash] : ctx.input_hashes) inputs[name] = hash;
        j["inputs"] = inputs;
    }
    if (!ctx.metrics.empty()) j["metrics"] = ctx.metrics;
    std::vector<std::filesystem::path> sorted = ctx.written;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    ordered_json outputs = ordered_json::array();
    for (const std::filesystem::path& p : sorted) {
        outputs.push_back({{"path", std::filesystem::relative(p, ctx.out).string()},
                           {"fnv1a64", csv::fnv1a64_hex(csv::read_text_file(p))}});
    }
    j["outputs"] = outputs;
    csv::write_text_file(ctx.out / "run_summary.json", j.dump(2) + "\n");
}

}  // namespace

void RunConfig::validate() const {
    if (inputs.has_value() == scenario.has_value()) {
        throw ConfigError("config must provide exactly one of 'inputs' or 'scenario'");
    }
    if (inputs && !event_date) throw ConfigError("config with 'inputs' requires 'event_date'");
    if (est_len < 3) throw ConfigError("est_len must be >= 3");
    if (half_window < 0) throw ConfigError("half_window must be >= 0");
    if (gap < 0) throw ConfigError("gap must be >= 0");
    if (theta <= 0.0 || theta > 1.0) throw ConfigError("theta must lie in (0, 1]");
    if (quantile_count < 1) throw ConfigError("quantile_count must be >= 1");
    if (min_coverage < 0.0 || min_coverage > 1.0) throw ConfigError("min_coverage must lie in [0, 1]");
    if (som.rows < 1 || som.cols < 1) throw ConfigError("som grid dimensions must be >= 1");
    if (som.lambda_init <= 0.0 || som.lambda_init > 1.0) {
        throw ConfigError("som lambda_init must lie in (0, 1]");
    }
    if (som.iterations < 1) throw ConfigError("som iterations must be >= 1");
    if (report.bins < 2) throw ConfigError("report bins must be >= 2");
    if (scenario) {
        try {
            ScenarioSpec s = *scenario;
            s.est_len = est_len;
            s.half_window = half_window;
            s.validate();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }

    try {
        RunConfig cfg;
        auto resolve = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_absolute() ? path : base_dir / path;
        };

        if (j.contains("inputs")) {
            const auto& in = j.at("inputs");
            InputPaths p;
            p.prices = resolve(in.at("prices").get<std::string>());
            p.weights = resolve(in.at("weights").get<std::string>());
            p.announcements = resolve(in.at("announcements").get<std::string>());
            p.rates = resolve(in.at("rates").get<std::string>());
            cfg.inputs = p;
        }
        if (j.contains("event_date")) {
            cfg.event_date = Date::parse(j.at("event_date").get<std::string>());
        }
        cfg.market_ticker = j.value("market_ticker", cfg.market_ticker);
        cfg.est_len = j.value("est_len", cfg.est_len);
        cfg.half_window = j.value("half_window", cfg.half_window);
        cfg.gap = j.value("gap", cfg.gap);
        cfg.theta = j.value("theta", cfg.theta);
        if (j.contains("threshold_override") && !j.at("threshold_override").is_null()) {
            cfg.threshold_override = j.at("threshold_override").get<double>();
        }
        cfg.quantile_count = j.value("quantile_count", cfg.quantile_count);
        cfg.min_coverage = j.value("min_coverage", cfg.min_coverage);
        cfg.log_returns = j.value("log_returns", cfg.log_returns);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("out_dir")) cfg.out_dir = resolve(j.at("out_dir").get<std::string>());

        if (j.contains("som")) {
            const auto& s = j.at("som");
            cfg.som.rows = s.value("rows", cfg.som.rows);
            cfg.som.cols = s.value("cols", cfg.som.cols);
            cfg.som.lambda_init = s.value("lambda_init", cfg.som.lambda_init);
            cfg.som.xi_init = s.value("xi_init", cfg.som.xi_init);
            cfg.som.xi_start = s.value("xi_start", cfg.som.xi_start);
            cfg.som.iterations = s.value("iterations", cfg.som.iterations);
        }

        if (j.contains("scenario")) {
            const auto& s = j.at("scenario");
            ScenarioSpec spec;
            spec.n_securities = s.value("n_securities", spec.n_securities);
            spec.n_days = s.value("n_days", spec.n_days);
            spec.event_index = s.value("event_index", spec.event_index);
            if (s.contains("beta_range")) {
                spec.beta_lo = s.at("beta_range").at(0).get<double>();
                spec.beta_hi = s.at("beta_range").at(1).get<double>();
            }
            spec.noise_sigma = s.value("noise_sigma", spec.noise_sigma);
            spec.market_sigma = s.value("market_sigma", spec.market_sigma);
            spec.rate_sigma = s.value("rate_sigma", spec.rate_sigma);
            if (s.contains("groups")) {
                for (const auto& g : s.at("groups")) {
                    GroupSpec gs;
                    gs.kind = group_kind_from(g.at("kind").get<std::string>());
                    gs.fraction = g.at("fraction").get<double>();
                    gs.magnitude = g.value("magnitude", 0.0);
                    if (g.contains("timing") && !g.at("timing").is_null()) {
                        gs.timing = g.at("timing").get<int>();
                    }
                    spec.groups.push_back(gs);
                }
            }
            cfg.scenario = spec;
        }

        if (j.contains("report")) {
            const auto& r = j.at("report");
            cfg.report.bins = r.value("bins", cfg.report.bins);
            cfg.report.palette = r.value("palette", cfg.report.palette);
            auto read_name_list = [&](const char* key, std::vector<std::string>& target) {
                if (!r.contains(key)) return;
                const auto& v = r.at(key);
                if (v.is_string() && v.get<std::string>() == "all") return;  // empty = all
                target = v.get<std::vector<std::string>>();
            };
            read_name_list("planes", cfg.report.planes);
            read_name_list("empirical", cfg.report.empirical_planes);
            if (r.contains("significance_kinds")) {
                cfg.report.significance_kinds =
                    r.at("significance_kinds").get<std::vector<std::string>>();
            }
            if (r.contains("significance_offsets")) {
                const auto& v = r.at("significance_offsets");
                if (!(v.is_string() && v.get<std::string>() == "all")) {
                    cfg.report.significance_offsets = v.get<std::vector<int>>();
                }
            }
            if (r.contains("regions")) {
                for (const auto& [name, cells] : r.at("regions").items()) {
                    std::vector<std::pair<int, int>> parsed;
                    for (const auto& c : cells) {
                        parsed.emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
                    }
                    cfg.report.regions[name] = parsed;
                }
            }
            if (r.contains("cumulative_residuals")) {
                cfg.report.cumulative_residuals =
                    r.at("cumulative_residuals").get<std::vector<std::string>>();
            }
        }

        // Scenario placement parameters mirror the top-level window settings.
        if (cfg.scenario) {
            cfg.scenario->est_len = cfg.est_len;
            cfg.scenario->half_window = cfg.half_window;
            cfg.scenario->seed = cfg.seed;
        }
        cfg.validate();
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& config_path) {
    std::string text;
    try {
        text = csv::read_text_file(config_path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config(text, config_path.has_parent_path()
                                      ? config_path.parent_path()
                                      : std::filesystem::path("."));
}

std::vector<std::filesystem::path> run_command(const std::string& command, RunConfig config) {
    config.validate();
    StageContext ctx;
    ctx.cfg = std::move(config);
    ctx.out = ctx.cfg.out_dir;
    std::filesystem::create_directories(ctx.out);

    try {
        if (command == "generate") {
            stage_generate(ctx);
        } else if (command == "study") {
            fingerprint_inputs(ctx, resolve_inputs(ctx));
            stage_study(ctx);
        } else if (command == "som") {
            fingerprint_inputs(ctx, resolve_inputs(ctx));
            stage_som(ctx);
        } else if (command == "report") {
            stage_report(ctx);
        } else if (command == "run") {
            if (ctx.cfg.scenario) stage_generate(ctx);
            fingerprint_inputs(ctx, resolve_inputs(ctx));
            stage_study(ctx);
            stage_som(ctx);
            stage_report(ctx);
        } else {
            throw ConfigError("unknown command '" + command + "'");
        }
        write_run_summary(ctx, command);
        ctx.note_written(ctx.out / "run_summary.json");
    } catch (...) {
        // Remove every file this invocation produced; leave prior artifacts.
        for (const std::filesystem::path& p : ctx.written) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        throw;
    }
    return ctx.written;
}

}  // namespace evsom
