#include "evsom/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evsom/stats.hpp"

namespace evsom {

double modified_active_weight(double w_market, double w_gpif) {
    if (w_market <= 0.0) throw std::invalid_argument("modified_active_weight: zero market weight");
    return (w_market - w_gpif) / w_market;
}

double announcement_proximity(int event_index, const std::optional<Date>& announce,
                              const std::vector<Date>& calendar) {
    if (!announce) return 0.0;
    const int ai = calendar_map_forward(calendar, *announce);
    const int d = event_index - ai;
    if (d == 0) return 1.0;
    return std::tanh(1.0 / static_cast<double>(d));
}

RateCorr rate_correlation(const Eigen::Ref<const Eigen::VectorXd>& returns,
                          const Eigen::Ref<const Eigen::VectorXd>& rate_changes) {
    if (returns.size() != rate_changes.size()) {
        throw std::invalid_argument("rate_correlation: length mismatch");
    }
    if (returns.size() < 3) throw std::invalid_argument("rate_correlation: need >= 3 points");
    RateCorr rc;
    rc.rho = pearson_correlation(returns, rate_changes, &rc.degenerate);
    return rc;
}

std::map<std::string, CovariateRow> compute_covariates(
    const ReturnsPanel& panel, const WindowIndex& windows, const CovariateTables& tables,
    const std::vector<std::string>& tickers, std::vector<std::string>* missing_weights) {
    const Eigen::VectorXd changes_full = rate_changes(tables, panel.calendar);
    const Eigen::VectorXd changes_est = changes_full.segment(windows.est_begin, windows.est_len());

    std::map<std::string, CovariateRow> rows;
    for (const std::string& ticker : tickers) {
        auto wm = tables.market_weight.find(ticker);
        if (wm == tables.market_weight.end()) {
            if (missing_weights) missing_weights->push_back(ticker);
            continue;
        }
        auto si = panel.ticker_index(ticker);
        if (!si) throw std::runtime_error("covariates: ticker '" + ticker + "' not in panel");

        CovariateRow row;
        row.maw = modified_active_weight(wm->second, tables.fund_weight.at(ticker));
        row.omega =
            announcement_proximity(windows.event_index, tables.announcement_for(ticker),
                                   panel.calendar);
        const Eigen::VectorXd y =
            panel.returns.row(*si).segment(windows.est_begin, windows.est_len()).transpose();
        RateCorr rc = rate_correlation(y, changes_est);
        row.rho = rc.rho;
        row.rho_degenerate = rc.degenerate;
        rows.emplace(ticker, row);
    }
    return rows;
}

std::optional<int> FeatureMatrix::column_index(const std::string& name) const {
    auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) return std::nullopt;
    return static_cast<int>(it - column_names.begin());
}

double FeatureMatrix::destandardize(int column, double v) const {
    return v * column_stds[column] + column_means[column];
}

double FeatureMatrix::restandardize(int column, double raw) const {
    if (column_stds[column] == 0.0) return 0.0;
    return (raw - column_means[column]) / column_stds[column];
}

std::vector<std::string> feature_column_names(int half_window) {
    std::vector<std::string> names;
    names.push_back("mAW");
    for (int off = -half_window; off <= half_window; ++off) {
        names.push_back("tCAR[" + std::string(off > 0 ? "+" : "") + std::to_string(off) + "]");
    }
    for (int off = -half_window; off <= half_window; ++off) {
        names.push_back("tAR[" + std::string(off > 0 ? "+" : "") + std::to_string(off) + "]");
    }
    names.push_back("rho");
    names.push_back("Omega");
    names.push_back("DWR");
    names.push_back("alpha");
    names.push_back("beta");
    return names;
}

std::string column_slug(const std::string& column_name) {
    std::string slug;
    for (char c : column_name) {
        if (c == '[') {
            slug += '_';
        } else if (c == ']') {
            // skip
        } else if (c == '-') {
            slug += 'm';
        } else if (c == '+') {
            slug += 'p';
        } else {
            slug += c;
        }
    }
    return slug;
}

FeatureMatrix assemble_feature_matrix(const std::map<std::string, EventStats>& stats,
                                      const std::map<std::string, FitSummary>& fits,
                                      const std::map<std::string, CovariateRow>& covariates) {
    auto check_same_keys = [&](const auto& other, const char* what) {
        std::string missing;
        for (const auto& [ticker, es] : stats) {
            if (!other.count(ticker)) missing += (missing.empty() ? "" : ", ") + ticker;
        }
        if (stats.size() != other.size() || !missing.empty()) {
            for (const auto& [ticker, v] : other) {
                if (!stats.count(ticker)) missing += (missing.empty() ? "" : ", ") + ticker;
            }
            throw std::invalid_argument(std::string("assemble_feature_matrix: ticker sets differ (") +
                                        what + "): " + missing);
        }
    };
    check_same_keys(fits, "fits");
    check_same_keys(covariates, "covariates");
    if (stats.empty()) throw std::invalid_argument("assemble_feature_matrix: no securities");

    const int half_window = stats.begin()->second.half_window();
    const int days = 2 * half_window + 1;

    FeatureMatrix fm;
    fm.column_names = feature_column_names(half_window);
    const int dim = fm.dim();
    const int n = static_cast<int>(stats.size());
    fm.tickers.reserve(static_cast<std::size_t>(n));
    fm.values.resize(n, dim);

    int row = 0;
    for (const auto& [ticker, es] : stats) {
        if (static_cast<int>(es.ar.size()) != days) {
            throw std::invalid_argument("assemble_feature_matrix: inconsistent event window for " +
                                        ticker);
        }
        const FitSummary& fit = fits.at(ticker);
        const CovariateRow& cov = covariates.at(ticker);
        fm.tickers.push_back(ticker);
        int c = 0;
        fm.values(row, c++) = cov.maw;
        for (int tau = 0; tau < days; ++tau) fm.values(row, c++) = es.t_car[tau];
        for (int tau = 0; tau < days; ++tau) fm.values(row, c++) = es.t_ar[tau];
        fm.values(row, c++) = cov.rho;
        fm.values(row, c++) = cov.omega;
        fm.values(row, c++) = fit.dw;
        fm.values(row, c++) = fit.alpha;
        fm.values(row, c++) = fit.beta;
        ++row;
    }

    // Column-wise z-scoring; constant columns become all-zero and are flagged.
    fm.column_means.resize(dim);
    fm.column_stds.resize(dim);
    fm.constant_flag.assign(static_cast<std::size_t>(dim), false);
    for (int c = 0; c < dim; ++c) {
        Eigen::VectorXd col = fm.values.col(c);
        const double mean = col.mean();
        fm.column_means[c] = mean;
        const bool constant = col.minCoeff() == col.maxCoeff();
        if (constant || n < 2) {
            fm.column_stds[c] = 0.0;
            fm.constant_flag[static_cast<std::size_t>(c)] = true;
            fm.values.col(c).setZero();
            continue;
        }
        const double std_dev =
            std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n - 1));
        fm.column_stds[c] = std_dev;
        fm.values.col(c) = (col.array() - mean) / std_dev;
    }
    return fm;
}

Eigen::MatrixXd raw_values(const FeatureMatrix& fm) {
    Eigen::MatrixXd raw = fm.values;
    for (int c = 0; c < fm.dim(); ++c) {
        raw.col(c) = raw.col(c).array() * fm.column_stds[c] + fm.column_means[c];
    }
    return raw;
}

}  // namespace evsom
