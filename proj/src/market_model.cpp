#include "evsom/market_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace evsom {

FitSummary summarize(const MarketModelFit& fit) {
    return FitSummary{fit.alpha, fit.beta, fit.sigma, fit.dw, fit.n_obs, fit.perfect_fit};
}

MarketModelFit fit_market_model(const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::Index n = y.size();
    if (n != x.size()) throw std::invalid_argument("fit_market_model: length mismatch");
    if (n < 3) throw std::invalid_argument("fit_market_model: need at least 3 observations");

    const double x_mean = x.mean();
    const double y_mean = y.mean();
    const Eigen::ArrayXd xc = x.array() - x_mean;
    const double sxx = (xc * xc).sum();
    if (sxx == 0.0) throw std::invalid_argument("fit_market_model: degenerate regressor");

    MarketModelFit fit;
    fit.n_obs = static_cast<int>(n);
    fit.beta = (xc * (y.array() - y_mean)).sum() / sxx;
    fit.alpha = y_mean - fit.beta * x_mean;
    fit.residuals = (y.array() - fit.alpha - fit.beta * x.array()).matrix();

    const double ssr = fit.residuals.squaredNorm();
    fit.sigma = std::sqrt(ssr / static_cast<double>(n - 2));

    const double y_scale = std::max(y.cwiseAbs().maxCoeff(), 1e-300);
    fit.perfect_fit = fit.sigma <= 1e-12 * y_scale;
    if (fit.perfect_fit) {
        fit.dw = std::numeric_limits<double>::quiet_NaN();
    } else {
        fit.dw = durbin_watson(fit.residuals);
    }
    return fit;
}

double durbin_watson(const Eigen::Ref<const Eigen::VectorXd>& residuals) {
    const Eigen::Index n = residuals.size();
    if (n < 2) throw std::invalid_argument("durbin_watson: need at least 2 residuals");
    const double denom = residuals.squaredNorm();
    if (denom == 0.0) {
        throw std::invalid_argument("durbin_watson: undefined for all-zero residuals (perfect fit)");
    }
    const double num =
        (residuals.tail(n - 1) - residuals.head(n - 1)).squaredNorm();
    return num / denom;
}

FitAllResult fit_all(const ReturnsPanel& panel, const WindowIndex& windows,
                     const std::string& market_ticker) {
    auto mi = panel.ticker_index(market_ticker);
    if (!mi) throw std::runtime_error("market ticker '" + market_ticker + "' not in panel");
    if (!panel.window_valid(*mi, windows.est_begin, windows.est_end) ||
        !panel.window_valid(*mi, windows.event_begin(), windows.event_end())) {
        throw std::runtime_error("market series incomplete over the estimation/event windows");
    }

    const Eigen::VectorXd market_est =
        panel.returns.row(*mi).segment(windows.est_begin, windows.est_len()).transpose();

    FitAllResult result;
    for (int i = 0; i < panel.n_securities(); ++i) {
        if (i == *mi) continue;
        const std::string& ticker = panel.tickers[static_cast<std::size_t>(i)];
        if (!panel.window_valid(i, windows.est_begin, windows.est_end)) {
            result.excluded.push_back({ticker, "missing returns in estimation window"});
            continue;
        }
        if (!panel.window_valid(i, windows.event_begin(), windows.event_end())) {
            result.excluded.push_back({ticker, "missing returns in event window"});
            continue;
        }
        const Eigen::VectorXd y =
            panel.returns.row(i).segment(windows.est_begin, windows.est_len()).transpose();
        result.fits.emplace(ticker, fit_market_model(y, market_est));
    }
    return result;
}

}  // namespace evsom
