#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "evsom/panel.hpp"

namespace evsom {

/// Single-factor OLS fit of a security's returns on the market benchmark,
/// with residual diagnostics.
struct MarketModelFit {
    double alpha = 0.0;
    double beta = 0.0;
    Eigen::VectorXd residuals;  // time order, length n_obs
    double sigma = 0.0;         // sqrt(SSR / (n - 2))
    double dw = 0.0;            // Durbin-Watson ratio; meaningless when perfect_fit
    int n_obs = 0;
    bool perfect_fit = false;   // sigma numerically zero: t-statistics undefined

    double predict(double market_return) const { return alpha + beta * market_return; }
};

/// Condensed fit row as persisted in fits.csv (no residual vector).
struct FitSummary {
    double alpha = 0.0;
    double beta = 0.0;
    double sigma = 0.0;
    double dw = 0.0;
    int n_obs = 0;
    bool perfect_fit = false;
};

FitSummary summarize(const MarketModelFit& fit);

/// OLS via centered sums. Throws on length mismatch, n < 3, or a
/// zero-variance regressor.
MarketModelFit fit_market_model(const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::VectorXd>& x);

/// DW = sum (e_t - e_{t-1})^2 / sum e_t^2. Throws for length < 2 or an
/// all-zero residual vector (perfect fit; caller records the flag instead).
double durbin_watson(const Eigen::Ref<const Eigen::VectorXd>& residuals);

struct FitAllResult {
    std::map<std::string, MarketModelFit> fits;
    std::vector<Exclusion> excluded;
};

/// Fits every security with full coverage on the estimation and event
/// windows; the rest are listed with reasons. The market series itself must
/// be complete on both windows.
FitAllResult fit_all(const ReturnsPanel& panel, const WindowIndex& windows,
                     const std::string& market_ticker);

}  // namespace evsom
