#include "evsom/event_study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "evsom/stats.hpp"

namespace evsom {

double Detection::critical_for(int dof) const {
    if (threshold_override) return *threshold_override;
    return critical_value(theta, dof);
}

Eigen::VectorXd abnormal_returns(const MarketModelFit& fit,
                                 const Eigen::Ref<const Eigen::VectorXd>& y_event,
                                 const Eigen::Ref<const Eigen::VectorXd>& x_event) {
    if (y_event.size() != x_event.size()) {
        throw std::invalid_argument("abnormal_returns: length mismatch");
    }
    return (y_event.array() - fit.alpha - fit.beta * x_event.array()).matrix();
}

Eigen::VectorXd cumulate(const Eigen::Ref<const Eigen::VectorXd>& ar) {
    Eigen::VectorXd car(ar.size());
    double acc = 0.0;
    for (Eigen::Index t = 0; t < ar.size(); ++t) {
        acc += ar[t];
        car[t] = acc;
    }
    return car;
}

TStats t_statistics(const Eigen::Ref<const Eigen::VectorXd>& ar, double sigma_hat) {
    if (sigma_hat <= 0.0) {
        throw std::invalid_argument("t_statistics: perfect fit, t undefined (sigma is zero)");
    }
    TStats t;
    t.t_ar = ar / sigma_hat;
    const Eigen::VectorXd car = cumulate(ar);
    t.t_car.resize(ar.size());
    for (Eigen::Index tau = 0; tau < ar.size(); ++tau) {
        const double days = static_cast<double>(tau + 1);
        t.t_car[tau] = car[tau] / (sigma_hat * std::sqrt(days));
    }
    return t;
}

double critical_value(double theta, int dof) { return student_t_critical(theta, dof); }

EventStats make_event_stats(const std::string& ticker, const MarketModelFit& fit,
                            const Eigen::Ref<const Eigen::VectorXd>& y_event,
                            const Eigen::Ref<const Eigen::VectorXd>& x_event, double crit) {
    EventStats es;
    es.ticker = ticker;
    es.ar = abnormal_returns(fit, y_event, x_event);
    es.car = cumulate(es.ar);
    TStats t = t_statistics(es.ar, fit.sigma);
    es.t_ar = std::move(t.t_ar);
    es.t_car = std::move(t.t_car);
    es.detected_ar.resize(static_cast<std::size_t>(es.ar.size()));
    es.detected_car.resize(static_cast<std::size_t>(es.ar.size()));
    for (Eigen::Index tau = 0; tau < es.ar.size(); ++tau) {
        es.detected_ar[static_cast<std::size_t>(tau)] = std::abs(es.t_ar[tau]) > crit;
        es.detected_car[static_cast<std::size_t>(tau)] = std::abs(es.t_car[tau]) > crit;
    }
    return es;
}

StudyResult study_all(const ReturnsPanel& panel, const WindowIndex& windows,
                      const FitAllResult& fits, const std::string& market_ticker,
                      const Detection& detection) {
    auto mi = panel.ticker_index(market_ticker);
    if (!mi) throw std::runtime_error("market ticker '" + market_ticker + "' not in panel");
    const Eigen::VectorXd x_event =
        panel.returns.row(*mi).segment(windows.event_begin(), windows.event_days()).transpose();

    StudyResult result;
    result.dof = windows.est_len() - 2;
    result.critical = detection.critical_for(result.dof);
    for (const auto& [ticker, fit] : fits.fits) {
        if (fit.perfect_fit) {
            result.skipped.push_back({ticker, "perfect fit, t undefined"});
            continue;
        }
        auto si = panel.ticker_index(ticker);
        if (!si) throw std::runtime_error("fitted ticker '" + ticker + "' not in panel");
        const Eigen::VectorXd y_event =
            panel.returns.row(*si)
                .segment(windows.event_begin(), windows.event_days())
                .transpose();
        result.stats.emplace(ticker,
                             make_event_stats(ticker, fit, y_event, x_event, result.critical));
    }
    return result;
}

std::vector<std::vector<std::string>> build_sorted_portfolios(
    const std::map<std::string, double>& weight_by_ticker, int quantile_count) {
    const int n = static_cast<int>(weight_by_ticker.size());
    if (quantile_count < 1) throw std::invalid_argument("build_sorted_portfolios: need q >= 1");
    if (quantile_count > n) {
        throw std::invalid_argument("build_sorted_portfolios: q exceeds universe size");
    }
    std::vector<std::pair<std::string, double>> order(weight_by_ticker.begin(),
                                                      weight_by_ticker.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::vector<std::string>> groups;
    groups.reserve(static_cast<std::size_t>(quantile_count));
    const int base = n / quantile_count;
    const int remainder = n % quantile_count;
    std::size_t pos = 0;
    for (int g = 0; g < quantile_count; ++g) {
        const int size = base + (g < remainder ? 1 : 0);
        std::vector<std::string> members;
        members.reserve(static_cast<std::size_t>(size));
        for (int k = 0; k < size; ++k) members.push_back(order[pos++].first);
        groups.push_back(std::move(members));
    }
    return groups;
}

PortfolioStudy portfolio_event_study(const std::vector<std::vector<std::string>>& memberships,
                                     const ReturnsPanel& panel, const WindowIndex& windows,
                                     const std::string& market_ticker, const Detection& detection) {
    auto mi = panel.ticker_index(market_ticker);
    if (!mi) throw std::runtime_error("market ticker '" + market_ticker + "' not in panel");
    const Eigen::VectorXd x_est =
        panel.returns.row(*mi).segment(windows.est_begin, windows.est_len()).transpose();
    const Eigen::VectorXd x_event =
        panel.returns.row(*mi).segment(windows.event_begin(), windows.event_days()).transpose();

    const int digits = memberships.size() >= 100 ? 3 : 2;
    PortfolioStudy study;
    study.memberships = memberships;
    for (std::size_t g = 0; g < memberships.size(); ++g) {
        const std::vector<std::string>& members = memberships[g];
        if (members.empty()) {
            throw std::invalid_argument("portfolio_event_study: empty portfolio " +
                                        std::to_string(g + 1));
        }
        Eigen::VectorXd y_est = Eigen::VectorXd::Zero(windows.est_len());
        Eigen::VectorXd y_event = Eigen::VectorXd::Zero(windows.event_days());
        for (const std::string& ticker : members) {
            auto si = panel.ticker_index(ticker);
            if (!si) throw std::runtime_error("portfolio member '" + ticker + "' not in panel");
            y_est += panel.returns.row(*si)
                         .segment(windows.est_begin, windows.est_len())
                         .transpose();
            y_event += panel.returns.row(*si)
                           .segment(windows.event_begin(), windows.event_days())
                           .transpose();
        }
        y_est /= static_cast<double>(members.size());
        y_event /= static_cast<double>(members.size());

        MarketModelFit fit = fit_market_model(y_est, x_est);
        char id[24];
        std::snprintf(id, sizeof(id), "P%0*d", digits, static_cast<int>(g + 1));
        study.perfect_fit.push_back(fit.perfect_fit);
        if (fit.perfect_fit) {
            EventStats es;
            es.ticker = id;
            es.ar = abnormal_returns(fit, y_event, x_event);
            es.car = cumulate(es.ar);
            study.stats.push_back(std::move(es));
        } else {
            const double crit = detection.critical_for(fit.n_obs - 2);
            study.stats.push_back(make_event_stats(id, fit, y_event, x_event, crit));
        }
    }
    return study;
}

DetectionTable detection_percentages(const std::map<std::string, EventStats>& stats) {
    if (stats.empty()) throw std::invalid_argument("detection_percentages: no securities");
    const int days = static_cast<int>(stats.begin()->second.ar.size());
    DetectionTable table;
    table.half_window = (days - 1) / 2;
    table.n_securities = static_cast<int>(stats.size());
    table.pct_ar = Eigen::VectorXd::Zero(days);
    table.pct_car = Eigen::VectorXd::Zero(days);
    for (const auto& [ticker, es] : stats) {
        for (int tau = 0; tau < days; ++tau) {
            if (es.detected_ar[static_cast<std::size_t>(tau)]) table.pct_ar[tau] += 1.0;
            if (es.detected_car[static_cast<std::size_t>(tau)]) table.pct_car[tau] += 1.0;
        }
    }
    table.pct_ar /= static_cast<double>(table.n_securities);
    table.pct_car /= static_cast<double>(table.n_securities);
    return table;
}

}  // namespace evsom
