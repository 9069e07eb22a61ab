#include "evsom/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace evsom {

namespace {

// Continued-fraction evaluation for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, int dof) {
    if (dof < 1) throw std::invalid_argument("student_t_cdf: dof must be >= 1");
    const double v = static_cast<double>(dof);
    const double x = v / (v + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * v, 0.5, x);  // P(T > |t|)
    return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_critical(double theta, int dof) {
    if (dof < 1) throw std::invalid_argument("student_t_critical: dof must be >= 1");
    if (theta >= 1.0) return 0.0;
    if (theta <= 0.0) throw std::invalid_argument("student_t_critical: theta must be > 0");

    // Two-sided tail P(|T| > c) = I_{v/(v+c^2)}(v/2, 1/2); bisect on c.
    const double v = static_cast<double>(dof);
    auto tail = [&](double c) { return incomplete_beta(0.5 * v, 0.5, v / (v + c * c)); };

    double lo = 0.0;
    double hi = 1.0;
    while (tail(hi) > theta) {
        hi *= 2.0;
        if (hi > 1e12) return hi;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) > theta) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double pearson_correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           bool* degenerate) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson_correlation: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson_correlation: need >= 2 points");
    if (degenerate) *degenerate = false;
    const Eigen::ArrayXd xc = x.array() - x.mean();
    const Eigen::ArrayXd yc = y.array() - y.mean();
    const double sxx = (xc * xc).sum();
    const double syy = (yc * yc).sum();
    if (sxx == 0.0 || syy == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return (xc * yc).sum() / std::sqrt(sxx * syy);
}

}  // namespace evsom
