#include "aquastream/metrics.hpp"

#include "aquastream/error.hpp"

#include <cmath>

namespace aquastream::metrics {

namespace {

void check_series(std::span<const double> v, const char* name) {
    if (v.empty()) raise(Errc::empty_series, std::string(name) + " series is empty");
    for (double x : v)
        if (!std::isfinite(x)) raise(Errc::non_finite_value, std::string(name) + " series has a non-finite value");
}

void check_pair(std::span<const double> obs, std::span<const double> pred) {
    check_series(obs, "observed");
    check_series(pred, "predicted");
    if (obs.size() != pred.size())
        raise(Errc::length_mismatch, "series lengths differ: " + std::to_string(obs.size()) + " vs " +
                                         std::to_string(pred.size()));
}

double sum_sq_dev(std::span<const double> v, double center) {
    double s = 0.0;
    for (double x : v) s += (x - center) * (x - center);
    return s;
}

double sum_sq_err(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

} // namespace

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
    double m = mean(v);
    return std::sqrt(sum_sq_dev(v, m) / static_cast<double>(v.size()));
}

double rmse(std::span<const double> obs, std::span<const double> pred) {
    check_pair(obs, pred);
    return std::sqrt(sum_sq_err(obs, pred) / static_cast<double>(obs.size()));
}

double nash(std::span<const double> obs, std::span<const double> pred) {
    check_pair(obs, pred);
    double denom = sum_sq_dev(obs, mean(obs));
    if (denom <= 0.0) raise(Errc::constant_observed, "observed series is constant");
    return 1.0 - sum_sq_err(obs, pred) / denom;
}

double r_coef(std::span<const double> obs, std::span<const double> pred) {
    check_pair(obs, pred);
    double denom = sum_sq_dev(obs, mean(obs));
    if (denom <= 0.0) raise(Errc::constant_observed, "observed series is constant");
    double radicand = (denom - sum_sq_err(obs, pred)) / denom;
    if (radicand < 0.0)
        raise(Errc::undefined_metric, "negative radicand (model worse than the mean predictor)");
    return std::sqrt(radicand);
}

double ia(std::span<const double> obs, std::span<const double> pred) {
    check_pair(obs, pred);
    double obar = mean(obs);
    double denom = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        double d = std::abs(pred[i] - obar) + std::abs(obs[i] - obar);
        denom += d * d;
    }
    if (denom <= 0.0)
        raise(Errc::degenerate_denominator, "all observed and predicted values equal the observed mean");
    return 1.0 - sum_sq_err(obs, pred) / denom;
}

double cross_correlation(std::span<const double> y, std::span<const double> x, long k) {
    check_series(y, "y");
    check_series(x, "x");
    if (y.size() != x.size())
        raise(Errc::length_mismatch, "series lengths differ: " + std::to_string(y.size()) + " vs " +
                                         std::to_string(x.size()));
    const long n = static_cast<long>(y.size());
    if (k >= n || k <= -n) raise(Errc::lag_too_large, "|k| must be smaller than the series length");
    double ybar = mean(y);
    double xbar = mean(x);
    double sy = stddev(y);
    double sx = stddev(x);
    if (sy <= 0.0 || sx <= 0.0) raise(Errc::constant_series, "zero standard deviation");

    double s = 0.0;
    if (k >= 0) {
        for (long t = 0; t < n - k; ++t) s += (y[t] - ybar) * (x[t + k] - xbar);
    } else {
        for (long t = -k; t < n; ++t) s += (y[t] - ybar) * (x[t + k] - xbar);
    }
    return s / (static_cast<double>(n) * sy * sx);
}

LagScan select_lag(std::span<const double> y, std::span<const double> x, int k_max) {
    if (k_max < 0) raise(Errc::lag_too_large, "k_max must be non-negative");
    LagScan scan;
    scan.correlations.reserve(static_cast<std::size_t>(k_max) + 1);
    for (int d = 0; d <= k_max; ++d) {
        // correlation of y_t with x_{t-d}: the negative-lag branch of the
        // two-sided definition above.
        scan.correlations.push_back(cross_correlation(y, x, -static_cast<long>(d)));
    }
    int best = 0;
    for (int d = 1; d <= k_max; ++d)
        if (scan.correlations[static_cast<std::size_t>(d)] >
            scan.correlations[static_cast<std::size_t>(best)])
            best = d;
    scan.chosen_lag = best;
    return scan;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j{{"n", n},
                     {"rmse", rmse},
                     {"nash", nash},
                     {"ia", ia},
                     {"r_defined", r.has_value()},
                     {"mean_obs", mean_obs},
                     {"std_obs", std_obs},
                     {"mean_pred", mean_pred},
                     {"std_pred", std_pred}};
    if (r)
        j["r"] = *r;
    else
        j["r"] = nullptr;
    return j;
}

MetricsReport evaluate(std::span<const double> obs, std::span<const double> pred) {
    check_pair(obs, pred);
    if (obs.size() < 2) raise(Errc::empty_series, "evaluate needs at least two points");
    MetricsReport rep;
    rep.n = obs.size();
    rep.rmse = rmse(obs, pred);
    rep.nash = nash(obs, pred);
    rep.ia = ia(obs, pred);
    try {
        rep.r = r_coef(obs, pred);
    } catch (const Error& e) {
        if (e.code() != Errc::undefined_metric) throw;
        rep.r = std::nullopt;
    }
    rep.mean_obs = mean(obs);
    rep.std_obs = stddev(obs);
    rep.mean_pred = mean(pred);
    rep.std_pred = stddev(pred);
    return rep;
}

} // namespace aquastream::metrics
