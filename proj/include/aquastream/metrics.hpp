#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace aquastream::metrics {

// Model-evaluation statistics for observed/predicted series, plus
// cross-correlation lag analysis. All series must be finite; paired
// operations require equal lengths. Standard deviations use the
// population convention (divide by N) throughout, which makes the
// zero-lag autocorrelation of a series with itself exactly 1.

double mean(std::span<const double> v);
double stddev(std::span<const double> v); // population

double rmse(std::span<const double> obs, std::span<const double> pred);

// 1 - sum((O-P)^2) / sum((O-mean(O))^2). Requires non-constant obs.
double nash(std::span<const double> obs, std::span<const double> pred);

// sqrt((sum((O-mean)^2) - sum((O-P)^2)) / sum((O-mean)^2)).
// Throws Error(undefined_metric) when the radicand is negative.
double r_coef(std::span<const double> obs, std::span<const double> pred);

// Willmott index of agreement, in [0,1].
double ia(std::span<const double> obs, std::span<const double> pred);

// Truncated-sum cross-correlation with the 1/N normalization:
//   k >= 0: (1/N) * sum_{t=1..N-k} (Y_t - mean(Y))(X_{t+k} - mean(X)) / (s_Y s_X)
//   k <  0: (1/N) * sum_{t=1-k..N} (Y_t - mean(Y))(X_{t+k} - mean(X)) / (s_Y s_X)
double cross_correlation(std::span<const double> y, std::span<const double> x, long k);

struct LagScan {
    // correlations[d] is the correlation of y_t against x_{t-d}, i.e. how well
    // x delayed by d samples explains y.
    std::vector<double> correlations;
    int chosen_lag = 0;
};

// Scans delays d in [0, k_max] and picks the argmax correlation; ties break
// toward the smaller delay.
LagScan select_lag(std::span<const double> y, std::span<const double> x, int k_max);

struct MetricsReport {
    std::size_t n = 0;
    double rmse = 0.0;
    double nash = 0.0;
    double ia = 0.0;
    std::optional<double> r; // empty when the radicand is negative
    double mean_obs = 0.0;
    double std_obs = 0.0;
    double mean_pred = 0.0;
    double std_pred = 0.0;

    nlohmann::json to_json() const;
};

MetricsReport evaluate(std::span<const double> obs, std::span<const double> pred);

} // namespace aquastream::metrics
