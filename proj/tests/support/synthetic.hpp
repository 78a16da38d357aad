#pragma once

// Synthetic weather/water-temperature data shared by the unit and acceptance
// suites: an air-temperature series with diurnal and seasonal structure plus
// AR(1) noise, sporadic rainfall bursts, and a water temperature defined as
//   wt[i] = 0.8*tm[i] + 0.15*tm[i-17] - 0.3*log(1+rf[i]) + 5 + noise.

#include <cmath>
#include <cstdint>
#include <vector>

#include "aquastream/ann.hpp"
#include "aquastream/rng.hpp"
#include "aquastream/time.hpp"

namespace aquastream::synth {

struct WeatherSeries {
    std::vector<Instant> ts;
    std::vector<double> tm;
    std::vector<double> rf;
};

inline WeatherSeries gen_weather(Instant t0, std::size_t n, Duration step, std::uint64_t seed) {
    WeatherSeries w;
    w.ts.reserve(n);
    w.tm.reserve(n);
    w.rf.reserve(n);
    Rng rng(seed);
    double ar = 0.0;
    double rain_left = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Instant t = t0 + step * static_cast<std::int64_t>(i);
        double hours = static_cast<double>(to_ms(t) - to_ms(t0)) / 3.6e6;
        ar = 0.9 * ar + rng.gaussian(0.0, 1.0);
        double diurnal = 6.0 * std::sin(2.0 * M_PI * (hours - 6.0) / 24.0);
        double seasonal = 4.0 * std::sin(2.0 * M_PI * hours / (24.0 * 120.0));
        double tm = 15.0 + diurnal + seasonal + ar;
        if (rain_left <= 0.0 && rng.next_double() < 0.03) rain_left = 1.0 + rng.next_double() * 5.0;
        double rf = 0.0;
        if (rain_left > 0.0) {
            rf = rng.uniform(0.5, 12.0);
            rain_left -= 1.0;
        }
        w.ts.push_back(t);
        w.tm.push_back(tm);
        w.rf.push_back(rf);
    }
    return w;
}

inline double wt_formula(double tm, double tm_lag, double rf) {
    return 0.8 * tm + 0.15 * tm_lag - 0.3 * std::log1p(rf) + 5.0;
}

// Builds (tm, tm_lag17, rf) -> wt rows; the first `lag` samples are consumed
// by the lag column. noise_sigma = 0 gives the noise-free deterministic set.
inline ann::Dataset make_wt_dataset(const WeatherSeries& w, double noise_sigma, std::uint64_t seed,
                                    std::size_t lag = 17) {
    ann::Dataset d;
    Rng rng(seed);
    for (std::size_t i = lag; i < w.tm.size(); ++i) {
        double wt = wt_formula(w.tm[i], w.tm[i - lag], w.rf[i]);
        if (noise_sigma > 0.0) wt += rng.gaussian(0.0, noise_sigma);
        d.inputs.push_back({w.tm[i], w.tm[i - lag], w.rf[i]});
        d.targets.push_back(wt);
    }
    return d;
}

} // namespace aquastream::synth
