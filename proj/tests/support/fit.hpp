#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

// Decay-rate estimation for design-deviation sequences. Only points that are
// exact (enumerated) or resolvable above the Monte-Carlo noise floor
// (deviation > 3 sigma) enter the log-linear fit; plateau points at the
// noise floor would otherwise measure the floor instead of the decay.
namespace capgen_test {

struct DecayFit {
    double lambda_hat;
    int points_used;
};

inline DecayFit fit_decay_rate(const std::vector<int>& walk_lengths,
                               const std::vector<double>& deviations,
                               const std::vector<double>& sigmas) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < walk_lengths.size(); ++i) {
        bool usable = sigmas[i] == 0.0 || deviations[i] > 3.0 * sigmas[i];
        if (usable && deviations[i] > 0.0) {
            xs.push_back(double(walk_lengths[i]));
            ys.push_back(std::log(deviations[i]));
        }
    }
    if (xs.size() < 2) return {1.0, int(xs.size())};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {std::exp(slope), int(xs.size())};
}

struct LinearFit {
    double intercept;
    double slope;
    double r_squared;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double intercept = (sy - slope * sx) / n;
    double ssr = 0, sst = 0, ym = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (intercept + slope * xs[i]);
        ssr += r * r;
        sst += (ys[i] - ym) * (ys[i] - ym);
    }
    return {intercept, slope, sst > 0 ? 1.0 - ssr / sst : 1.0};
}

} // namespace capgen_test
