#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "capgen/errors.hpp"

// Kolmogorov-distance tooling: two-sample and one-sample empirical
// estimators, asymptotic critical values, and exact CDF distance between
// discrete laws given as weighted atoms.

namespace capgen {

// Two-sample Kolmogorov statistic: max over the merged points of the
// empirical CDF gap. Inputs must be sorted ascending.
inline double ks_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("ks_distance: empty sample");
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = double(a.size()), nb = double(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(double(i) / na - double(j) / nb));
    }
    return d;
}

// One-sample Kolmogorov statistic against an analytic CDF.
template <class Cdf>
double ks_distance_to_cdf(std::vector<double> samples, const Cdf& cdf) {
    if (samples.empty()) throw ValidationError("ks_distance_to_cdf: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, std::fabs(double(i + 1) / n - f));
        d = std::max(d, std::fabs(f - double(i) / n));
    }
    return d;
}

// Asymptotic Kolmogorov critical value c(alpha) = sqrt(-ln(alpha/2)/2).
inline double kolmogorov_c(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("kolmogorov_c: alpha in (0,1)");
    return std::sqrt(-0.5 * std::log(0.5 * alpha));
}

inline double ks_critical_one_sample(double alpha, std::size_t n) {
    return kolmogorov_c(alpha) / std::sqrt(double(n));
}

inline double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m) {
    return kolmogorov_c(alpha) * std::sqrt(double(n + m) / (double(n) * double(m)));
}

// DKW band half-width at confidence 1 - alpha.
inline double dkw_epsilon(double alpha, std::size_t n) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * double(n)));
}

// Finitely supported law as value -> probability, merging equal atoms.
struct DiscreteLaw {
    std::map<double, double> atoms;

    void add(double value, double prob) { atoms[value] += prob; }

    double total_mass() const {
        double s = 0.0;
        for (auto& [v, p] : atoms) s += p;
        return s;
    }

    double cdf(double x) const {
        double s = 0.0;
        for (auto& [v, p] : atoms) {
            if (v > x) break;
            s += p;
        }
        return s;
    }
};

// Law of X * Y for independent discrete X, Y (exact).
inline DiscreteLaw product_law(const DiscreteLaw& x, const DiscreteLaw& y) {
    DiscreteLaw out;
    for (auto& [vx, px] : x.atoms)
        for (auto& [vy, py] : y.atoms) out.add(vx * vy, px * py);
    return out;
}

// Exact Kolmogorov distance between two discrete laws: the CDFs are step
// functions, so the sup is attained at an atom of either law.
inline double dcdf_discrete(const DiscreteLaw& a, const DiscreteLaw& b) {
    if (a.atoms.empty() || b.atoms.empty())
        throw ValidationError("dcdf_discrete: empty law");
    std::vector<double> points;
    points.reserve(a.atoms.size() + b.atoms.size());
    for (auto& [v, p] : a.atoms) points.push_back(v);
    for (auto& [v, p] : b.atoms) points.push_back(v);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    double d = 0.0, fa = 0.0, fb = 0.0;
    auto ia = a.atoms.begin();
    auto ib = b.atoms.begin();
    for (double x : points) {
        while (ia != a.atoms.end() && ia->first <= x) fa += (ia++)->second;
        while (ib != b.atoms.end() && ib->first <= x) fb += (ib++)->second;
        d = std::max(d, std::fabs(fa - fb));
    }
    return d;
}

// CDF of V * Z at t for discrete positive V independent of Z with CDF F:
// G(t) = E_V[F(t / V)].
template <class Cdf>
double product_cdf(const DiscreteLaw& v, const Cdf& z_cdf_fn, double t) {
    double s = 0.0;
    for (auto& [val, p] : v.atoms) {
        if (val <= 0.0) throw ValidationError("product_cdf: V must be positive");
        s += p * z_cdf_fn(t / val);
    }
    return s;
}

} // namespace capgen
