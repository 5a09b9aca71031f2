#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "capgen/errors.hpp"
#include "capgen/quadrature.hpp"

// The law Z of one coordinate of a uniform point on S^{m-1}: closed-form PDF
// c_m (1-x^2)^{(m-3)/2} with c_m = Gamma(m/2) / (sqrt(pi) Gamma((m-1)/2)),
// its CDF by adaptive quadrature, tail quantiles, and the Cauchy-estimate
// derivative bound c_m 10^q q! / |x|^q.

namespace capgen {

// Normalizing constant c_m, via log-gamma.
inline double z_pdf_constant(int m) {
    if (m < 3) throw ValidationError("z_pdf: m must be >= 3");
    return std::exp(std::lgamma(0.5 * m) - std::lgamma(0.5 * (m - 1))) / std::sqrt(M_PI);
}

inline double z_pdf(int m, double x) {
    if (std::fabs(x) > 1.0) throw ValidationError("z_pdf: x outside [-1,1]");
    double p = 0.5 * (m - 3);
    double base = 1.0 - x * x;
    if (base <= 0.0) return p > 0.0 ? 0.0 : z_pdf_constant(m);
    return z_pdf_constant(m) * std::exp(p * std::log1p(-x * x));
}

// CDF of Z: F(x) = integral of the PDF, absolute error <= 1e-10. Clamps
// outside [-1,1]; F(0) = 1/2 exactly by symmetry.
inline double z_cdf(int m, double x) {
    if (m < 3) throw ValidationError("z_cdf: m must be >= 3");
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (x == 0.0) return 0.5;
    double ax = std::fabs(x);
    auto f = [m](double t) { return z_pdf(m, t); };
    int presplit = int(std::min(256.0, std::max(8.0, 4.0 * ax * std::sqrt(double(m)))));
    double tail = detail::integrate(f, 0.0, ax, 1e-10, presplit);
    return x > 0.0 ? 0.5 + tail : 0.5 - tail;
}

// (delta, F^{-1}(1 - delta)) for delta = 0.995^sqrt(m), quantile solved by
// bisection on z_cdf to 1e-10.
inline std::pair<double, double> z_tail_quantile(int m) {
    if (m < 3) throw ValidationError("z_tail_quantile: m must be >= 3");
    double delta = std::pow(0.995, std::sqrt(double(m)));
    double target = 1.0 - delta;
    double lo = -1.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if (z_cdf(m, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return {delta, 0.5 * (lo + hi)};
}

// General-purpose quantile of Z (bisection, 1e-10 in probability).
inline double z_quantile(int m, double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("z_quantile: p must lie in (0,1)");
    double lo = -1.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if (z_cdf(m, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Cauchy-estimate bound on |f^{(q)}(x)|: c_m 10^q q! / |x|^q, 0 < |x| < 1.
inline double z_derivative_bound(int m, int q, double x) {
    if (q < 0) throw ValidationError("z_derivative_bound: q must be nonnegative");
    if (x == 0.0 || std::fabs(x) >= 1.0)
        throw ValidationError("z_derivative_bound: need 0 < |x| < 1");
    double v = z_pdf_constant(m);
    for (int i = 1; i <= q; ++i) v *= 10.0 * double(i) / std::fabs(x);
    return v;
}

// Exact derivatives f, f', ..., f^{(order)} of the Z density at |x| < 1 from
// the recurrence (1-x^2) f' + (m-3) x f = 0 differentiated repeatedly.
inline std::vector<double> z_pdf_derivatives(int m, double x, int order) {
    if (std::fabs(x) >= 1.0) throw ValidationError("z_pdf_derivatives: need |x| < 1");
    std::vector<double> d(order + 1);
    d[0] = z_pdf(m, x);
    double om = 1.0 - x * x;
    double a = double(m - 3);
    for (int r = 0; r + 1 <= order; ++r) {
        double prev = (r >= 1) ? d[r - 1] : 0.0;
        d[r + 1] = ((2.0 * r - a) * x * d[r] + double(r) * (double(r - 1) - a) * prev) / om;
    }
    return d;
}

} // namespace capgen
