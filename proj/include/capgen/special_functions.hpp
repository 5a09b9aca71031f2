#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "capgen/errors.hpp"

// Scalar special functions backing the distribution laws: regularized
// incomplete gamma/beta in the usual series/continued-fraction split,
// standard normal quantile, and chi quantile.

namespace capgen {

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
// Series for x < a + 1, Lentz continued fraction otherwise.
inline double reg_gamma_p(double a, double x) {
    if (a <= 0.0) throw ValidationError("reg_gamma_p: a must be positive");
    if (x < 0.0) throw ValidationError("reg_gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;

    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 10000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16)
                return sum * std::exp(-x + a * std::log(x) - lg);
        }
        throw ResourceError("reg_gamma_p: series did not converge");
    }
    // Q(a, x) by modified Lentz on the standard continued fraction.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10000; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) {
            double q = std::exp(-x + a * std::log(x) - lg) * h;
            return 1.0 - q;
        }
    }
    throw ResourceError("reg_gamma_p: continued fraction did not converge");
}

namespace detail {

inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) return h;
    }
    throw ResourceError("reg_beta_i: continued fraction did not converge");
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double reg_beta_i(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw ValidationError("reg_beta_i: parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Inverse standard normal CDF: Acklam's rational approximation polished with
// one Halley step against erfc, good to close to machine precision on
// (0, 1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile: p must lie in (0,1)");

    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};

    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

// CDF of the chi distribution with n degrees of freedom (the length of an
// n-dimensional standard Gaussian vector).
inline double chi_cdf(int n, double x) {
    if (n < 1) throw ValidationError("chi_cdf: n must be positive");
    if (x <= 0.0) return 0.0;
    return reg_gamma_p(0.5 * n, 0.5 * x * x);
}

// Quantile of chi_n by bisection on chi_cdf, to absolute tolerance 1e-12.
inline double chi_quantile(int n, double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("chi_quantile: p must lie in (0,1)");
    double lo = 0.0;
    double hi = std::sqrt(double(n)) + 10.0;
    while (chi_cdf(n, hi) < p) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        if (chi_cdf(n, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace capgen
