#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "capgen/errors.hpp"
#include "capgen/quadrature.hpp"
#include "capgen/special_functions.hpp"

// Moment data for the squared projected length X = ||Qw||^2 (a Beta law),
// and the explicit moment-to-CDF distance bound together with the
// Klebanov-Mkrtchyan comparison.

namespace capgen {

// mu_sq = E[X]; abs_central(i) = E[|X - E[X]|^i] for i = 2..max_order.
struct MomentProfile {
    double mu_sq = 0.0;
    std::vector<double> central;  // central[i] = E|X - mu_sq|^i, entries 0,1 unused

    int max_order() const { return int(central.size()) - 1; }

    double abs_central(int i) const {
        if (i < 2 || i > max_order())
            throw ValidationError("moment_profile: order not populated");
        return central[std::size_t(i)];
    }

    // Cauchy-Schwarz consistency: mu_{2i} >= mu_i^2, and nonnegativity.
    void validate() const {
        if (mu_sq < 0.0) throw ValidationError("moment_profile: negative mean");
        for (int i = 2; i <= max_order(); ++i)
            if (central[std::size_t(i)] < -1e-15)
                throw ValidationError("moment_profile: negative absolute moment");
        for (int i = 2; 2 * i <= max_order(); ++i) {
            double lhs = abs_central(2 * i);
            double rhs = abs_central(i) * abs_central(i);
            if (lhs + 1e-9 * std::max(1.0, rhs) < rhs)
                throw ValidationError("moment_profile: Cauchy-Schwarz violation");
        }
    }

    // Profile of c*X from the profile of X, c > 0.
    MomentProfile scaled(double c) const {
        MomentProfile out;
        out.mu_sq = c * mu_sq;
        out.central = central;
        for (int i = 2; i <= max_order(); ++i)
            out.central[std::size_t(i)] = central[std::size_t(i)] * std::pow(c, double(i));
        return out;
    }
};

struct BetaMoments {
    std::vector<double> raw;  // raw[j] = E[X^j], j = 0..order
    MomentProfile profile;
};

namespace detail {

// E[|X - mu|^p] for X ~ Beta(a, b) by adaptive quadrature in units of the
// standard deviation (the density concentrates when a + b is large).
inline double beta_abs_central_moment(double a, double b, int p, double mu, double sd) {
    double logB = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    auto integrand = [&](double u) {
        double x = mu + sd * u;
        if (x <= 0.0 || x >= 1.0) return 0.0;
        double logpdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - logB;
        return std::pow(std::fabs(u), double(p)) * std::exp(logpdf) * sd;
    };
    double lo = std::max(-mu / sd, -50.0);
    double hi = std::min((1.0 - mu) / sd, 50.0);
    double val = integrate(integrand, lo, hi, 1e-12, 64);
    return std::pow(sd, double(p)) * val;
}

} // namespace detail

// Raw and absolute-central moments of X = ||Qw||^2 for a uniformly random
// projection R^m -> R^{m_tilde}: X ~ Beta(m_tilde/2, (m - m_tilde)/2), so
// E[X^j] = prod_{i<j} (m_tilde/2 + i) / (m/2 + i). Even-order central
// moments come from the binomial expansion; odd orders by quadrature.
// The degenerate m_tilde = m has X == 1 exactly.
inline BetaMoments beta_moments(int m, int m_tilde, int order) {
    if (m_tilde < 1 || m_tilde > m) throw ValidationError("beta_moments: need 1 <= m_tilde <= m");
    if (order < 1) throw ValidationError("beta_moments: order must be positive");

    BetaMoments out;
    out.raw.assign(std::size_t(order) + 1, 1.0);
    out.profile.central.assign(std::size_t(order) + 1, 0.0);

    if (m_tilde == m) {
        out.profile.mu_sq = 1.0;
        return out;
    }

    const double a = 0.5 * m_tilde, b = 0.5 * (m - m_tilde);
    for (int j = 1; j <= order; ++j)
        out.raw[std::size_t(j)] = out.raw[std::size_t(j - 1)] * (a + (j - 1)) / (a + b + (j - 1));
    const double mu = out.raw[1];
    out.profile.mu_sq = mu;

    // binomial coefficients up to `order`
    std::vector<std::vector<double>> choose(std::size_t(order) + 1);
    for (int n = 0; n <= order; ++n) {
        choose[std::size_t(n)].assign(std::size_t(n) + 1, 1.0);
        for (int r = 1; r < n; ++r)
            choose[std::size_t(n)][std::size_t(r)] =
                choose[std::size_t(n - 1)][std::size_t(r - 1)] + choose[std::size_t(n - 1)][std::size_t(r)];
    }

    const double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
    for (int p = 2; p <= order; ++p) {
        if (p % 2 == 0) {
            double c = 0.0, mpow = 1.0;
            for (int j = p; j >= 0; --j) {
                c += choose[std::size_t(p)][std::size_t(j)] * out.raw[std::size_t(j)] * mpow;
                mpow *= -mu;
            }
            out.profile.central[std::size_t(p)] = c;
        } else {
            out.profile.central[std::size_t(p)] = detail::beta_abs_central_moment(a, b, p, mu, sd);
        }
        if (!std::isfinite(out.profile.central[std::size_t(p)]))
            throw ResourceError("beta_moments: overflow at requested order");
    }
    out.profile.validate();
    return out;
}

// CDF of ||Qw||^2 (the Beta oracle), via the regularized incomplete beta.
inline double beta_sq_length_cdf(int m, int m_tilde, double x) {
    if (m_tilde < 1 || m_tilde >= m) throw ValidationError("beta_sq_length_cdf: need 1 <= m_tilde < m");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return reg_beta_i(0.5 * m_tilde, 0.5 * (m - m_tilde), x);
}

// Normalized central moment E[|X-E[X]|^p] / E[X]^p against the shape
// m_tilde^{-4p/5}; the multiplicative p^{O(p)} constant is unspecified, so
// both sides are returned for ratio inspection. m defaults to m_tilde^2.
struct DecayCheck {
    double lhs;
    double rhs_shape;
};

inline DecayCheck central_moment_decay_check(int m_tilde, int p, int m = 0) {
    if (p < 1 || p > m_tilde / 20)
        throw ValidationError("central_moment_decay_check: need 1 <= p <= m_tilde/20");
    if (m == 0) {
        std::uint64_t m64 = std::uint64_t(m_tilde) * std::uint64_t(m_tilde);
        if (m64 > std::uint64_t(1) << 31)
            throw ResourceError("central_moment_decay_check: m_tilde too large");
        m = int(m64);
    }
    double rhs = std::pow(double(m_tilde), -4.0 * double(p) / 5.0);
    if (m_tilde == m) return {0.0, rhs};
    double lhs;
    if (p >= 2) {
        BetaMoments bm = beta_moments(m, m_tilde, p);
        lhs = bm.profile.abs_central(p) / std::pow(bm.profile.mu_sq, double(p));
    } else {
        double a = 0.5 * m_tilde, b = 0.5 * (m - m_tilde);
        double mu = a / (a + b);
        double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
        lhs = detail::beta_abs_central_moment(a, b, 1, mu, sd) / mu;
    }
    return {lhs, rhs};
}

// Inputs to the explicit moment-to-CDF bound. `quantile` is F^{-1}(1-delta)
// for the mixing law Z; `deriv_bound` is max over ell <= k and z in the
// bracket interval [2 sqrt(2/3), 2 sqrt(2)] * quantile of |F^{(ell)}(z)|.
struct CdfBoundInputs {
    int k = 2;                // even moment-matching order
    double delta = 0.5;       // tail mass, <= 1/2
    double eps_mom = 0.0;     // moment-matching error
    MomentProfile profile;    // of X, populated through order 2k
    double quantile = 1.0;    // F^{-1}(1 - delta)
    double deriv_bound = 1.0; // max |F^{(ell)}| over the bracket

    void validate() const {
        if (k < 2 || k % 2 != 0) throw ValidationError("cdf_bound: k must be even and >= 2");
        if (!(delta > 0.0 && delta <= 0.5)) throw ValidationError("cdf_bound: delta in (0, 1/2]");
        if (eps_mom < 0.0) throw ValidationError("cdf_bound: eps_mom must be >= 0");
        if (profile.max_order() < 2 * k)
            throw ValidationError("cdf_bound: profile must be populated through order 2k");
    }
};

struct CdfBoundResult {
    double value;          // min(1, applicable branch)
    bool large_t_branch;
    double zeta;
    double small_t_value;
    double large_t_value;
};

// The explicit bound on dcdf(sqrt(X) Z, sqrt(Y) Z) at threshold t, split by
// branch at t = 2 mu F^{-1}(1-delta):
//   small t: delta + 2k zeta mu_k/mu^{2k}
//                  + (1 + k zeta) 2^{k+1} sqrt(mu_{2k})/mu^{2k}
//                  + eps 2^{3k} zeta,       zeta = (k!)^3 (t/mu)^k deriv_bound
//   large t: delta + 2^{2k+1} sqrt(mu_{2k})/mu^{4k} + 2^{2k+1} eps
// If mu_k/mu^{2k} >= 1 the statement is vacuous and 1 is returned.
inline CdfBoundResult cdf_bound(const CdfBoundInputs& in, double t_over_mu) {
    in.validate();
    const int k = in.k;
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= double(i);

    const double mu2k = std::pow(in.profile.mu_sq, double(k));   // mu^{2k} = (mu^2)^k
    const double mu4k = mu2k * mu2k;
    const double mu_k = in.profile.abs_central(k);
    const double mu_2k = in.profile.abs_central(2 * k);

    const double zeta = kfact * kfact * kfact * std::pow(t_over_mu, double(k)) * in.deriv_bound;
    const double p2k1 = std::ldexp(1.0, k + 1);    // 2^{k+1}
    const double p3k = std::ldexp(1.0, 3 * k);     // 2^{3k}
    const double p2kp1 = std::ldexp(1.0, 2 * k + 1);

    const double small_t = in.delta + 2.0 * k * zeta * (mu_k / mu2k) +
                           (1.0 + k * zeta) * p2k1 * (std::sqrt(mu_2k) / mu2k) +
                           in.eps_mom * p3k * zeta;
    const double large_t = in.delta + p2kp1 * (std::sqrt(mu_2k) / mu4k) + p2kp1 * in.eps_mom;

    CdfBoundResult res;
    res.zeta = zeta;
    res.small_t_value = small_t;
    res.large_t_value = large_t;
    res.large_t_branch = (t_over_mu >= 2.0 * in.quantile);
    double v = res.large_t_branch ? large_t : small_t;
    if (mu_k / mu2k >= 1.0) v = 1.0;  // trivial regime
    res.value = std::min(1.0, v);
    return res;
}

// Klebanov-Mkrtchyan comparison: sup |f| * beta_{k-1}^{-1/4} with
// beta_j = sum_{i=1}^{j} mu_{2i}^{1/(2i)}; the universal constant is set to
// 1, so the output is shape-only. Caller normalizes mu_2 = 1.
inline double km_bound(double sup_pdf, const std::vector<double>& even_raw_moments) {
    if (even_raw_moments.size() < 2)
        throw ValidationError("km_bound: need at least two even moments");
    std::size_t k = even_raw_moments.size();
    double beta = 0.0;
    for (std::size_t i = 1; i <= k - 1; ++i)
        beta += std::pow(even_raw_moments[i - 1], 1.0 / (2.0 * double(i)));
    return sup_pdf * std::pow(beta, -0.25);
}

} // namespace capgen
