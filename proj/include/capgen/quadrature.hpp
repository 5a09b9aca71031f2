#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace capgen {
namespace detail {

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    // accept once below tolerance or once the correction is at the noise
    // floor of the integrand evaluations (log/exp densities carry ~1e-12
    // relative noise); without the floor the halving tolerance can never be
    // met and the recursion degenerates
    double floor_tol = 2e-12 * (std::fabs(left) + std::fabs(right));
    if (depth <= 0 || std::fabs(delta) <= std::max(15.0 * tol, floor_tol) || m == a || m == b)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson over [a, b] to absolute tolerance `tol`, with a forced
// uniform pre-split so narrow spikes inside the interval are not skipped.
template <class F>
double integrate(const F& f, double a, double b, double tol, int presplit) {
    if (b <= a) return 0.0;
    presplit = std::max(presplit, 1);
    double total = 0.0;
    double h = (b - a) / presplit;
    for (int i = 0; i < presplit; ++i) {
        double lo = a + i * h, hi = (i + 1 == presplit) ? b : a + (i + 1) * h;
        double mid = 0.5 * (lo + hi);
        double flo = f(lo), fmid = f(mid), fhi = f(hi);
        double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole, tol / presplit, 20);
    }
    return total;
}

} // namespace detail
} // namespace capgen
