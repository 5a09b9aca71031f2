#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "capgen/errors.hpp"
#include "capgen/linalg.hpp"
#include "capgen/orth_design.hpp"
#include "capgen/seed_stream.hpp"

// Pseudorandom projections R^m -> R^{m_tilde}, m_tilde = ceil(sqrt(m)):
// truncations of design samples to their first m_tilde rows, plus the truly
// random projection oracle.

namespace capgen {

constexpr double kMomentConstantDefault = 1.0;  // c_k

inline int ceil_sqrt(std::int64_t m) {
    std::int64_t r = std::int64_t(std::sqrt(double(m)));
    while (r * r < m) ++r;
    while (r > 1 && (r - 1) * (r - 1) >= m) --r;
    return int(r);
}

enum class MomentOrderRegime {
    ok,              // k within the analyzed window [2, m_tilde/80]
    below_regime,    // m_tilde < 160: clamped to the minimum even order 2
    outside_regime,  // chosen k exceeds m_tilde/80
    unsatisfiable,   // no even k meets the error target; best effort returned
};

struct MomentOrder {
    int k;
    MomentOrderRegime regime;
};

// Smallest even k with (k / m_tilde)^(c_k k) <= eps. Below m_tilde = 160 the
// result clamps to 2; a k past m_tilde/80 is returned as found but flagged,
// matching the search-first semantics the worked values require.
inline MomentOrder choose_moment_order(int m_tilde, double eps,
                                       double c_k = kMomentConstantDefault) {
    if (m_tilde < 1) throw ValidationError("choose_moment_order: m_tilde must be positive");
    if (!(eps > 0.0)) throw ValidationError("choose_moment_order: eps must be positive");
    if (m_tilde < 160) return {2, MomentOrderRegime::below_regime};

    auto value = [&](int k) {
        return std::pow(double(k) / double(m_tilde), c_k * double(k));
    };
    int best_k = 2;
    double best_v = value(2);
    for (int k = 2; k <= m_tilde; k += 2) {
        double v = value(k);
        if (v <= eps) {
            MomentOrderRegime regime =
                (k <= m_tilde / 80) ? MomentOrderRegime::ok : MomentOrderRegime::outside_regime;
            return {k, regime};
        }
        if (v < best_v) {
            best_v = v;
            best_k = k;
        }
        if (double(k) > double(m_tilde) / 2.0 && v > best_v) break;  // past the minimum
    }
    return {best_k, MomentOrderRegime::unsatisfiable};
}

// Configuration of one pseudorandom projection: the design degree is 4 k_mom
// and the walk length follows required_walk_length at the design dimension m.
struct PrpConfig {
    std::int64_t m;        // input dimension
    int m_tilde;           // output dimension, ceil(sqrt(m)) by default
    int k_mom;             // even moment-matching order
    MomentOrderRegime regime;
    double target_error;
    DesignConfig design;

    void validate() const {
        if (m_tilde < 1 || std::int64_t(m_tilde) > m)
            throw ValidationError("prp_config: need 1 <= m_tilde <= m");
        if (k_mom < 2 || k_mom % 2 != 0)
            throw ValidationError("prp_config: k_mom must be even and >= 2");
        design.validate();
    }
};

inline PrpConfig make_prp_config(std::int64_t m, double eps,
                                 double c_q = kWalkConstantDefault,
                                 double c_k = kMomentConstantDefault,
                                 std::optional<WalkBasis> basis_override = std::nullopt) {
    if (m < 2) throw ValidationError("make_prp_config: m must be >= 2");
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("make_prp_config: eps in (0,1)");
    PrpConfig cfg{m,
                  ceil_sqrt(m),
                  0,
                  MomentOrderRegime::ok,
                  eps,
                  DesignConfig{basis_override ? *basis_override : WalkBasis::standard(m), 0, 0, eps}};
    MomentOrder mo = choose_moment_order(cfg.m_tilde, eps, c_k);
    cfg.k_mom = mo.k;
    cfg.regime = mo.regime;
    cfg.design.design_degree = 4 * mo.k;
    cfg.design.walk_length = required_walk_length(cfg.design.design_degree, m, eps, c_q);
    cfg.validate();
    return cfg;
}

// P w for P the first m_tilde rows of a design walk sample; consumes exactly
// the design walk's bits. Rows of P are orthonormal, so ||Pw|| <= ||w||.
inline std::vector<double> prp_project(const std::vector<double>& w, const PrpConfig& config,
                                       SeedStream& stream) {
    config.validate();
    if (std::int64_t(w.size()) != config.m)
        throw ValidationError("prp_project: vector length mismatch");
    double norm2 = 0.0;
    for (double x : w) norm2 += x * x;
    if (norm2 == 0.0) throw ValidationError("prp_project: zero vector");
    std::vector<double> v = w;
    walk_apply(config.design, stream, v, /*transpose=*/false);
    v.resize(std::size_t(config.m_tilde));
    return v;
}

// Q w for Q a truly random (Haar) projection; the squared relative length
// ||Qw||^2 / ||w||^2 is Beta(m_tilde/2, (m - m_tilde)/2). Testing oracle.
template <class Urbg>
Vector uniform_project(const Vector& w, int m_tilde, Urbg& entropy) {
    if (w.size() == 0 || w.norm() == 0.0) throw ValidationError("uniform_project: zero vector");
    if (m_tilde < 1 || m_tilde > w.size())
        throw ValidationError("uniform_project: need 1 <= m_tilde <= m");
    ProjectionMatrix q = haar_projection(m_tilde, int(w.size()), entropy);
    return q.entries * w;
}

} // namespace capgen
