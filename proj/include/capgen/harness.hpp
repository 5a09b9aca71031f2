#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capgen/coordinate_law.hpp"
#include "capgen/errors.hpp"
#include "capgen/moments.hpp"
#include "capgen/pipeline.hpp"
#include "capgen/prp.hpp"
#include "capgen/stats.hpp"

// Verification campaigns: cap-discrepancy estimation, moment audits, bound
// tables, and the hyperplane-rounding max-cut demo.

namespace capgen {

constexpr std::uint64_t kExhaustiveSeedBitCap = 24;

// Halfspace sign(<w, x> - c) restricted to the sphere.
struct CapSpec {
    std::vector<double> w;  // unit direction
    double c;

    void validate() const {
        double n2 = 0.0;
        for (double v : w) n2 += v * v;
        if (std::fabs(std::sqrt(n2) - 1.0) > 1e-12)
            throw ValidationError("cap_spec: direction must be unit norm");
    }
};

enum class SeedMode { exhaustive, sampled };
enum class ReferenceMode { exact_cdf, monte_carlo };

struct CapResult {
    double threshold;
    double p_gen;
    double p_ref;
    double discrepancy;
};

struct DiscrepancyReport {
    std::vector<CapResult> caps;
    double max_discrepancy = 0.0;
    std::uint64_t seeds_used = 0;
    ReferenceMode reference_mode = ReferenceMode::exact_cdf;
    double sigma_est = 0.0;  // DKW-based for sampled seeds; 0 when exhaustive

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["max_discrepancy"] = max_discrepancy;
        j["seeds_used"] = seeds_used;
        j["reference_mode"] = reference_mode == ReferenceMode::exact_cdf ? "exact-cdf" : "monte-carlo";
        j["sigma_est"] = sigma_est;
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : caps)
            arr.push_back({{"c", r.threshold},
                           {"p_gen", r.p_gen},
                           {"p_ref", r.p_ref},
                           {"discrepancy", r.discrepancy}});
        j["caps"] = arr;
        return j;
    }
};

// `count` random caps: uniform directions, thresholds at Z-quantiles of
// probabilities in (0.02, 0.98) so the reference stays away from 0/1.
inline std::vector<CapSpec> random_caps(int n, int count, std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::vector<CapSpec> caps;
    caps.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        CapSpec cap;
        cap.w.resize(std::size_t(n));
        double n2 = 0.0;
        for (auto& v : cap.w) {
            v = gauss(rng);
            n2 += v * v;
        }
        double inv = 1.0 / std::sqrt(n2);
        for (auto& v : cap.w) v *= inv;
        cap.c = z_quantile(n, u(rng));
        caps.push_back(std::move(cap));
    }
    return caps;
}

// Max over caps of |Pr_seed[<w, G(seed)> <= c] - P_ref(c)|. Exact reference:
// rotation invariance makes the cap measure w-independent, P_ref = z_cdf(n, c).
inline DiscrepancyReport cap_discrepancy(std::uint64_t n, double eps, int num_caps,
                                         SeedMode seed_mode, std::uint64_t sampled_count,
                                         ReferenceMode reference, std::uint64_t mc_count,
                                         const PipelineParams& params = {},
                                         std::uint64_t cap_rng_seed = 0xca95eedULL,
                                         const std::vector<CapSpec>* caps_override = nullptr) {
    if (num_caps < 1 && !caps_override)
        throw ValidationError("cap_discrepancy: need at least one cap");
    std::uint64_t bits = seed_length(n, eps, params);
    std::uint64_t total;
    if (seed_mode == SeedMode::exhaustive) {
        if (bits > kExhaustiveSeedBitCap)
            throw ValidationError("cap_discrepancy: exhaustive mode requires seed_length <= 24 bits");
        total = std::uint64_t(1) << bits;
    } else {
        if (sampled_count == 0) throw ValidationError("cap_discrepancy: zero sampled seeds");
        total = sampled_count;
    }

    std::vector<CapSpec> caps =
        caps_override ? *caps_override : random_caps(int(n), num_caps, cap_rng_seed);
    num_caps = int(caps.size());
    for (const auto& cap : caps) cap.validate();
    std::vector<std::uint64_t> hits(std::size_t(num_caps), 0);
    for (std::uint64_t s = 0; s < total; ++s) {
        SeedStream stream = (seed_mode == SeedMode::exhaustive)
                                ? SeedStream::from_counter(s, int(bits))
                                : indexed_stream(s);
        std::vector<double> x = generate(n, eps, stream, params);
        for (int i = 0; i < num_caps; ++i) {
            double dot = 0.0;
            const auto& w = caps[std::size_t(i)].w;
            for (std::size_t jj = 0; jj < w.size(); ++jj) dot += w[jj] * x[jj];
            if (dot <= caps[std::size_t(i)].c) ++hits[std::size_t(i)];
        }
    }

    std::vector<double> refs(static_cast<std::size_t>(num_caps));
    if (reference == ReferenceMode::exact_cdf) {
        for (int i = 0; i < num_caps; ++i) refs[std::size_t(i)] = z_cdf(int(n), caps[std::size_t(i)].c);
    } else {
        if (mc_count == 0) throw ValidationError("cap_discrepancy: zero reference samples");
        std::mt19937_64 rng(cap_rng_seed ^ 0x5a5a5a5aULL);
        std::normal_distribution<double> gauss;
        std::vector<std::uint64_t> ref_hits(std::size_t(num_caps), 0);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (std::uint64_t s = 0; s < mc_count; ++s) {
            double n2 = 0.0;
            for (auto& v : x) {
                v = gauss(rng);
                n2 += v * v;
            }
            double inv = 1.0 / std::sqrt(n2);
            for (int i = 0; i < num_caps; ++i) {
                double dot = 0.0;
                const auto& w = caps[std::size_t(i)].w;
                for (std::size_t jj = 0; jj < w.size(); ++jj) dot += w[jj] * x[jj];
                if (dot * inv <= caps[std::size_t(i)].c) ++ref_hits[std::size_t(i)];
            }
        }
        for (int i = 0; i < num_caps; ++i)
            refs[std::size_t(i)] = double(ref_hits[std::size_t(i)]) / double(mc_count);
    }

    DiscrepancyReport rep;
    rep.seeds_used = total;
    rep.reference_mode = reference;
    rep.sigma_est = (seed_mode == SeedMode::exhaustive) ? 0.0 : dkw_epsilon(0.01, total);
    for (int i = 0; i < num_caps; ++i) {
        CapResult r;
        r.threshold = caps[std::size_t(i)].c;
        r.p_gen = double(hits[std::size_t(i)]) / double(total);
        r.p_ref = refs[std::size_t(i)];
        r.discrepancy = std::fabs(r.p_gen - r.p_ref);
        rep.max_discrepancy = std::max(rep.max_discrepancy, r.discrepancy);
        rep.caps.push_back(r);
    }
    return rep;
}

struct MomentAuditRow {
    int order;
    double oracle;   // E[X^j] from the Beta law
    double design;   // empirical E[Y^j] over enumerated design seeds
    double diff;
};

// Moments of Y = ||Pw||^2 over `design_samples` enumerated seeds against the
// Beta oracle, for j = 1..2 k_mom. The test direction is a fixed seeded
// random unit vector.
inline std::vector<MomentAuditRow> moment_audit(int m, int m_tilde, int k_mom,
                                                std::uint64_t design_samples, double eps = 0.1,
                                                const PipelineParams& params = {},
                                                std::optional<int> walk_override = std::nullopt) {
    if (k_mom < 1) throw ValidationError("moment_audit: k_mom must be positive");
    if (design_samples == 0) throw ValidationError("moment_audit: zero samples");
    PrpConfig cfg = make_prp_config(m, eps, params.c_q, params.c_k,
                                    params.generator_override &&
                                            params.generator_override->dim == m
                                        ? std::optional<WalkBasis>(
                                              WalkBasis::custom(*params.generator_override))
                                        : std::nullopt);
    if (cfg.m_tilde != m_tilde)
        throw ValidationError("moment_audit: m_tilde must equal ceil(sqrt(m))");
    if (k_mom != cfg.k_mom) {
        cfg.k_mom = k_mom;
        cfg.design.design_degree = 4 * k_mom;
        cfg.design.walk_length = required_walk_length(4 * k_mom, m, eps, params.c_q);
    }
    if (walk_override) cfg.design.walk_length = *walk_override;
    cfg.validate();

    std::mt19937_64 rng(0x3a0d17ULL);
    std::normal_distribution<double> gauss;
    std::vector<double> w(static_cast<std::size_t>(m));
    double n2 = 0.0;
    for (auto& v : w) {
        v = gauss(rng);
        n2 += v * v;
    }
    for (auto& v : w) v /= std::sqrt(n2);

    const int orders = 2 * k_mom;
    std::vector<double> acc(std::size_t(orders) + 1, 0.0);
    for (std::uint64_t s = 0; s < design_samples; ++s) {
        SeedStream stream = indexed_stream(s);
        std::vector<double> y = prp_project(w, cfg, stream);
        double yy = 0.0;
        for (double v : y) yy += v * v;
        double p = 1.0;
        for (int j = 1; j <= orders; ++j) {
            p *= yy;
            acc[std::size_t(j)] += p;
        }
    }
    BetaMoments oracle = beta_moments(m, m_tilde, orders);
    std::vector<MomentAuditRow> rows;
    for (int j = 1; j <= orders; ++j) {
        double emp = acc[std::size_t(j)] / double(design_samples);
        rows.push_back({j, oracle.raw[std::size_t(j)], emp,
                        std::fabs(oracle.raw[std::size_t(j)] - emp)});
    }
    return rows;
}

// Weighted graph with per-vertex unit embedding vectors.
struct GwInstance {
    struct Edge {
        int u, v;
        double weight;
    };
    std::vector<Edge> edges;
    std::map<int, std::vector<double>> vectors;
    int dim = 0;

    void validate() const {
        for (const auto& e : edges) {
            if (e.weight < 0.0) throw ValidationError("gw: negative edge weight");
            if (!vectors.count(e.u) || !vectors.count(e.v))
                throw ValidationError("gw: edge endpoint has no embedding vector");
        }
        for (const auto& [v, vec] : vectors) {
            if (int(vec.size()) != dim) throw ValidationError("gw: embedding dimension mismatch");
            double n2 = 0.0;
            for (double x : vec) n2 += x * x;
            if (std::fabs(std::sqrt(n2) - 1.0) > 1e-6)
                throw ValidationError("gw: embedding vectors must be unit norm");
        }
    }
};

// Whitespace format: `u v weight` edge lines and `vec u x1 ... xd` vector
// lines; blank lines and lines starting with '#' are skipped.
inline GwInstance parse_gw_instance(std::istream& in) {
    GwInstance g;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first) || first[0] == '#') continue;
        if (first == "vec") {
            int u;
            if (!(ls >> u)) throw ValidationError("gw: malformed vec line");
            std::vector<double> vec;
            double x;
            while (ls >> x) vec.push_back(x);
            if (vec.empty()) throw ValidationError("gw: empty embedding vector");
            if (g.dim == 0) g.dim = int(vec.size());
            g.vectors[u] = std::move(vec);
        } else {
            int u = 0, v = 0;
            double wgt = 0.0;
            try {
                u = std::stoi(first);
            } catch (...) {
                throw ValidationError("gw: malformed edge line");
            }
            if (!(ls >> v >> wgt)) throw ValidationError("gw: malformed edge line");
            g.edges.push_back({u, v, wgt});
        }
    }
    g.validate();
    return g;
}

struct GwReport {
    std::uint64_t seeds_used = 0;
    double best_cut = 0.0;
    double mean_cut = 0.0;
    double mc_best = 0.0;
    double mc_mean = 0.0;
    double total_weight = 0.0;

    nlohmann::json to_json() const {
        return {{"seeds_used", seeds_used}, {"best_cut", best_cut},     {"mean_cut", mean_cut},
                {"mc_best", mc_best},       {"mc_mean", mc_mean},       {"total_weight", total_weight}};
    }
};

// Hyperplane rounding with generator seeds vs a Monte-Carlo random-hyperplane
// baseline. The embedding vectors come precomputed in the instance.
inline GwReport gw_demo(const GwInstance& g, double eps, std::uint64_t num_seeds,
                        bool exhaustive = false, const PipelineParams& params = {},
                        std::uint64_t mc_hyperplanes = 10000) {
    GwReport rep;
    for (const auto& e : g.edges) rep.total_weight += e.weight;
    if (g.edges.empty()) return rep;

    auto cut_value = [&](const std::vector<double>& r) {
        double cut = 0.0;
        for (const auto& e : g.edges) {
            double du = 0.0, dv = 0.0;
            const auto& vu = g.vectors.at(e.u);
            const auto& vv = g.vectors.at(e.v);
            for (int i = 0; i < g.dim; ++i) {
                du += vu[std::size_t(i)] * r[std::size_t(i)];
                dv += vv[std::size_t(i)] * r[std::size_t(i)];
            }
            if ((du >= 0.0) != (dv >= 0.0)) cut += e.weight;
        }
        return cut;
    };

    std::uint64_t total = num_seeds;
    std::uint64_t bits = seed_length(std::uint64_t(g.dim), eps, params);
    if (exhaustive) {
        if (bits > kExhaustiveSeedBitCap)
            throw ValidationError("gw_demo: exhaustive mode requires seed_length <= 24 bits");
        total = std::uint64_t(1) << bits;
    }
    if (total == 0) throw ValidationError("gw_demo: zero seeds");

    double sum = 0.0;
    for (std::uint64_t s = 0; s < total; ++s) {
        SeedStream stream = exhaustive ? SeedStream::from_counter(s, int(bits)) : indexed_stream(s);
        std::vector<double> r = generate(std::uint64_t(g.dim), eps, stream, params);
        double c = cut_value(r);
        sum += c;
        rep.best_cut = std::max(rep.best_cut, c);
    }
    rep.seeds_used = total;
    rep.mean_cut = sum / double(total);

    std::mt19937_64 rng(0x67377eedULL);
    std::normal_distribution<double> gauss;
    double mc_sum = 0.0;
    std::vector<double> r(static_cast<std::size_t>(g.dim));
    for (std::uint64_t s = 0; s < mc_hyperplanes; ++s) {
        for (auto& v : r) v = gauss(rng);
        double c = cut_value(r);
        mc_sum += c;
        rep.mc_best = std::max(rep.mc_best, c);
    }
    rep.mc_mean = mc_sum / double(mc_hyperplanes);
    return rep;
}

struct BoundTableRow {
    int k;
    double delta;
    double eps_mom;
    double bound;
    bool large_t_branch;
};

// max over ell <= k and z in the bracket [2 sqrt(2/3), 2 sqrt2] * quantile
// of |F^(ell)(z)|, F the CDF of the S^{m-1} coordinate law (exact derivative
// recurrence on a grid; F itself contributes 1).
inline double bracket_derivative_sup(int m, int k, double quantile) {
    double zlo = 2.0 * std::sqrt(2.0 / 3.0) * quantile;
    double zhi = 2.0 * std::sqrt(2.0) * quantile;
    double d = 1.0;
    for (int gi = 0; gi <= 64; ++gi) {
        double z = zlo + (zhi - zlo) * double(gi) / 64.0;
        if (std::fabs(z) >= 1.0) continue;
        std::vector<double> ders = z_pdf_derivatives(m, z, k - 1);
        for (int l = 0; l < k; ++l) d = std::max(d, std::fabs(ders[std::size_t(l)]));
    }
    return d;
}

// Rows of the explicit bound for the scaled Beta(m_tilde/2, (m-m_tilde)/2)
// profile (mean normalized to 1) across the requested k and delta lists.
inline std::vector<BoundTableRow> bound_table(const std::vector<int>& k_list,
                                              const std::vector<double>& delta_list, int m,
                                              int m_tilde,
                                              const std::vector<double>& eps_list = {0.0, 1e-6,
                                                                                     1e-3}) {
    std::vector<BoundTableRow> rows;
    for (int k : k_list) {
        if (k < 2 || k % 2 != 0) throw ValidationError("bound_table: k must be even and >= 2");
        BetaMoments bm = beta_moments(m, m_tilde, 2 * k);
        MomentProfile prof = bm.profile.scaled(double(m) / double(m_tilde));
        for (double delta : delta_list) {
            double quantile = z_quantile(m_tilde, 1.0 - delta);
            double dsup = bracket_derivative_sup(m_tilde, k, quantile);
            for (double eps_mom : eps_list) {
                CdfBoundInputs in{k, delta, eps_mom, prof, quantile, dsup};
                CdfBoundResult res = cdf_bound(in, 2.0 * quantile);
                rows.push_back({k, delta, eps_mom, res.value, res.large_t_branch});
            }
        }
    }
    return rows;
}

inline std::string bound_table_csv(const std::vector<BoundTableRow>& rows) {
    std::ostringstream out;
    out << "k,delta,eps_mom,bound,branch\n";
    for (const auto& r : rows)
        out << r.k << ',' << r.delta << ',' << r.eps_mom << ',' << r.bound << ','
            << (r.large_t_branch ? "large-t" : "small-t") << '\n';
    return out.str();
}

} // namespace capgen
