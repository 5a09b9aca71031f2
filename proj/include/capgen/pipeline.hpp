#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "capgen/base_gen.hpp"
#include "capgen/errors.hpp"
#include "capgen/orth_design.hpp"
#include "capgen/prp.hpp"
#include "capgen/seed_stream.hpp"
#include "capgen/special_functions.hpp"

// The full generator: dimension-ladder schedule n -> ceil(sqrt(n)) -> ...,
// iterated pseudorandom-projection transposes applied to the base-generator
// output, exact seed accounting, and the Gaussian variant.

namespace capgen {

struct PipelineParams {
    double c_q = 4.0;
    double c_k = 1.0;
    // Base-generator budget constant inside the pipeline. Calibrated to 32 so
    // the seed-length curve stays close to a + b log2(n) across ladder-depth
    // transitions; inw_seed_length keeps its own standalone default of 6.
    double c_inw = 32.0;
    int b_slack = 2;
    std::uint64_t floor_min = 64;
    std::optional<std::uint64_t> floor_override;  // test builds force small ladders
    std::shared_ptr<const GeneratorSet> generator_override;  // used at matching dims
};

struct Schedule {
    std::vector<std::uint64_t> levels;  // n_0 > n_1 > ... > n_t
    double eps_prime;                   // per-level error budget

    int t() const { return int(levels.size()) - 1; }
};

inline std::uint64_t ceil_sqrt_u64(std::uint64_t n) {
    std::uint64_t r = std::uint64_t(std::sqrt(double(n)));
    while (r > 1 && (r - 1) * (r - 1) >= n) --r;
    while (r * r < n) ++r;
    return r;
}

// eps' = eps / (2 (t+1)), resolved by fixed-point iteration with the ladder
// stopping rule n_i <= max(64, 4 ceil(log2(1/eps'))^2). If n is already at
// or below the floor, t = 0 and the base generator runs alone.
inline Schedule make_schedule(std::uint64_t n, double eps, const PipelineParams& params = {}) {
    if (n < 4) throw ValidationError("make_schedule: n must be >= 4");
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("make_schedule: eps in (0,1)");

    auto floor_for = [&](double eps_p) -> std::uint64_t {
        if (params.floor_override) return *params.floor_override;
        double lg = std::ceil(std::log2(1.0 / eps_p) - 1e-9);
        return std::max<std::uint64_t>(params.floor_min, std::uint64_t(4.0 * lg * lg));
    };

    int t = 0;
    Schedule sched;
    for (int round = 0; round < 5; ++round) {
        double eps_p = eps / (2.0 * double(t + 1));
        std::uint64_t floor = floor_for(eps_p);
        sched.levels.assign(1, n);
        while (sched.levels.back() > floor)
            sched.levels.push_back(ceil_sqrt_u64(sched.levels.back()));
        sched.eps_prime = eps / (2.0 * double(sched.t() + 1));
        if (sched.t() == t) return sched;
        t = sched.t();
    }
    sched.eps_prime = eps / (2.0 * double(sched.t() + 1));
    return sched;
}

struct PipelinePlan {
    Schedule schedule;
    std::vector<PrpConfig> prp_levels;  // one per projection level
    BaseGenConfig base;
    std::uint64_t total_bits;
};

inline WalkBasis basis_for_dim(std::uint64_t dim, const PipelineParams& params) {
    if (params.generator_override && params.generator_override->dim == std::int64_t(dim))
        return WalkBasis::custom(*params.generator_override);
    return WalkBasis::standard(std::int64_t(dim));
}

inline PipelinePlan make_plan(std::uint64_t n, double eps, const PipelineParams& params = {}) {
    PipelinePlan plan{make_schedule(n, eps, params), {}, BaseGenConfig{}, 0};
    const Schedule& s = plan.schedule;
    const double eps_p = s.eps_prime;
    std::uint64_t bits = 0;
    for (int i = 0; i < s.t(); ++i) {
        PrpConfig cfg = make_prp_config(std::int64_t(s.levels[std::size_t(i)]), eps_p, params.c_q,
                                        params.c_k, basis_for_dim(s.levels[std::size_t(i)], params));
        if (std::uint64_t(cfg.m_tilde) != s.levels[std::size_t(i + 1)])
            throw ValidationError("pipeline: inconsistent ladder");
        bits += walk_bits(cfg.design);
        plan.prp_levels.push_back(std::move(cfg));
    }
    std::uint64_t nt = s.levels.back();
    if (nt > (std::uint64_t(1) << 20))
        throw ResourceError("pipeline: base dimension too large");
    plan.base = make_base_config(int(nt), eps_p, params.c_inw, params.b_slack);
    bits += plan.base.seed_len;
    plan.total_bits = bits;
    return plan;
}

// Exact bit cost of generate(n, eps): per-level design-walk bits plus the
// base-generator seed. The Gaussian variant adds the chi grid bits up front.
inline std::uint64_t seed_length(std::uint64_t n, double eps, const PipelineParams& params = {},
                                 bool gaussian = false) {
    if (gaussian) {
        double delta = 0.5 * eps;
        std::uint64_t chi_bits = std::uint64_t(std::ceil(std::log2(1.0 / delta) - 1e-9));
        return chi_bits + seed_length(n, 0.5 * eps, params, false);
    }
    return make_plan(n, eps, params).total_bits;
}

// Unit vector on S^{n-1}. Bits are consumed in level order (walk indices for
// levels 0..t-1, then the base seed); the projections apply in reverse, so
// X_i = P_i^T X_{i+1} down to X_0.
inline std::vector<double> generate(std::uint64_t n, double eps, SeedStream& stream,
                                    const PipelineParams& params = {}) {
    PipelinePlan plan = make_plan(n, eps, params);
    const int t = plan.schedule.t();
    std::vector<std::vector<int>> words;
    words.reserve(std::size_t(t));
    for (int i = 0; i < t; ++i)
        words.push_back(walk_indices(plan.prp_levels[std::size_t(i)].design, stream));

    std::vector<double> x = inw_generate(plan.base, stream);
    for (int i = t - 1; i >= 0; --i) {
        std::vector<double> v(std::size_t(plan.schedule.levels[std::size_t(i)]), 0.0);
        std::copy(x.begin(), x.end(), v.begin());
        apply_word(plan.prp_levels[std::size_t(i)].design.basis, words[std::size_t(i)], v,
                   /*transpose=*/true);
        x = std::move(v);
    }
    if (t > 0) {
        double norm2 = 0.0;
        for (double v : x) norm2 += v * v;
        double inv = 1.0 / std::sqrt(norm2);
        for (double& v : x) v *= inv;
    }
    return x;
}

struct ChiConfig {
    int n;
    double delta;
    int grid_bits;

    void validate() const {
        if (n < 1) throw ValidationError("chi_config: n must be positive");
        if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("chi_config: delta in (0,1)");
        if (grid_bits < 1 || std::ldexp(1.0, -grid_bits) > delta + 1e-15)
            throw ValidationError("chi_config: need 2^-b <= delta");
    }
};

inline ChiConfig make_chi_config(int n, double delta) {
    ChiConfig cfg{n, delta, int(std::ceil(std::log2(1.0 / delta) - 1e-9))};
    if (cfg.grid_bits < 1) cfg.grid_bits = 1;
    cfg.validate();
    return cfg;
}

namespace detail {

// Atom table of the discretized chi_n law: quantile midpoints
// Q((j + 1/2) / 2^b). Cached per (n, b) for b <= 16.
inline std::shared_ptr<const std::vector<double>> chi_table(int n, int b) {
    static std::map<std::pair<int, int>, std::shared_ptr<const std::vector<double>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, b);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto table = std::make_shared<std::vector<double>>();
    std::size_t count = std::size_t(1) << b;
    table->resize(count);
    for (std::size_t j = 0; j < count; ++j)
        (*table)[j] = chi_quantile(n, (double(j) + 0.5) / double(count));
    cache[key] = table;
    return table;
}

} // namespace detail

// Reads b bits as an index j and returns the chi_n quantile at
// (j + 1/2) / 2^b. The discretized law is within 2^-b of chi_n in CDF
// distance (the exact grid distance is 2^-(b+1)).
inline double chi_discretize(const ChiConfig& config, SeedStream& stream) {
    config.validate();
    std::uint64_t j = stream.read_bits(config.grid_bits);
    if (config.grid_bits <= 16)
        return (*detail::chi_table(config.n, config.grid_bits))[std::size_t(j)];
    return chi_quantile(config.n, (double(j) + 0.5) * std::ldexp(1.0, -config.grid_bits));
}

// chi_{n, eps/2} * generate(n, eps/2), disjoint stream segments, chi first.
inline std::vector<double> gaussian_generate(std::uint64_t n, double eps, SeedStream& stream,
                                             const PipelineParams& params = {}) {
    if (n > std::uint64_t(1) << 30) throw ResourceError("gaussian_generate: n too large");
    ChiConfig chi_cfg = make_chi_config(int(n), 0.5 * eps);
    double scale = chi_discretize(chi_cfg, stream);
    std::vector<double> x = generate(n, 0.5 * eps, stream, params);
    for (double& v : x) v *= scale;
    return x;
}

} // namespace capgen
