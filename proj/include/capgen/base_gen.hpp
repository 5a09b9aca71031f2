#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "capgen/errors.hpp"
#include "capgen/seed_stream.hpp"
#include "capgen/special_functions.hpp"

// The low-dimensional base generator: points on S^{d-1} from short seeds via
// the INW recursion (recursive seed-halving with hash-based merges), with
// each b-bit leaf mapped through the discretized standard-normal quantile
// table and the vector normalized to unit length.

namespace capgen {

constexpr double kInwConstantDefault = 6.0;  // c_inw

namespace gf2 {

// Carry-less multiply of GF(2) polynomials, degrees <= 62.
inline unsigned __int128 clmul(std::uint64_t a_, std::uint64_t b) {
    unsigned __int128 r = 0, a = a_;
    while (b) {
        if (b & 1) r ^= a;
        a <<= 1;
        b >>= 1;
    }
    return r;
}

inline int degree(unsigned __int128 v) {
    int d = -1;
    while (v) {
        v >>= 1;
        ++d;
    }
    return d;
}

// Reduce v modulo the irreducible f (degree b).
inline std::uint64_t reduce(unsigned __int128 v, std::uint64_t f, int b) {
    unsigned __int128 fi = f;
    for (int d = degree(v); d >= b; d = degree(v)) v ^= fi << (d - b);
    return std::uint64_t(v);
}

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b, std::uint64_t f, int deg) {
    return reduce(clmul(a, b), f, deg);
}

inline std::uint64_t poly_gcd(std::uint64_t a, std::uint64_t b) {
    while (b) {
        int db = degree(b);
        while (degree(a) >= db && a) a ^= b << (degree(a) - db);
        std::swap(a, b);
    }
    return a;
}

// x^(2^e) mod f by repeated squaring.
inline std::uint64_t frobenius_power(int e, std::uint64_t f, int deg) {
    std::uint64_t g = 2;  // the polynomial x
    for (int i = 0; i < e; ++i) g = mul(g, g, f, deg);
    return g;
}

// Smallest-mask irreducible polynomial of degree b over GF(2), found by the
// standard Frobenius/gcd test. Cached per degree.
inline std::uint64_t irreducible(int b) {
    if (b < 1 || b > 62) throw ValidationError("gf2: degree out of range");
    static std::map<int, std::uint64_t> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(b);
    if (it != cache.end()) return it->second;

    std::vector<int> primes;
    int n = b;
    for (int p = 2; p * p <= n; ++p)
        while (n % p == 0) {
            if (primes.empty() || primes.back() != p) primes.push_back(p);
            n /= p;
        }
    if (n > 1) primes.push_back(n);

    for (std::uint64_t low = 1;; low += 2) {
        std::uint64_t f = (std::uint64_t(1) << b) | low;
        if (frobenius_power(b, f, b) != 2) continue;
        bool ok = true;
        for (int p : primes) {
            std::uint64_t g = frobenius_power(b / p, f, b);
            if (poly_gcd(g ^ 2u, f) != 1) {
                ok = false;
                break;
            }
        }
        if (ok) {
            cache[b] = f;
            return f;
        }
    }
}

} // namespace gf2

// Seed budget s = ceil(c_inw * ceil(log2 d) * ceil(log2(1/eps))).
inline std::uint64_t inw_seed_length(std::int64_t d, double eps,
                                     double c_inw = kInwConstantDefault) {
    if (d < 2) throw ValidationError("inw_seed_length: d must be >= 2");
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("inw_seed_length: eps in (0,1)");
    double levels = std::ceil(std::log2(double(d)) - 1e-9);
    double err_bits = std::ceil(std::log2(1.0 / eps) - 1e-9);
    return std::uint64_t(std::ceil(c_inw * levels * err_bits - 1e-9));
}

struct BaseGenConfig {
    int d;                       // output dimension
    double eps;                  // target cap error
    int precision_bits;          // b >= ceil(log2(d/eps))
    std::uint64_t seed_len;      // s, consumed exactly
    int levels;                  // ceil(log2 d)
    std::vector<int> level_bits; // fresh bits per merge level, sums to s - b
};

// Sizing: b = ceil(log2(d/eps)) + b_slack. The remaining s - b bits are
// split as evenly as possible across the ceil(log2 d) merge levels and feed
// the per-level hash parameters (alpha, beta) in GF(2^b); levels with fewer
// than 2b fresh bits get PRF-stretched parameters.
inline BaseGenConfig make_base_config(int d, double eps, double c_inw = kInwConstantDefault,
                                      int b_slack = 2) {
    if (d < 2) throw ValidationError("base_gen: d must be >= 2");
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("base_gen: eps in (0,1)");
    BaseGenConfig cfg;
    cfg.d = d;
    cfg.eps = eps;
    cfg.seed_len = inw_seed_length(d, eps, c_inw);
    cfg.precision_bits = int(std::ceil(std::log2(double(d) / eps) - 1e-9)) + b_slack;
    if (cfg.precision_bits < 2) cfg.precision_bits = 2;
    if (cfg.precision_bits > 40) cfg.precision_bits = 40;
    cfg.levels = int(std::ceil(std::log2(double(d)) - 1e-9));
    if (cfg.seed_len < std::uint64_t(cfg.precision_bits))
        throw ValidationError("base_gen: seed budget below precision bits");
    std::uint64_t extra = cfg.seed_len - std::uint64_t(cfg.precision_bits);
    cfg.level_bits.assign(std::size_t(cfg.levels), 0);
    if (cfg.levels > 0) {
        std::uint64_t base = extra / std::uint64_t(cfg.levels);
        std::uint64_t rem = extra % std::uint64_t(cfg.levels);
        for (int i = 0; i < cfg.levels; ++i)
            cfg.level_bits[std::size_t(i)] = int(base + (std::uint64_t(i) < rem ? 1 : 0));
    }
    return cfg;
}

namespace detail {

// Shared quantile-midpoint tables Phi^{-1}((j + 1/2) / 2^b), cached per b.
inline std::shared_ptr<const std::vector<double>> gaussian_table(int b) {
    static std::map<int, std::shared_ptr<const std::vector<double>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(b);
    if (it != cache.end()) return it->second;
    auto table = std::make_shared<std::vector<double>>();
    std::size_t n = std::size_t(1) << b;
    table->resize(n);
    for (std::size_t j = 0; j < n; ++j)
        (*table)[j] = normal_quantile((double(j) + 0.5) / double(n));
    cache[b] = table;
    return table;
}

inline double gaussian_midpoint(int b, std::uint64_t idx) {
    if (b <= 16) return (*gaussian_table(b))[std::size_t(idx)];
    return normal_quantile((double(idx) + 0.5) * std::ldexp(1.0, -b));
}

// (alpha, beta) in GF(2^b)^2 from `nbits` fresh seed bits. With at least 2b
// bits the leading 2b are used directly and the rest XOR-folded on top;
// shorter budgets are stretched through the fixed ChaCha PRF.
inline std::pair<std::uint64_t, std::uint64_t> merge_params(SeedStream& stream, int nbits, int b,
                                                            int level) {
    std::vector<std::uint8_t> bytes((std::size_t(nbits) + 7) / 8, 0);
    for (int i = 0; i < nbits; ++i) {
        std::uint64_t bit = stream.read_bits(1);
        bytes[std::size_t(i) / 8] |= std::uint8_t(bit << (7 - i % 8));
    }
    std::uint64_t alpha = 0, beta = 0;
    auto take_bit = [&](const std::vector<std::uint8_t>& buf, int pos) -> std::uint64_t {
        return (buf[std::size_t(pos) / 8] >> (7 - pos % 8)) & 1u;
    };
    if (nbits >= 2 * b) {
        std::vector<std::uint8_t> window((std::size_t(2 * b) + 7) / 8, 0);
        for (int i = 0; i < nbits; ++i) {
            int slot = i % (2 * b);
            window[std::size_t(slot) / 8] ^= std::uint8_t(take_bit(bytes, i) << (7 - slot % 8));
        }
        for (int i = 0; i < b; ++i) alpha = (alpha << 1) | take_bit(window, i);
        for (int i = 0; i < b; ++i) beta = (beta << 1) | take_bit(window, b + i);
    } else {
        std::array<std::uint8_t, 32> key{};
        key[0] = 'i'; key[1] = 'n'; key[2] = 'w'; key[3] = std::uint8_t(level);
        for (std::size_t i = 0; i < bytes.size(); ++i) key[4 + i % 28] ^= bytes[i];
        std::array<std::uint8_t, 12> nonce{};
        nonce[0] = std::uint8_t(nbits);
        nonce[1] = std::uint8_t(b);
        auto block = chacha20_block(key, 0, nonce);
        int pos = 0;
        auto block_bit = [&](int p) -> std::uint64_t { return (block[std::size_t(p) / 8] >> (7 - p % 8)) & 1u; };
        for (int i = 0; i < b; ++i, ++pos) alpha = (alpha << 1) | block_bit(pos);
        for (int i = 0; i < b; ++i, ++pos) beta = (beta << 1) | block_bit(pos);
    }
    if (alpha == 0) alpha = 1;  // keep the map bijective
    return {alpha, beta};
}

} // namespace detail

namespace detail {

struct InwTree {
    int b;
    std::uint64_t poly;
    std::uint64_t root;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> params;
};

// Reads the whole tree state, consuming exactly config.seed_len bits: the
// b-bit root block first, then each merge level's fresh bits.
inline InwTree read_inw_tree(const BaseGenConfig& config, SeedStream& stream) {
    InwTree tree;
    tree.b = config.precision_bits;
    tree.poly = gf2::irreducible(tree.b);
    tree.root = stream.read_bits(tree.b);
    tree.params.reserve(std::size_t(config.levels));
    for (int l = 0; l < config.levels; ++l)
        tree.params.push_back(merge_params(stream, config.level_bits[std::size_t(l)], tree.b, l));
    return tree;
}

// Leaf j applies h_l(x) = alpha_l * x + beta_l (in GF(2^b)) at every level l
// whose bit is set in j; the leaf value indexes the Gaussian midpoints.
inline std::vector<double> inw_leaves(const BaseGenConfig& config, const InwTree& tree,
                                      std::uint64_t root) {
    std::vector<double> out(static_cast<std::size_t>(config.d));
    for (int j = 0; j < config.d; ++j) {
        std::uint64_t x = root;
        for (int l = config.levels - 1; l >= 0; --l)
            if ((std::uint64_t(j) >> l) & 1u)
                x = gf2::mul(tree.params[std::size_t(l)].first, x, tree.poly, tree.b) ^
                    tree.params[std::size_t(l)].second;
        out[std::size_t(j)] = gaussian_midpoint(tree.b, x);
    }
    return out;
}

} // namespace detail

// The d discretized-Gaussian coordinates before normalization.
inline std::vector<double> inw_generate_raw(const BaseGenConfig& config, SeedStream& stream) {
    detail::InwTree tree = detail::read_inw_tree(config, stream);
    return detail::inw_leaves(config, tree, tree.root);
}

// Unit vector on S^{d-1}. A zero vector regenerates with a domain-separation
// value folded into the root block, at most 3 retries; the quantile-midpoint
// rule never emits an exact zero coordinate, so the retry is a contract
// safeguard rather than a reachable path.
inline std::vector<double> inw_generate(const BaseGenConfig& config, SeedStream& stream) {
    detail::InwTree tree = detail::read_inw_tree(config, stream);
    for (int retry = 0;; ++retry) {
        std::vector<double> out = detail::inw_leaves(config, tree, tree.root ^ std::uint64_t(retry));
        double norm2 = 0.0;
        for (double v : out) norm2 += v * v;
        if (norm2 > 0.0) {
            double inv = 1.0 / std::sqrt(norm2);
            for (double& v : out) v *= inv;
            return out;
        }
        if (retry >= 3) throw ResourceError("inw_generate: degenerate zero vector");
    }
}

} // namespace capgen
