#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "capgen/errors.hpp"
#include "capgen/linalg.hpp"
#include "capgen/seed_stream.hpp"

// Approximate orthogonal t-designs sampled as seed-indexed random walks over
// a fixed inverse-closed rotation set, plus the tensor-power deviation
// estimate of design quality.

namespace capgen {

constexpr double kWalkConstantDefault = 4.0;  // c_q

// Inverse-closed set of rotations driving the design walk.
struct GeneratorSet {
    int dim;
    std::vector<RotationMatrix> generators;

    GeneratorSet(int d, std::vector<RotationMatrix> gens) : dim(d), generators(std::move(gens)) {
        validate();
    }

    int count() const { return int(generators.size()); }

    void validate() const {
        if (dim < 2) throw ValidationError("generator_set: dim must be >= 2");
        const int k = count();
        if (k < 2 || k % 2 != 0)
            throw ValidationError("generator_set: need an even number k >= 2 of generators");
        for (const auto& g : generators) {
            if (g.dim != dim) throw ValidationError("generator_set: dimension mismatch");
            Matrix inv = g.entries.transpose();
            bool found = false;
            for (const auto& h : generators)
                if ((h.entries - inv).cwiseAbs().maxCoeff() <= kOrthoTol) {
                    found = true;
                    break;
                }
            if (!found) throw ValidationError("generator_set: not inverse-closed");
        }
    }
};

namespace detail {

// Sparse action of one standard generator: a rotation by arccos(3/5) in a
// coordinate plane, or a power of the determinant-corrected cyclic shift.
struct SparseGenerator {
    bool is_shift = false;
    int i = 0, j = 0;      // plane axes
    double c = 1.0, s = 0.0;
    int steps = 0;         // shift amount, +-1 or +-2

    template <class Vec>
    void apply(Vec& v, std::int64_t dim, double wrap_sign, bool transpose) const {
        if (!is_shift) {
            double ss = transpose ? -s : s;
            double vi = v[i], vj = v[j];
            v[i] = c * vi - ss * vj;
            v[j] = ss * vi + c * vj;
            return;
        }
        int t = transpose ? -steps : steps;
        static thread_local std::vector<double> scratch;
        scratch.assign(v.begin(), v.end());
        std::int64_t n = dim;
        if (t > 0) {
            for (std::int64_t p = 0; p < n; ++p)
                v[std::size_t(p)] = (p >= t) ? scratch[std::size_t(p - t)]
                                             : wrap_sign * scratch[std::size_t(n - t + p)];
        } else {
            std::int64_t u = -t;
            for (std::int64_t p = 0; p < n; ++p)
                v[std::size_t(p)] = (p + u < n) ? scratch[std::size_t(p + u)]
                                                : wrap_sign * scratch[std::size_t(p + u - n)];
        }
    }
};

} // namespace detail

// The walk's generator family. Either the built-in sparse set (any dim) or a
// dense override loaded from file. The built-in set: rotations by
// arccos(3/5) = atan2(4,3) in the (1,2) plane and in a mid-coordinate plane,
// plus first and second powers of the cyclic coordinate shift (sign-fixed to
// determinant +1), each paired with its inverse; k = 8. dim = 2 keeps the
// plane rotations by +-arccos(3/5) and their squares, k = 4.
class WalkBasis {
public:
    static WalkBasis standard(std::int64_t dim) {
        if (dim < 2) throw ValidationError("walk_basis: dim must be >= 2");
        WalkBasis b;
        b.dim_ = dim;
        b.wrap_sign_ = (dim % 2 == 1) ? 1.0 : -1.0;
        const double c1 = 0.6, s1 = 0.8;        // cos, sin of arccos(3/5)
        const double c2 = -0.28, s2 = 0.96;     // the doubled angle
        if (dim == 2) {
            b.sparse_ = {{false, 0, 1, c1, s1, 0},
                         {false, 0, 1, c1, -s1, 0},
                         {false, 0, 1, c2, s2, 0},
                         {false, 0, 1, c2, -s2, 0}};
        } else {
            int p = int(dim / 2);
            b.sparse_ = {{false, 0, 1, c1, s1, 0},
                         {false, 0, 1, c1, -s1, 0},
                         {false, p, p + 1, c1, s1, 0},
                         {false, p, p + 1, c1, -s1, 0},
                         {true, 0, 0, 0, 0, 1},
                         {true, 0, 0, 0, 0, -1},
                         {true, 0, 0, 0, 0, 2},
                         {true, 0, 0, 0, 0, -2}};
        }
        return b;
    }

    static WalkBasis custom(GeneratorSet set) {
        WalkBasis b;
        b.dim_ = set.dim;
        b.dense_ = std::move(set);
        return b;
    }

    std::int64_t dim() const { return dim_; }
    bool is_standard() const { return !dense_.has_value(); }

    int count() const {
        return dense_ ? dense_->count() : int(sparse_.size());
    }

    // ceil(log2 k): bits consumed per walk step
    int index_bits() const {
        int k = count(), b = 0;
        while ((1 << b) < k) ++b;
        return b;
    }

    bool power_of_two_count() const { return (count() & (count() - 1)) == 0; }

    template <class Vec>
    void apply(int idx, Vec& v, bool transpose) const {
        if (dense_) {
            Vector x = Eigen::Map<const Vector>(v.data(), Eigen::Index(v.size()));
            Vector y = transpose ? Vector(dense_->generators[std::size_t(idx)].entries.transpose() * x)
                                 : Vector(dense_->generators[std::size_t(idx)].entries * x);
            for (Eigen::Index i = 0; i < y.size(); ++i) v[std::size_t(i)] = y(i);
            return;
        }
        sparse_[std::size_t(idx)].apply(v, dim_, wrap_sign_, transpose);
    }

    Matrix dense_generator(int idx) const {
        if (dense_) return dense_->generators[std::size_t(idx)].entries;
        if (dim_ > 4096) throw ResourceError("walk_basis: dense generator too large");
        int n = int(dim_);
        Matrix m = Matrix::Zero(n, n);
        std::vector<double> e(std::size_t(n), 0.0);
        for (int col = 0; col < n; ++col) {
            std::fill(e.begin(), e.end(), 0.0);
            e[std::size_t(col)] = 1.0;
            sparse_[std::size_t(idx)].apply(e, dim_, wrap_sign_, false);
            for (int row = 0; row < n; ++row) m(row, col) = e[std::size_t(row)];
        }
        return m;
    }

private:
    std::int64_t dim_ = 0;
    double wrap_sign_ = 1.0;
    std::vector<detail::SparseGenerator> sparse_;
    std::optional<GeneratorSet> dense_;
};

// The documented default set as a dense, validated GeneratorSet.
inline GeneratorSet default_generator_set(int dim) {
    if (dim < 2) throw ValidationError("default_generator_set: dim must be >= 2");
    WalkBasis basis = WalkBasis::standard(dim);
    std::vector<RotationMatrix> gens;
    gens.reserve(std::size_t(basis.count()));
    for (int i = 0; i < basis.count(); ++i) gens.emplace_back(dim, basis.dense_generator(i));
    return GeneratorSet(dim, std::move(gens));
}

// Walk length q = ceil(c_q (t log2(dim) + log2(1/eps))).
inline int required_walk_length(int t, std::int64_t dim, double eps,
                                double c_q = kWalkConstantDefault) {
    if (t < 1) throw ValidationError("required_walk_length: t must be >= 1");
    if (dim < 2) throw ValidationError("required_walk_length: dim must be >= 2");
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("required_walk_length: eps in (0,1)");
    double v = c_q * (double(t) * std::log2(double(dim)) + std::log2(1.0 / eps));
    return int(std::ceil(v - 1e-9));
}

// Walk length, design degree and target error for one design sampler.
struct DesignConfig {
    WalkBasis basis;
    int walk_length;       // q
    int design_degree;     // t
    double target_error;   // eps
    bool allow_zero_walk = false;  // q = 0 permitted under test flag only

    void validate() const {
        if (walk_length < (allow_zero_walk ? 0 : 1))
            throw ValidationError("design_config: walk_length must be >= 1");
        if (design_degree < 1) throw ValidationError("design_config: design_degree must be >= 1");
        if (!(target_error > 0.0 && target_error < 1.0))
            throw ValidationError("design_config: target_error in (0,1)");
    }
};

inline std::uint64_t walk_bits(const DesignConfig& config) {
    return std::uint64_t(config.walk_length) * std::uint64_t(config.basis.index_bits());
}

// Reads the q step indices of one walk, consuming exactly
// q * ceil(log2 k) bits.
inline std::vector<int> walk_indices(const DesignConfig& config, SeedStream& stream) {
    config.validate();
    const int bps = config.basis.index_bits();
    const int k = config.basis.count();
    std::vector<int> idx(std::size_t(config.walk_length));
    for (int step = 0; step < config.walk_length; ++step)
        idx[std::size_t(step)] = int(stream.read_bits(bps) % std::uint64_t(k));
    return idx;
}

// Applies the word W = g_{idx_q} ... g_{idx_1} (step i multiplies on the
// left), or its transpose, to v in place.
template <class Vec>
void apply_word(const WalkBasis& basis, const std::vector<int>& idx, Vec& v, bool transpose) {
    if (!transpose) {
        for (std::size_t step = 0; step < idx.size(); ++step) basis.apply(idx[step], v, false);
        return;
    }
    for (std::size_t step = idx.size(); step-- > 0;) basis.apply(idx[step], v, true);
}

// One-shot sample-and-apply.
template <class Vec>
void walk_apply(const DesignConfig& config, SeedStream& stream, Vec& v, bool transpose) {
    apply_word(config.basis, walk_indices(config, stream), v, transpose);
}

// Dense walk sample. Product chains longer than 8 factors get one
// re-orthonormalization pass to control drift.
inline RotationMatrix walk_sample(const DesignConfig& config, SeedStream& stream) {
    config.validate();
    if (config.basis.dim() > 4096)
        throw ResourceError("walk_sample: dimension too large for dense sampling");
    const int n = int(config.basis.dim());
    Matrix w = Matrix::Identity(n, n);
    for (int idx : walk_indices(config, stream)) w = config.basis.dense_generator(idx) * w;
    if (config.walk_length > 8) reorthonormalize(w);
    return RotationMatrix(n, std::move(w));
}

struct DesignDeviation {
    double deviation;
    double sigma_est;   // Monte-Carlo noise scale of the walk average; 0 when exact
    double haar_sigma;  // noise scale of the Haar-oracle mean; 0 when exact (d = 1)
    bool exact;         // k^q <= num_samples: averaged over all words exactly
};

// Empirical design quality at degree d:
// || mean over words of W^{(x)d} - E_Haar[g^{(x)d}} ||.
// The Haar expectation is exact (zero) at d = 1 and Monte-Carlo otherwise.
// When every word fits the sample budget (k^q <= num_samples, k a power of
// two) the word average is computed exactly as ((1/k) sum_i g_i^{(x)d})^q,
// which equals the expectation over uniform iid step indices.
inline DesignDeviation design_deviation(const DesignConfig& config, int degree,
                                        std::uint64_t num_samples,
                                        std::uint64_t haar_oracle_samples,
                                        std::uint64_t kron_cap = kDefaultKronCap) {
    config.validate();
    if (degree < 1) throw ValidationError("design_deviation: degree must be >= 1");
    if (num_samples == 0) throw ValidationError("design_deviation: zero samples");
    const std::int64_t dim = config.basis.dim();
    double side_d = std::pow(double(dim), double(degree));
    if (side_d > double(kron_cap)) throw ResourceError("design_deviation: kron cap exceeded");
    const int side = int(side_d + 0.5);

    Matrix haar_mean = Matrix::Zero(side, side);
    double haar_sigma = 0.0;
    if (degree > 1) {
        if (haar_oracle_samples == 0)
            throw ValidationError("design_deviation: zero Haar oracle samples");
        std::mt19937_64 rng(0x9a47c0deULL);
        Matrix haar_sq = Matrix::Zero(side, side);
        for (std::uint64_t s = 0; s < haar_oracle_samples; ++s) {
            RotationMatrix g = haar_rotation(int(dim), rng);
            Matrix t = kron_power(g.entries, degree, kron_cap);
            haar_mean += t;
            haar_sq += t.cwiseProduct(t);
        }
        haar_mean /= double(haar_oracle_samples);
        haar_sq /= double(haar_oracle_samples);
        Matrix var = (haar_sq - haar_mean.cwiseProduct(haar_mean)).cwiseMax(0.0);
        haar_sigma = std::sqrt(var.sum() / double(haar_oracle_samples));
    }

    const int k = config.basis.count();
    bool exhaustible = config.basis.power_of_two_count();
    if (exhaustible) {
        double words = std::pow(double(k), double(config.walk_length));
        exhaustible = words <= double(num_samples);
    }

    if (exhaustible) {
        Matrix a = Matrix::Zero(side, side);
        for (int i = 0; i < k; ++i)
            a += kron_power(config.basis.dense_generator(i), degree, kron_cap);
        a /= double(k);
        Matrix mean = Matrix::Identity(side, side);
        for (int step = 0; step < config.walk_length; ++step) mean = a * mean;
        return {spectral_norm(mean - haar_mean, 1e-10), 0.0, haar_sigma, true};
    }

    Matrix mean = Matrix::Zero(side, side);
    Matrix msq = Matrix::Zero(side, side);
    for (std::uint64_t s = 0; s < num_samples; ++s) {
        SeedStream stream = indexed_stream(s);
        RotationMatrix w = walk_sample(config, stream);
        Matrix t = kron_power(w.entries, degree, kron_cap);
        mean += t;
        msq += t.cwiseProduct(t);
    }
    mean /= double(num_samples);
    msq /= double(num_samples);
    Matrix var = (msq - mean.cwiseProduct(mean)).cwiseMax(0.0);
    double sigma = std::sqrt(var.sum() / double(num_samples));
    return {spectral_norm(mean - haar_mean, 1e-10), sigma, haar_sigma, false};
}

} // namespace capgen
