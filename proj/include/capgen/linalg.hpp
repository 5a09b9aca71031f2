#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "capgen/errors.hpp"

namespace capgen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kOrthoTol = 1e-10;
constexpr double kDetTol = 1e-8;
constexpr std::uint64_t kDefaultKronCap = 4096;

// Max absolute deviation of M * M^T from the identity.
inline double gram_deviation(const Matrix& m) {
    Matrix g = m * m.transpose();
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

// Element of SO(dim): rows orthonormal within 1e-10, determinant +1 within 1e-8.
struct RotationMatrix {
    int dim;
    Matrix entries;

    RotationMatrix(int d, Matrix m) : dim(d), entries(std::move(m)) { validate(); }

    void validate() const {
        if (dim < 1 || entries.rows() != dim || entries.cols() != dim)
            throw ValidationError("rotation_matrix: shape mismatch");
        if (gram_deviation(entries) > kOrthoTol)
            throw ValidationError("rotation_matrix: rows not orthonormal within 1e-10");
        if (std::fabs(entries.determinant() - 1.0) > kDetTol)
            throw ValidationError("rotation_matrix: determinant not +1 within 1e-8");
    }
};

// Row-orthonormal out_dim x in_dim matrix (first rows of a rotation).
struct ProjectionMatrix {
    int out_dim;
    int in_dim;
    Matrix entries;

    ProjectionMatrix(int m_tilde, int m, Matrix e)
        : out_dim(m_tilde), in_dim(m), entries(std::move(e)) {
        validate();
    }

    void validate() const {
        if (out_dim < 1 || in_dim < out_dim)
            throw ValidationError("projection_matrix: need 1 <= out_dim <= in_dim");
        if (entries.rows() != out_dim || entries.cols() != in_dim)
            throw ValidationError("projection_matrix: shape mismatch");
        if (gram_deviation(entries) > kOrthoTol)
            throw ValidationError("projection_matrix: rows not orthonormal within 1e-10");
    }
};

// One modified Gram-Schmidt pass over the rows. Used to pull long product
// chains back onto the manifold; the perturbation is on the order of the
// accumulated drift.
inline void reorthonormalize(Matrix& m) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < i; ++j) m.row(i) -= m.row(i).dot(m.row(j)) * m.row(j);
        m.row(i) /= m.row(i).norm();
    }
}

// Haar sample from SO(dim): orthonormalize a Gaussian matrix via Householder
// QR, fix the signs by diag(R), then correct the determinant by negating the
// last column when needed. Testing oracle; `entropy` is any std URBG.
template <class Urbg>
RotationMatrix haar_rotation(int dim, Urbg& entropy) {
    if (dim < 1) throw ValidationError("haar_rotation: dim must be >= 1");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = gauss(entropy);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    if (q.determinant() < 0.0) q.col(dim - 1) = -q.col(dim - 1);
    return RotationMatrix(dim, std::move(q));
}

// First m_tilde rows of a Haar rotation (Haar measure on the Grassmannian).
template <class Urbg>
ProjectionMatrix haar_projection(int m_tilde, int m, Urbg& entropy) {
    if (m_tilde < 1 || m_tilde > m) throw ValidationError("haar_projection: need 1 <= m_tilde <= m");
    RotationMatrix o = haar_rotation(m, entropy);
    return ProjectionMatrix(m_tilde, m, o.entries.topRows(m_tilde));
}

// t-fold Kronecker power. Entry ((i1..it),(j1..jt)) = prod_s M[i_s][j_s];
// t = 0 gives the 1x1 matrix [1]. Errors out once side^t would exceed `cap`.
inline Matrix kron_power(const Matrix& m, int t, std::uint64_t cap = kDefaultKronCap) {
    if (m.rows() != m.cols()) throw ValidationError("kron_power: matrix must be square");
    if (t < 0) throw ValidationError("kron_power: t must be nonnegative");
    const std::uint64_t n = std::uint64_t(m.rows());
    std::uint64_t side = 1;
    for (int s = 0; s < t; ++s) {
        if (n == 0 || side > cap / n)
            throw ResourceError("kron_power: size cap exceeded");
        side *= n;
    }
    Matrix out = Matrix::Ones(1, 1);
    for (int s = 0; s < t; ++s) {
        Matrix next(out.rows() * n, out.cols() * n);
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            for (Eigen::Index j = 0; j < out.cols(); ++j)
                next.block(i * n, j * n, n, n) = out(i, j) * m;
        out = std::move(next);
    }
    return out;
}

// Largest singular value by power iteration on M^T M with a fixed-seed
// randomized start. Converges when the estimate moves by less than
// rel_tol relative per step; throws after max_iter sweeps.
inline double spectral_norm(const Matrix& m, double rel_tol = 1e-12, int max_iter = 20000) {
    if (!m.allFinite()) throw ValidationError("spectral_norm: entries must be finite");
    if (m.size() == 0) return 0.0;
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(m.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    double vn = v.norm();
    if (vn == 0.0) v.setOnes();
    v /= v.norm();

    double sigma = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector mv = m * v;
        double s = mv.norm();
        if (s == 0.0) return 0.0;
        Vector w = m.transpose() * mv;
        double wn = w.norm();
        if (wn == 0.0) return s;
        v = w / wn;
        if (it > 0 && std::fabs(s - sigma) <= rel_tol * std::max(s, 1e-300)) return s;
        sigma = s;
    }
    throw ResourceError("spectral_norm: power iteration did not converge");
}

} // namespace capgen
