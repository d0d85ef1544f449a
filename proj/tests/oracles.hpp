// oracles.hpp — Independent reference implementations used by the unit and
// acceptance suites. Everything here is deliberately brute force and kept
// separate from the library code paths it checks.

#pragma once

#include <qdarwin/linalg.hpp>
#include <qdarwin/rng.hpp>
#include <qdarwin/state.hpp>

namespace oracles {

using qdarwin::cplx;
using qdarwin::Matrix;
using qdarwin::Vector;

// exp(-i t H) psi through a dense eigendecomposition.
inline Vector dense_expm_apply(const Matrix& h, double t, const Vector& psi) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    Vector phases(eig.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        phases(i) = std::exp(cplx(0, -t * eig.eigenvalues()(i)));
    }
    return eig.eigenvectors() *
           (phases.asDiagonal() * (eig.eigenvectors().adjoint() * psi));
}

// Dimension of the commutant of a generator set over all complex matrices,
// via the null space of the stacked vectorized maps X -> G X - X G.
inline int brute_commutant_dim(const std::vector<Matrix>& gens) {
    const Eigen::Index d = gens.front().rows();
    const Eigen::Index n = d * d;
    Matrix stacked(static_cast<Eigen::Index>(gens.size()) * n, n);
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        const Matrix& g = gens[gi];
        // vec(GX - XG) = (I (x) G - G^T (x) I) vec(X), column-major vec
        Matrix block = qdarwin::kron(Matrix::Identity(d, d), g) -
                       qdarwin::kron(g.transpose(), Matrix::Identity(d, d));
        stacked.block(static_cast<Eigen::Index>(gi) * n, 0, n, n) =
            block / std::max(1.0, qdarwin::hs_norm(g));
    }
    Eigen::JacobiSVD<Matrix> svd(stacked);
    const auto& sv = svd.singularValues();
    int null_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) <= 1e-10 * std::max(sv(0), 1.0)) ++null_dim;
    }
    null_dim += static_cast<int>(n - sv.size());
    return null_dim;
}

// Reduced density matrix by explicit index summation over the complement.
inline Matrix index_sum_partial_trace(const qdarwin::StateVector& psi,
                                      const std::vector<int>& keep) {
    const auto& lay = psi.layout;
    std::vector<int> rest;
    for (int s = 0; s < lay.num_sites(); ++s) {
        if (std::find(keep.begin(), keep.end(), s) == keep.end()) rest.push_back(s);
    }
    const std::int64_t dk = lay.subset_dim(keep);
    const std::int64_t dr = lay.subset_dim(rest);
    auto joint_index = [&](std::int64_t ik, std::int64_t ir) {
        std::int64_t idx = 0;
        std::int64_t k = ik, r = ir;
        for (auto it = keep.rbegin(); it != keep.rend(); ++it) {
            idx += (k % lay.dim(*it)) * lay.stride(*it);
            k /= lay.dim(*it);
        }
        for (auto it = rest.rbegin(); it != rest.rend(); ++it) {
            idx += (r % lay.dim(*it)) * lay.stride(*it);
            r /= lay.dim(*it);
        }
        return idx;
    };
    Matrix rho = Matrix::Zero(dk, dk);
    for (std::int64_t i = 0; i < dk; ++i) {
        for (std::int64_t j = 0; j < dk; ++j) {
            cplx acc = 0.0;
            for (std::int64_t r = 0; r < dr; ++r) {
                acc += psi.amplitudes(joint_index(i, r)) *
                       std::conj(psi.amplitudes(joint_index(j, r)));
            }
            rho(i, j) = acc;
        }
    }
    return rho;
}

// Random Hermitian matrix with entries of order 1.
inline Matrix random_hermitian(qdarwin::Prng& rng, Eigen::Index d) {
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.complex_normal();
    }
    return (m + Matrix(m.adjoint())) / 2.0;
}

inline Vector random_state(qdarwin::Prng& rng, Eigen::Index d) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.complex_normal();
    return v / v.norm();
}

}  // namespace oracles
