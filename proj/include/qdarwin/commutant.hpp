// commutant.hpp — Joint commutant of a set of system operators, computed as
// the null space of the stacked linear map X -> i[G, X] over the real vector
// space of Hermitian matrices.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdarwin/linalg.hpp"

namespace qdarwin {

namespace detail {

// Orthonormal real coordinates of a Hermitian d x d matrix under the
// Hilbert-Schmidt inner product: d diagonal entries, then (sqrt2 Re, sqrt2 Im)
// per off-diagonal pair i < j.
inline Eigen::VectorXd hermitian_coords(const Matrix& m) {
    const Eigen::Index d = m.rows();
    Eigen::VectorXd x(d * d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) x(k++) = m(i, i).real();
    const double s2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            x(k++) = s2 * m(i, j).real();
            x(k++) = s2 * m(i, j).imag();
        }
    }
    return x;
}

inline Matrix hermitian_from_coords(const Eigen::VectorXd& x, Eigen::Index d) {
    Matrix m(d, d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) = x(k++);
    const double s2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const double re = x(k++) / s2;
            const double im = x(k++) / s2;
            m(i, j) = cplx(re, im);
            m(j, i) = cplx(re, -im);
        }
    }
    return m;
}

// Split a (possibly non-Hermitian) operator into its Hermitian components;
// [A, G] = 0 for Hermitian A iff A commutes with both.
inline std::vector<Matrix> hermitian_split(const Matrix& g) {
    if (is_hermitian(g, 1e-12)) return {g};
    std::vector<Matrix> out;
    Matrix re = (g + g.adjoint()) / 2.0;
    Matrix im = (g - g.adjoint()) / cplx(0, 2);
    if (max_abs(re) > 1e-14) out.push_back(std::move(re));
    if (max_abs(im) > 1e-14) out.push_back(std::move(im));
    return out;
}

}  // namespace detail

// Generators plus an orthonormal Hermitian basis of their joint commutant.
// The identity direction is always basis[0].
struct CommutantBasis {
    std::vector<Matrix> generators;
    std::vector<Matrix> basis;

    bool has_pointer_observable() const { return basis.size() > 1; }
};

// Compute the joint commutant of `generators` on a d-dimensional system.
// Singular values below rel_tol times the largest are treated as zero.
inline CommutantBasis commutant_basis(const std::vector<Matrix>& generators,
                                      double rel_tol = 1e-10) {
    if (generators.empty()) {
        throw std::invalid_argument("commutant_basis: no generators");
    }
    const Eigen::Index d = generators.front().rows();
    std::vector<Matrix> gens;
    for (const auto& g : generators) {
        if (g.rows() != d || g.cols() != d) {
            throw std::invalid_argument("commutant_basis: dimension mismatch");
        }
        for (auto& h : detail::hermitian_split(g)) gens.push_back(std::move(h));
    }

    const Eigen::Index n = d * d;
    Eigen::MatrixXd stacked(static_cast<Eigen::Index>(gens.size()) * n, n);
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        const Matrix& g = gens[gi];
        const double scale = std::max(1.0, hs_norm(g));
        for (Eigen::Index k = 0; k < n; ++k) {
            const Matrix bk = detail::hermitian_from_coords(
                Eigen::VectorXd::Unit(n, k), d);
            const Matrix img = cplx(0, 1) * commutator(g, bk) / scale;
            stacked.block(static_cast<Eigen::Index>(gi) * n, k, n, 1) =
                detail::hermitian_coords(img);
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * std::max(smax, 1.0)) ++rank;
    }

    CommutantBasis out;
    out.generators = std::move(gens);
    std::vector<Matrix> null_basis;
    for (Eigen::Index k = rank; k < n; ++k) {
        null_basis.push_back(detail::hermitian_from_coords(svd.matrixV().col(k), d));
    }

    // Rotate the basis so the identity direction comes first, then
    // re-orthonormalize the rest against it.
    const Matrix id = Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d));
    out.basis.push_back(id);
    for (auto& b : null_basis) {
        Matrix r = b - hs_inner(id, b) * id;
        for (std::size_t i = 1; i < out.basis.size(); ++i) {
            r -= hs_inner(out.basis[i], r) * out.basis[i];
        }
        const double nrm = hs_norm(r);
        if (nrm > 1e-8) out.basis.push_back(r / nrm);
    }
    return out;
}

// Representative pointer observable: the commutant basis element orthogonal to
// the identity with the largest minimal eigenvalue gap. Empty when the
// commutant holds nothing beyond the identity.
struct PointerObservable {
    Matrix observable;
    Eigen::VectorXd spectrum;  // ascending
    Matrix eigenbasis;         // columns are pointer states
    bool degenerate = false;
};

inline std::optional<PointerObservable> pointer_representative(
    const CommutantBasis& cb, double degeneracy_tol = 1e-8) {
    std::optional<PointerObservable> best;
    double best_gap = -1.0;
    for (std::size_t i = 1; i < cb.basis.size(); ++i) {
        Eigensystem es = hermitian_eig(cb.basis[i]);
        const double gap = spectral_gap(es.values);
        if (gap > best_gap) {
            best_gap = gap;
            best = PointerObservable{cb.basis[i], es.values, es.vectors,
                                     gap <= degeneracy_tol};
        }
    }
    return best;
}

}  // namespace qdarwin
