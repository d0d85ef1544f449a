// linalg.hpp — Dense complex-matrix primitives: operator zoo, tensor products,
// commutators, Hermitian eigendecomposition.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qdarwin {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// --------------------------- numeric predicates -----------------------------

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Hermiticity claim: max|M - M†| <= tol * max|M| (absolute for the zero matrix).
inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, max_abs(m));
    return max_abs(m - m.adjoint()) <= tol * scale;
}

inline void require_hermitian(const Matrix& m, const std::string& who,
                              double tol = 1e-12) {
    if (!is_hermitian(m, tol)) {
        throw std::invalid_argument(who + ": matrix is not Hermitian");
    }
}

inline bool is_traceless(const Matrix& m, double tol = 1e-12) {
    return std::abs(m.trace()) <= tol * std::max(1.0, max_abs(m));
}

// Hilbert-Schmidt norm and inner product
inline double hs_norm(const Matrix& m) { return m.norm(); }

inline cplx hs_inner(const Matrix& a, const Matrix& b) {
    return (a.adjoint() * b).trace();
}

// --------------------------- operator zoo -----------------------------------

namespace ops {

inline Matrix identity(Eigen::Index d) { return Matrix::Identity(d, d); }

inline Matrix zero(Eigen::Index d) { return Matrix::Zero(d, d); }

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// |i><j| on a d-dimensional space
inline Matrix dyad(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
    if (i < 0 || j < 0 || i >= d || j >= d) {
        throw std::out_of_range("dyad: index out of range");
    }
    Matrix m = Matrix::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

// X_ij = |i><j| + |j><i| on a d-dimensional space
inline Matrix x_coupling(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
    return dyad(d, i, j) + dyad(d, j, i);
}

// Y_ij = -i|i><j| + i|j><i|
inline Matrix y_coupling(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
    return cplx(0, -1) * dyad(d, i, j) + cplx(0, 1) * dyad(d, j, i);
}

// The eight Gell-Mann matrices, k in 1..8.
inline Matrix gellmann(int k) {
    Matrix m = Matrix::Zero(3, 3);
    const double s3 = std::sqrt(3.0);
    switch (k) {
        case 1: return x_coupling(3, 0, 1);
        case 2: return y_coupling(3, 0, 1);
        case 3: m(0, 0) = 1; m(1, 1) = -1; return m;
        case 4: return x_coupling(3, 0, 2);
        case 5: return y_coupling(3, 0, 2);
        case 6: return x_coupling(3, 1, 2);
        case 7: return y_coupling(3, 1, 2);
        case 8: m(0, 0) = 1; m(1, 1) = 1; m(2, 2) = -2; return m / s3;
        default: throw std::out_of_range("gellmann: k must be in 1..8");
    }
}

// Z2 = diag(1,1,-2)/sqrt(3), X01 = |0><1| + |1><0|: the qutrit couplings used
// by the bundled qutrit presets.
inline Matrix qutrit_z2() { return gellmann(8); }
inline Matrix qutrit_x01() { return x_coupling(3, 0, 1); }
inline Matrix qutrit_x02() { return x_coupling(3, 0, 2); }

}  // namespace ops

// --------------------------- core operations --------------------------------

// Tensor (Kronecker) product; index convention (a-major):
//   (a ⊗ b)[(i*rb + k), (j*cb + l)] = a[i,j] * b[k,l]
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
        }
    }
    return out;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument("commutator: dimension mismatch");
    }
    return a * b - b * a;
}

struct Eigensystem {
    Eigen::VectorXd values;  // ascending
    Matrix vectors;          // columns, unitary
};

// Eigendecomposition of a Hermitian matrix. Throws if the Hermiticity claim
// fails at tolerance 1e-12 (relative to max|M|).
inline Eigensystem hermitian_eig(const Matrix& m) {
    require_hermitian(m, "hermitian_eig");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eig: decomposition failed");
    }
    return Eigensystem{solver.eigenvalues(), solver.eigenvectors()};
}

// Eigenvalues only (ascending); cheaper when eigenvectors are not needed.
inline Eigen::VectorXd hermitian_eigvals(const Matrix& m) {
    require_hermitian(m, "hermitian_eigvals");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eigvals: decomposition failed");
    }
    return solver.eigenvalues();
}

// Smallest gap between consecutive (sorted) eigenvalues; 0 for dim < 2.
inline double spectral_gap(const Eigen::VectorXd& evals) {
    double gap = std::numeric_limits<double>::infinity();
    if (evals.size() < 2) return 0.0;
    for (Eigen::Index i = 0; i + 1 < evals.size(); ++i) {
        gap = std::min(gap, evals(i + 1) - evals(i));
    }
    return gap;
}

}  // namespace qdarwin
