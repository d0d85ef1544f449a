// expm.hpp — Action of the propagator exp(-i dt H) on a state vector via
// Lanczos iteration on the sparse generator. Dense exponentials are never
// formed; diagonal generators short-circuit to a phase multiply.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qdarwin/linalg.hpp"
#include "qdarwin/sparse.hpp"

namespace qdarwin {

namespace detail {

// y = exp(-i tau T) e1 for the real symmetric tridiagonal T (alpha, beta).
inline Vector expm_tridiag_e1(const std::vector<double>& alpha,
                              const std::vector<double>& beta, double tau) {
    const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) {
            t(i, i + 1) = beta[static_cast<std::size_t>(i)];
            t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const Eigen::MatrixXd& q = eig.eigenvectors();
    Vector phases(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        phases(i) = std::exp(cplx(0, -tau * lam(i)));
    }
    const Eigen::VectorXd q1 = q.row(0).transpose();
    return q * phases.cwiseProduct(q1.cast<cplx>());
}

}  // namespace detail

// exp(-i dt h) psi with relative accuracy tol. Requires h Hermitian and psi
// normalized; throws on either violation or on non-convergence.
inline Vector expm_action(const SparseOperator& h, double dt, const Vector& psi,
                          double tol = 1e-10) {
    if (h.dim() != psi.size()) {
        throw std::invalid_argument("expm_action: dimension mismatch");
    }
    const double nrm = psi.norm();
    if (std::abs(nrm - 1.0) > 1e-10) {
        throw std::invalid_argument("expm_action: state is not normalized");
    }
    if (dt == 0.0 || h.nnz() == 0) return psi;
    if (!h.is_hermitian(1e-12)) {
        throw std::invalid_argument("expm_action: generator is not Hermitian");
    }

    if (h.is_diagonal()) {
        Vector d = h.diagonal();
        Vector out(psi.size());
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            out(i) = std::exp(cplx(0, -dt * d(i).real())) * psi(i);
        }
        return out;
    }

    const Eigen::Index dim = psi.size();
    const int m_max = static_cast<int>(std::min<Eigen::Index>(dim, 64));
    const long matvec_budget = 200000;
    long matvecs = 0;

    // Substeps sized so a Krylov space of <= m_max converges comfortably.
    int n_sub = std::max(1, static_cast<int>(std::ceil(std::abs(dt) * h.norm_bound() / 20.0)));

    Vector state = psi;
    double remaining = dt;
    while (remaining != 0.0) {
        const double tau = dt / n_sub;
        const double step = (std::abs(tau) < std::abs(remaining)) ? tau : remaining;
        const double tol_local = tol * std::abs(step / dt);

        // Lanczos with full reorthogonalization.
        std::vector<Vector> basis;
        std::vector<double> alpha, beta;
        const double state_norm = state.norm();
        basis.push_back(state / state_norm);

        Vector result;
        bool converged = false;
        for (int j = 0; j < m_max; ++j) {
            Vector w = h.apply(basis.back());
            ++matvecs;
            alpha.push_back((basis.back().adjoint() * w).value().real());
            w -= alpha.back() * basis.back();
            if (j > 0) w -= beta.back() * basis[basis.size() - 2];
            for (const Vector& v : basis) w -= (v.adjoint() * w).value() * v;
            const double b = w.norm();

            const Vector y = detail::expm_tridiag_e1(alpha, beta, step);
            const double err = b * std::abs(y(y.size() - 1));
            const bool happy = b <= 1e-14 * h.norm_bound();
            if (err <= tol_local || happy || j + 1 == static_cast<int>(dim)) {
                result = Vector::Zero(dim);
                for (std::size_t i = 0; i < basis.size(); ++i) {
                    result += y(static_cast<Eigen::Index>(i)) * basis[i];
                }
                result *= state_norm;
                converged = true;
                break;
            }
            beta.push_back(b);
            basis.push_back(w / b);
        }

        if (!converged) {
            n_sub *= 2;  // retry the same interval with smaller steps
            if (matvecs > matvec_budget) {
                throw std::runtime_error("expm_action: no convergence");
            }
            continue;
        }
        state = std::move(result);
        remaining -= step;
        if (std::abs(remaining) < 1e-15 * std::abs(dt)) remaining = 0.0;
        if (matvecs > matvec_budget) {
            throw std::runtime_error("expm_action: no convergence");
        }
    }
    return state;
}

}  // namespace qdarwin
