// evolution.hpp — Exact state-vector propagation under piecewise-constant (in
// schedule phase) Hamiltonians, branch decomposition in a pointer basis, and
// branch-overlap decoherence factors.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "qdarwin/expm.hpp"
#include "qdarwin/information.hpp"
#include "qdarwin/model.hpp"
#include "qdarwin/state.hpp"

namespace qdarwin {

namespace detail {

// Optional on-disk cache of dense phase propagators, keyed by the generator's
// sparse content and the step length. Active only when DARWINISM_CACHE_DIR is
// set and the joint dimension is small enough for dense storage.
class PropagatorCache {
public:
    static constexpr std::int64_t kMaxDim = 512;

    PropagatorCache() {
        if (const char* dir = std::getenv("DARWINISM_CACHE_DIR")) dir_ = dir;
    }

    bool enabled(std::int64_t dim) const { return !dir_.empty() && dim <= kMaxDim; }

    std::optional<Matrix> load(std::uint64_t key, std::int64_t dim) const {
        std::ifstream in(path(key), std::ios::binary);
        if (!in) return std::nullopt;
        Matrix u(dim, dim);
        in.read(reinterpret_cast<char*>(u.data()),
                static_cast<std::streamsize>(sizeof(cplx) * dim * dim));
        if (!in) return std::nullopt;
        return u;
    }

    void store(std::uint64_t key, const Matrix& u) const {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        // unique staging name: concurrent workers may store the same key
        const std::string tmp =
            path(key) + "." +
            std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) +
            ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) return;
            out.write(reinterpret_cast<const char*>(u.data()),
                      static_cast<std::streamsize>(sizeof(cplx) * u.size()));
        }
        std::filesystem::rename(tmp, path(key), ec);
    }

    static std::uint64_t key_of(const SparseOperator& h, double dt) {
        std::uint64_t k = 0xcbf29ce484222325ULL;
        auto feed = [&k](const void* p, std::size_t n) {
            const auto* c = static_cast<const unsigned char*>(p);
            for (std::size_t i = 0; i < n; ++i) {
                k ^= c[i];
                k *= 0x100000001b3ULL;
            }
        };
        const auto& m = h.matrix();
        for (int o = 0; o < m.outerSize(); ++o) {
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(m, o); it; ++it) {
                const std::int64_t r = it.row(), c = it.col();
                const cplx v = it.value();
                feed(&r, sizeof r);
                feed(&c, sizeof c);
                feed(&v, sizeof v);
            }
        }
        feed(&dt, sizeof dt);
        return k;
    }

private:
    std::string path(std::uint64_t key) const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(key));
        return dir_ + "/qdarwin_prop_" + buf + ".bin";
    }

    std::string dir_;
};

inline Matrix dense_propagator(const SparseOperator& h, double dt) {
    Eigensystem es = hermitian_eig(h.to_dense());
    Vector phases(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        phases(i) = std::exp(cplx(0, -dt * es.values(i)));
    }
    return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

}  // namespace detail

// States at the requested times, starting from psi0 at t_start. Within each
// schedule phase the Hamiltonian is constant; phase boundaries are never
// stepped across.
inline Trajectory evolve(const ModelInstance& inst, const StateVector& psi0,
                         const std::vector<double>& times, double tol = 1e-10,
                         double t_start = 0.0) {
    if (!std::is_sorted(times.begin(), times.end())) {
        throw std::invalid_argument("evolve: times must be ascending");
    }
    if (!times.empty() && times.front() < t_start) {
        throw std::invalid_argument("evolve: times must start at or after t_start");
    }
    Trajectory traj;
    if (times.empty()) return traj;

    const double horizon = std::max(times.back(), t_start) + 1e-12;
    const std::vector<double> bps = inst.breakpoints(horizon);

    // Merge breakpoints and output times into one grid.
    std::vector<double> grid = times;
    for (double b : bps) {
        if (b > t_start) grid.push_back(b);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
               grid.end());

    detail::PropagatorCache cache;
    StateVector state = psi0;
    double t_cur = t_start;
    std::size_t next_out = 0;

    auto record_if_requested = [&](double t) {
        while (next_out < times.size() &&
               std::abs(times[next_out] - t) <= 1e-12) {
            traj.times.push_back(times[next_out]);
            traj.states.push_back(state);
            ++next_out;
        }
    };
    record_if_requested(t_cur);

    std::optional<SparseOperator> phase_h;
    double phase_lo = 0, phase_hi = -1;

    for (double t_next : grid) {
        if (t_next <= t_cur) continue;
        const double mid = 0.5 * (t_cur + t_next);
        if (!(mid >= phase_lo && mid < phase_hi)) {
            auto it = std::upper_bound(bps.begin(), bps.end(), mid);
            phase_hi = (it == bps.end()) ? horizon : *it;
            phase_lo = (it == bps.begin()) ? 0.0 : *(it - 1);
            phase_h = assemble(inst, 0.5 * (phase_lo + phase_hi));
        }
        const double dt = t_next - t_cur;
        if (phase_h->nnz() == 0) {
            // free phase with no active terms: nothing to do
        } else if (cache.enabled(state.dim()) && !phase_h->is_diagonal()) {
            const std::uint64_t key = detail::PropagatorCache::key_of(*phase_h, dt);
            std::optional<Matrix> u = cache.load(key, state.dim());
            if (!u) {
                u = detail::dense_propagator(*phase_h, dt);
                cache.store(key, *u);
            }
            state.amplitudes = (*u) * state.amplitudes;
        } else {
            state.amplitudes = expm_action(*phase_h, dt, state.amplitudes, tol);
        }
        t_cur = t_next;
        record_if_requested(t_cur);
    }
    return traj;
}

// --------------------------- branch decomposition ----------------------------

// psi = sum_n c_n |p_n> (x) |Phi_n> with |p_n> the columns of pointer_basis.
// Branches with |c_n|^2 < 1e-14 are omitted. Conditional environment vectors
// are phase-normalized (largest-magnitude amplitude real positive) so the
// decomposition is deterministic.
struct BranchDecomposition {
    std::vector<int> pointer_indices;
    std::vector<cplx> weights;               // c_n
    std::vector<StateVector> conditionals;   // environment-only states
    SubsystemLayout env_layout;

    int position_of(int pointer_index) const {
        for (std::size_t i = 0; i < pointer_indices.size(); ++i) {
            if (pointer_indices[i] == pointer_index) return static_cast<int>(i);
        }
        return -1;
    }
};

inline BranchDecomposition branch_decompose(const StateVector& psi,
                                            const Matrix& pointer_basis) {
    const int d_sys = psi.layout.system_dim();
    if (pointer_basis.rows() != d_sys || pointer_basis.cols() != d_sys) {
        throw std::invalid_argument("branch_decompose: basis dimension mismatch");
    }
    if (max_abs(pointer_basis.adjoint() * pointer_basis -
                Matrix::Identity(d_sys, d_sys)) > 1e-8) {
        throw std::invalid_argument("branch_decompose: basis is not unitary");
    }
    std::vector<int> env_dims(psi.layout.dims().begin() + 1, psi.layout.dims().end());
    BranchDecomposition bd;
    bd.env_layout = SubsystemLayout(env_dims, psi.layout.dim_cap());
    const std::int64_t d_env = bd.env_layout.joint_dim();

    for (int n = 0; n < d_sys; ++n) {
        Vector b = Vector::Zero(d_env);
        for (int s = 0; s < d_sys; ++s) {
            const cplx a = std::conj(pointer_basis(s, n));
            if (a == cplx(0, 0)) continue;
            b += a * psi.amplitudes.segment(static_cast<std::int64_t>(s) * d_env, d_env);
        }
        const double w = b.norm();
        if (w * w < 1e-14) continue;
        Vector cond = b / w;
        Eigen::Index kmax = 0;
        cond.cwiseAbs().maxCoeff(&kmax);
        const cplx phase = cond(kmax) / std::abs(cond(kmax));
        cond /= phase;
        bd.pointer_indices.push_back(n);
        bd.weights.push_back(w * phase);
        bd.conditionals.emplace_back(bd.env_layout, std::move(cond));
    }
    return bd;
}

// --------------------------- decoherence factor ------------------------------

// Gamma(t) = prod_j <phi_nj(t)|phi_n'j(t)> from the per-site conditional
// states of two branches. Requires the trajectory states to be singly
// branching: every conditional single-site reduced state pure within tol.
inline std::vector<cplx> decoherence_factor(const Trajectory& traj,
                                            const Matrix& pointer_basis,
                                            std::pair<int, int> branch_pair,
                                            double purity_tol = 1e-8) {
    std::vector<cplx> out;
    out.reserve(traj.states.size());
    for (const StateVector& psi : traj.states) {
        const BranchDecomposition bd = branch_decompose(psi, pointer_basis);
        const int pn = bd.position_of(branch_pair.first);
        const int pm = bd.position_of(branch_pair.second);
        if (pn < 0 || pm < 0) {
            throw std::invalid_argument("decoherence_factor: branch has no weight");
        }
        cplx gamma = 1.0;
        for (int j = 0; j < bd.env_layout.num_sites(); ++j) {
            Vector phi[2];
            for (int which = 0; which < 2; ++which) {
                const StateVector& cond = bd.conditionals[static_cast<std::size_t>(
                    which == 0 ? pn : pm)];
                const Matrix rho = partial_trace(cond, {j});
                Eigensystem es = hermitian_eig(rho);
                double purity = 0.0;
                for (Eigen::Index i = 0; i < es.values.size(); ++i) {
                    purity += es.values(i) * es.values(i);
                }
                if (purity < 1.0 - purity_tol) {
                    throw std::runtime_error(
                        "decoherence_factor: state is not of singly-branching form");
                }
                Vector v = es.vectors.col(es.values.size() - 1);
                Eigen::Index kmax = 0;
                v.cwiseAbs().maxCoeff(&kmax);
                v /= v(kmax) / std::abs(v(kmax));
                phi[which] = std::move(v);
            }
            gamma *= (phi[0].adjoint() * phi[1]).value();
        }
        out.push_back(gamma);
    }
    return out;
}

}  // namespace qdarwin
