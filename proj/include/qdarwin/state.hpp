// state.hpp — StateVector over a SubsystemLayout, and trajectories.

#pragma once

#include <utility>
#include <vector>

#include "qdarwin/layout.hpp"
#include "qdarwin/linalg.hpp"

namespace qdarwin {

struct StateVector {
    SubsystemLayout layout;
    Vector amplitudes;

    StateVector() = default;

    StateVector(SubsystemLayout lay, Vector amps)
        : layout(std::move(lay)), amplitudes(std::move(amps)) {
        if (amplitudes.size() != layout.joint_dim()) {
            throw std::invalid_argument("StateVector: amplitude count mismatch");
        }
        if (std::abs(amplitudes.norm() - 1.0) > 1e-10) {
            throw std::invalid_argument("StateVector: not normalized");
        }
    }

    static StateVector basis_state(const SubsystemLayout& lay, std::int64_t index) {
        Vector v = Vector::Zero(lay.joint_dim());
        v(index) = 1.0;
        return StateVector(lay, std::move(v));
    }

    std::int64_t dim() const { return amplitudes.size(); }
};

struct Trajectory {
    std::vector<double> times;        // ascending, times[0] == 0 when requested
    std::vector<StateVector> states;  // one per time, same layout
};

// Product state from per-site local vectors (normalized site by site).
inline StateVector product_state(const SubsystemLayout& layout,
                                 const std::vector<Vector>& site_states) {
    if (static_cast<int>(site_states.size()) != layout.num_sites()) {
        throw std::invalid_argument("product_state: one local state per site");
    }
    Vector amps = Vector::Ones(1);
    for (int s = 0; s < layout.num_sites(); ++s) {
        const Vector& loc = site_states[static_cast<std::size_t>(s)];
        if (loc.size() != layout.dim(s)) {
            throw std::invalid_argument("product_state: local dimension mismatch");
        }
        Vector next(amps.size() * loc.size());
        const Vector locn = loc / loc.norm();
        for (Eigen::Index i = 0; i < amps.size(); ++i) {
            for (Eigen::Index k = 0; k < locn.size(); ++k) {
                next(i * locn.size() + k) = amps(i) * locn(k);
            }
        }
        amps = std::move(next);
    }
    return StateVector(layout, std::move(amps));
}

}  // namespace qdarwin
