// presets.hpp — The bundled named models.
//
//   A    qutrit, shared system coupling (Z2+X01) to every env qubit via sigma^z
//   B    qutrit, Z2 and X01 coupled through sigma^z with independent strengths
//   C    qutrit, Z2 via sigma^z and X01 via sigma^x
//   D    qutrit, non-commuting system couplings X02 and X01
//   E    qubit, time-independent (sigma^z + sigma^x) coupling
//   F    qubit, alternating sigma^z / sigma^x system couplings (same env op)
//   G    qubit, alternating commuting interaction pairs sigma^z sigma^z / sigma^x sigma^x
//   H    qubit, fixed sigma^z system coupling with alternating env operators
//   I    collision stream, every unit sigma^z x sigma^z
//   J    collision stream, first unit replaced by sigma^x x sigma^z
//   K    collision stream, fifth unit replaced by sigma^x x sigma^z
//   L    collision stream, odd units sigma^z, even units sigma^x
//   demon  three-level demon cycling through a stream of qubit units
//   qubit  dephasing chain sigma^z x sigma^z with a selectable coupling
//          distribution (the decoherence-factor workhorse)

#pragma once

#include <map>
#include <optional>
#include <string>

#include "qdarwin/model.hpp"

namespace qdarwin {

struct PresetParams {
    std::optional<double> sigma_j;   // default 1
    std::optional<double> sigma_k;   // default 1
    std::optional<double> tau;       // default 3 (E-H) or 1 (collisions)
    std::optional<double> delta;     // default 0.95 (collisions)
    std::optional<double> gamma;     // default 4/3 (demon)
    std::optional<double> guard;     // default 0.01 (alternating)
    std::optional<int> replaced_unit;  // default 1 (J) or 5 (K)
    std::optional<CoefficientDistribution> coupling;  // overrides the default
    std::int64_t dim_cap = SubsystemLayout::kDefaultDimCap;
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L",
        "demon", "qubit"};
    return names;
}

inline int preset_default_n_env(const std::string& name) {
    if (name == "A" || name == "B" || name == "C" || name == "D") return 10;
    if (name == "E" || name == "F" || name == "G" || name == "H") return 11;
    if (name == "qubit") return 10;
    return 12;  // I-L, demon
}

inline HamiltonianModel preset(const std::string& name, int n_env,
                               const PresetParams& params = {}) {
    if (n_env < 1) throw std::invalid_argument("preset: n_env must be >= 1");

    const double sigma_j = params.sigma_j.value_or(1.0);
    const double sigma_k = params.sigma_k.value_or(1.0);
    const double guard = params.guard.value_or(0.01);

    auto normal_j = params.coupling.value_or(
        CoefficientDistribution::normal(0.0, sigma_j));
    auto normal_k = params.coupling.value_or(
        CoefficientDistribution::normal(0.0, sigma_k));

    const Matrix sx = ops::pauli_x();
    const Matrix sz = ops::pauli_z();
    const Matrix z2 = ops::qutrit_z2();
    const Matrix x01 = ops::qutrit_x01();
    const Matrix x02 = ops::qutrit_x02();

    auto qutrit_model = [&] {
        return HamiltonianModel(
            SubsystemLayout::system_plus_env(3, n_env, 2, params.dim_cap));
    };
    auto qubit_model = [&] {
        return HamiltonianModel(
            SubsystemLayout::system_plus_env(2, n_env, 2, params.dim_cap));
    };

    if (name == "A") {
        HamiltonianModel m = qutrit_model();
        for (int i = 1; i <= n_env; ++i) {
            m.add_interaction({z2 + x01, i, sz, normal_j, Schedule::always_on()});
        }
        return m;
    }
    if (name == "B" || name == "C" || name == "D") {
        HamiltonianModel m = qutrit_model();
        const Matrix& first = (name == "D") ? x02 : z2;
        const Matrix& second_env = (name == "B") ? sz : sx;
        for (int i = 1; i <= n_env; ++i) {
            m.add_interaction({first, i, sz, normal_j, Schedule::always_on()});
            m.add_interaction({x01, i, second_env, normal_k, Schedule::always_on()});
        }
        return m;
    }

    if (name == "E") {
        HamiltonianModel m = qubit_model();
        for (int i = 1; i <= n_env; ++i) {
            m.add_interaction({sz + sx, i, sz, normal_j, Schedule::always_on()});
        }
        return m;
    }
    if (name == "F" || name == "G" || name == "H") {
        const double tau = params.tau.value_or(3.0);
        const Schedule a = Schedule::alternating(tau, guard, 0);
        const Schedule b = Schedule::alternating(tau, guard, 1);
        HamiltonianModel m = qubit_model();
        const Matrix& sys_b = (name == "H") ? sz : sx;
        const Matrix& env_b = (name == "F") ? sz : sx;
        for (int i = 1; i <= n_env; ++i) {
            m.add_interaction({sz, i, sz, normal_j, a});
            m.add_interaction({sys_b, i, env_b, normal_k, b});
        }
        return m;
    }

    if (name == "I" || name == "J" || name == "K" || name == "L") {
        const double tau = params.tau.value_or(1.0);
        const double delta = params.delta.value_or(0.95);
        if (delta > tau) {
            throw std::invalid_argument("preset: delta must not exceed tau");
        }
        const auto unity = CoefficientDistribution::constant(1.0);
        const int replaced =
            params.replaced_unit.value_or(name == "K" ? 5 : 1);
        HamiltonianModel m = qubit_model();
        for (int n = 1; n <= n_env; ++n) {
            Matrix sys = sz;
            if ((name == "J" || name == "K") && n == replaced) sys = sx;
            if (name == "L" && n % 2 == 0) sys = sx;
            const Schedule w = Schedule::window((n - 1) * tau, (n - 1) * tau + delta);
            m.add_interaction({sys, n, sz, unity, w});
        }
        if (name == "L") {
            m.set_collision_tail({{{sz, sz}}, {{sx, sz}}});
        } else {
            m.set_collision_tail({{{sz, sz}}});
        }
        return m;
    }

    if (name == "demon") {
        const double tau = params.tau.value_or(1.0);
        const double delta = params.delta.value_or(0.95);
        const double gamma = params.gamma.value_or(4.0 / 3.0);
        const auto half_gamma = CoefficientDistribution::constant(gamma / 2.0);
        HamiltonianModel m = qutrit_model();
        // Hopping A <-> B <-> C; the unit exchange |A,1><C,0| + h.c. splits
        // into two Hermitian product terms.
        m.set_system_free(ops::x_coupling(3, 0, 1) + ops::x_coupling(3, 1, 2));
        const Matrix xac = ops::x_coupling(3, 0, 2);
        const Matrix yac = ops::y_coupling(3, 0, 2);
        for (int n = 1; n <= n_env; ++n) {
            const Schedule w = Schedule::window((n - 1) * tau, (n - 1) * tau + delta);
            m.add_interaction({xac, n, ops::pauli_x(), half_gamma, w});
            m.add_interaction({yac, n, ops::pauli_y(), half_gamma, w});
        }
        m.set_collision_tail({{{xac, ops::pauli_x()}, {yac, ops::pauli_y()}}});
        return m;
    }

    if (name == "qubit") {
        HamiltonianModel m = qubit_model();
        for (int i = 1; i <= n_env; ++i) {
            m.add_interaction({sz, i, sz, normal_j, Schedule::always_on()});
        }
        return m;
    }

    throw std::invalid_argument("preset: unknown name '" + name + "'");
}

}  // namespace qdarwin
