#include <doctest.h>

#include <qdarwin/classifier.hpp>
#include <qdarwin/evolution.hpp>
#include <qdarwin/experiments.hpp>
#include <qdarwin/presets.hpp>

#include "oracles.hpp"

using namespace qdarwin;

namespace {

HamiltonianModel zz_pair_model() {
    HamiltonianModel m{SubsystemLayout({2, 2})};
    m.add_interaction({ops::pauli_z(), 1, ops::pauli_z(),
                       CoefficientDistribution::constant(1.0),
                       Schedule::always_on()});
    return m;
}

StateVector plus_plus() {
    const SubsystemLayout lay({2, 2});
    Vector v = Vector::Ones(4) / 2.0;
    return StateVector(lay, v);
}

}  // namespace

TEST_CASE("evolve at time zero returns the initial state") {
    auto inst = ModelInstance::draw(preset("A", 3, {}), 4);
    const StateVector psi0 = make_initial_state("qutrit_product",
                                                inst.model.layout());
    const Trajectory traj = evolve(inst, psi0, {0.0});
    REQUIRE(traj.states.size() == 1);
    CHECK(max_abs(Matrix(traj.states[0].amplitudes - psi0.amplitudes)) == 0.0);
}

TEST_CASE("evolve under sigma^z x sigma^z dephasing matches the dense oracle") {
    auto inst = ModelInstance::draw(zz_pair_model(), 0);
    const StateVector psi0 = plus_plus();
    const double t = std::numbers::pi / 4;
    const Trajectory traj = evolve(inst, psi0, {t});

    const Matrix h = assemble(inst, 0.0).to_dense();
    const Vector expect = oracles::dense_expm_apply(h, t, psi0.amplitudes);
    CHECK(Matrix(traj.states[0].amplitudes - expect).norm() < 1e-9);

    // the pair is now maximally entangled: reduced system entropy is 1 bit
    CHECK(entropy(partial_trace(traj.states[0], {0})) == doctest::Approx(1.0));
}

TEST_CASE("evolve hits requested times across schedule phases") {
    auto inst = ModelInstance::draw(preset("I", 4, {}), 11);
    const StateVector psi0 = make_initial_state("y_product", inst.model.layout());
    const std::vector<double> times{0.0, 0.5, 0.95, 1.3, 2.0, 3.7};
    const Trajectory traj = evolve(inst, psi0, times);
    REQUIRE(traj.times == times);
    for (const auto& s : traj.states) {
        CHECK(std::abs(s.amplitudes.norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("norm conservation along a long trajectory") {
    auto inst = ModelInstance::draw(preset("E", 5, {}), 3);
    const StateVector psi0 = make_initial_state("y_product", inst.model.layout());
    std::vector<double> times;
    for (int i = 0; i <= 120; ++i) times.push_back(6.0 * i / 120.0);
    const Trajectory traj = evolve(inst, psi0, times);
    double worst = 0.0;
    for (const auto& s : traj.states) {
        worst = std::max(worst, std::abs(s.amplitudes.norm() - 1.0));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("composition: evolving in two legs equals one leg") {
    auto inst = ModelInstance::draw(preset("A", 4, {}), 8);
    const StateVector psi0 = make_initial_state("qutrit_product",
                                                inst.model.layout());
    const Trajectory one = evolve(inst, psi0, {2.0});
    const Trajectory leg1 = evolve(inst, psi0, {0.8});
    const Trajectory leg2 = evolve(inst, leg1.states[0], {2.0}, 1e-10, 0.8);
    CHECK(Matrix(one.states[0].amplitudes - leg2.states[0].amplitudes).norm() <
          1e-8);
}

TEST_CASE("branch decomposition of explicit states") {
    // product state: one branch of weight 1
    const SubsystemLayout lay({2, 2, 2});
    Vector v = Vector::Zero(8);
    v(0) = 1.0;
    const StateVector basis0(lay, v);
    const auto bd = branch_decompose(basis0, ops::identity(2));
    REQUIRE(bd.weights.size() == 1);
    CHECK(std::abs(bd.weights[0] - cplx(1, 0)) < 1e-12);
    CHECK(bd.pointer_indices[0] == 0);

    // (|0>|00> + |1>|11>)/sqrt2: two equal branches with product conditionals
    Vector g = Vector::Zero(8);
    g(0) = g(7) = 1 / std::sqrt(2.0);
    const StateVector ghz(lay, g);
    const auto bd2 = branch_decompose(ghz, ops::identity(2));
    REQUIRE(bd2.weights.size() == 2);
    CHECK(std::abs(std::abs(bd2.weights[0]) - 1 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(std::abs(bd2.weights[1]) - 1 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(bd2.conditionals[0].amplitudes(0) - cplx(1, 0)) < 1e-12);
    CHECK(std::abs(bd2.conditionals[1].amplitudes(3) - cplx(1, 0)) < 1e-12);

    // weights resolve the branching form: sum |c_n|^2 = 1
    double wsum = 0;
    for (cplx w : bd2.weights) wsum += std::norm(w);
    CHECK(wsum == doctest::Approx(1.0));

    CHECK_THROWS_AS(branch_decompose(ghz, 2.0 * ops::identity(2)),
                    std::invalid_argument);
}

TEST_CASE("pointer weights are conserved under a pointer-compatible Hamiltonian") {
    auto inst = ModelInstance::draw(preset("A", 4, {}), 21);
    const ClassifierVerdict verdict = classify(inst.model);
    REQUIRE(verdict.pointer.has_value());
    const Matrix basis = verdict.pointer->eigenbasis;

    const StateVector psi0 = make_initial_state("qutrit_product",
                                                inst.model.layout());
    std::vector<double> times;
    for (int i = 0; i <= 20; ++i) times.push_back(4.0 * i / 20.0);
    const Trajectory traj = evolve(inst, psi0, times);

    const auto bd0 = branch_decompose(traj.states[0], basis);
    for (const auto& psi : traj.states) {
        const auto bd = branch_decompose(psi, basis);
        REQUIRE(bd.weights.size() == bd0.weights.size());
        for (std::size_t n = 0; n < bd.weights.size(); ++n) {
            CHECK(std::abs(std::abs(bd.weights[n]) - std::abs(bd0.weights[n])) <
                  1e-8);
        }
    }
}

TEST_CASE("branch conditionals stay pure per site on supporting models") {
    auto inst = ModelInstance::draw(preset("C", 4, {}), 33);
    const ClassifierVerdict verdict = classify(inst.model);
    REQUIRE(verdict.pointer.has_value());
    const StateVector psi0 = make_initial_state("qutrit_product",
                                                inst.model.layout());
    const Trajectory traj = evolve(inst, psi0, {0.0, 1.0, 3.0});
    for (const auto& psi : traj.states) {
        const auto bd = branch_decompose(psi, verdict.pointer->eigenbasis);
        for (const auto& cond : bd.conditionals) {
            for (int j = 0; j < bd.env_layout.num_sites(); ++j) {
                const Matrix rho = partial_trace(cond, {j});
                CHECK(std::abs((rho * rho).trace().real() - 1.0) < 1e-8);
            }
        }
    }
}

TEST_CASE("decoherence factor is 1 on a product state") {
    const SubsystemLayout lay({2, 2, 2});
    Vector v = Vector::Zero(8);
    // (|0> + |1>)/sqrt2 (x) |00>
    v(0) = v(4) = 1 / std::sqrt(2.0);
    Trajectory traj;
    traj.times = {0.0};
    traj.states = {StateVector(lay, v)};
    const auto gamma = decoherence_factor(traj, ops::identity(2), {0, 1});
    REQUIRE(gamma.size() == 1);
    CHECK(std::abs(gamma[0] - cplx(1, 0)) < 1e-12);
}

TEST_CASE("decoherence factor matches the per-site cosine product") {
    // H = sigma^z (x) sum_i J_i sigma^z_i from a y-product state:
    // |<phi_0i|phi_1i>| = |cos(2 J_i t)| site by site.
    const int n = 4;
    PresetParams params;
    params.coupling = CoefficientDistribution::rademacher(1.0);
    auto inst = ModelInstance::draw(preset("qubit", n, params), 2);
    const StateVector psi0 = make_initial_state("y_product", inst.model.layout());
    std::vector<double> times{0.0, 0.2, 0.5, 0.7853981633974483, 1.1, 1.5707963267948966};
    const Trajectory traj = evolve(inst, psi0, times);
    const auto gamma = decoherence_factor(traj, ops::identity(2), {0, 1});
    for (std::size_t k = 0; k < times.size(); ++k) {
        double expect = 1.0;
        for (double j : inst.interaction_coeffs) {
            expect *= std::cos(2.0 * j * times[k]);
        }
        CHECK(std::abs(gamma[k]) == doctest::Approx(std::abs(expect)).epsilon(1e-7));
    }
    // rademacher couplings revive at t = pi/2
    CHECK(std::norm(gamma.back()) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("decoherence factor rejects non-branching trajectories") {
    // model D mixes the environment; conditionals on the pointer candidate
    // basis are not site-pure at late times
    auto inst = ModelInstance::draw(preset("D", 3, {}), 5);
    const StateVector psi0 = make_initial_state("qutrit_product",
                                                inst.model.layout());
    const Trajectory traj = evolve(inst, psi0, {3.0});
    CHECK_THROWS_AS(decoherence_factor(traj, ops::identity(3), {0, 1}),
                    std::runtime_error);
}

TEST_CASE("propagator-phase cache reproduces uncached results") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qdarwin_cache_test";
    fs::remove_all(dir);

    auto inst = ModelInstance::draw(preset("E", 3, {}), 6);
    const StateVector psi0 = make_initial_state("y_product", inst.model.layout());
    const std::vector<double> times{0.0, 1.0, 2.0};
    const Trajectory plain = evolve(inst, psi0, times);

    setenv("DARWINISM_CACHE_DIR", dir.c_str(), 1);
    const Trajectory cached_cold = evolve(inst, psi0, times);
    CHECK(fs::exists(dir));
    CHECK(!fs::is_empty(dir));
    const Trajectory cached_warm = evolve(inst, psi0, times);
    unsetenv("DARWINISM_CACHE_DIR");

    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(Matrix(plain.states[i].amplitudes - cached_cold.states[i].amplitudes)
                  .norm() < 1e-9);
        CHECK(Matrix(cached_cold.states[i].amplitudes -
                     cached_warm.states[i].amplitudes)
                  .norm() == 0.0);
    }
    fs::remove_all(dir);
}
