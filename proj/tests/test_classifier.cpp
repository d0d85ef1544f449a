#include <doctest.h>

#include <qdarwin/classifier.hpp>
#include <qdarwin/experiments.hpp>
#include <qdarwin/io.hpp>
#include <qdarwin/presets.hpp>

#include "oracles.hpp"

using namespace qdarwin;

namespace {

// Appendix-style counterexample: a degenerate pointer observable coexists
// with mixing induced through the free Hamiltonian.
HamiltonianModel degenerate_mixing_model() {
    HamiltonianModel m{SubsystemLayout({3, 2, 2})};
    m.set_system_free(ops::qutrit_x02());          // |0><2| + |2><0|
    Matrix s1 = Matrix::Zero(3, 3);
    s1(0, 0) = 1;
    s1(1, 1) = -1;                                 // |0><0| - |1><1|
    Matrix s2 = Matrix::Zero(3, 3);
    s2(0, 0) = 1;
    s2(2, 2) = -1;                                 // |0><0| - |2><2|
    m.add_interaction({s1, 1, ops::pauli_z(), CoefficientDistribution::normal(0, 1),
                       Schedule::always_on()});
    m.add_interaction({s2, 2, ops::pauli_z(), CoefficientDistribution::normal(0, 1),
                       Schedule::always_on()});
    return m;
}

}  // namespace

TEST_CASE("commutant of a single sigma^z") {
    const auto cb = commutant_basis({ops::pauli_z()});
    REQUIRE(cb.basis.size() == 2);
    CHECK(max_abs(cb.basis[0] - ops::identity(2) / std::sqrt(2.0)) < 1e-12);
    // the non-identity direction is sigma^z up to sign
    CHECK(std::abs(std::abs(hs_inner(cb.basis[1], ops::pauli_z() / std::sqrt(2.0))) -
                   1.0) < 1e-10);
    const auto rep = pointer_representative(cb);
    REQUIRE(rep.has_value());
    CHECK_FALSE(rep->degenerate);
}

TEST_CASE("a Pauli pair has trivial commutant") {
    const auto cb = commutant_basis({ops::pauli_z(), ops::pauli_x()});
    CHECK(cb.basis.size() == 1);
    CHECK_FALSE(cb.has_pointer_observable());
    CHECK_FALSE(pointer_representative(cb).has_value());
}

TEST_CASE("model A pointer basis matches the shared-coupling eigenvectors") {
    const auto cb = pointer_observable(preset("A", 6, {}));
    REQUIRE(cb.has_pointer_observable());
    CHECK(cb.basis.size() == 3);  // functions of a non-degenerate operator
    const auto rep = pointer_representative(cb);
    REQUIRE(rep.has_value());
    CHECK_FALSE(rep->degenerate);

    Matrix expected(3, 3);
    const double r = 1 / std::sqrt(2.0);
    expected << r, r, 0, r, -r, 0, 0, 0, 1;
    for (Eigen::Index c = 0; c < 3; ++c) {
        double best = 0;
        for (Eigen::Index k = 0; k < 3; ++k) {
            best = std::max(best,
                            std::abs(rep->eigenbasis.col(c).dot(expected.col(k))));
        }
        CHECK(best == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("model D has no pointer observable") {
    const auto cb = pointer_observable(preset("D", 6, {}));
    CHECK_FALSE(cb.has_pointer_observable());
}

TEST_CASE("commutant soundness: basis elements commute with all generators") {
    Prng rng(19);
    for (int d : {2, 3, 4}) {
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<Matrix> gens;
            const int n_gens = 1 + static_cast<int>(rng.below(3));
            for (int g = 0; g < n_gens; ++g) {
                gens.push_back(oracles::random_hermitian(rng, d));
            }
            const auto cb = commutant_basis(gens);
            for (const Matrix& b : cb.basis) {
                for (const Matrix& g : cb.generators) {
                    CHECK(hs_norm(commutator(b, g)) <= 1e-10 * hs_norm(g));
                }
            }
        }
    }
}

TEST_CASE("commutant completeness against the brute-force null space") {
    Prng rng(29);
    for (int d : {2, 3, 4}) {
        for (int rep = 0; rep < 6; ++rep) {
            std::vector<Matrix> gens;
            // mix structured and random generators to hit degenerate cases
            if (rep % 3 == 0) {
                Matrix diag = Matrix::Zero(d, d);
                for (int i = 0; i < d; ++i) {
                    diag(i, i) = static_cast<double>(rng.below(2));
                }
                gens.push_back(diag);
            }
            gens.push_back(oracles::random_hermitian(rng, d));
            if (rep % 2 == 0) gens.push_back(oracles::random_hermitian(rng, d));
            const auto cb = commutant_basis(gens);
            CHECK(static_cast<int>(cb.basis.size()) ==
                  oracles::brute_commutant_dim(gens));
        }
    }
}

TEST_CASE("mixing closure: shared system operator is mixing free") {
    const auto res = mixing_closure(preset("A", 6, {}));
    CHECK(res.mixing_free());
    CHECK_FALSE(res.witness.has_value());
}

TEST_CASE("mixing closure: non-commuting couplings witness across sites") {
    const auto res = mixing_closure(preset("D", 6, {}));
    CHECK_FALSE(res.mixing_free());
    REQUIRE(res.witness.has_value());
    // the witness is proportional to [X02, X01] (either bracket order)
    const Matrix expect = commutator(ops::qutrit_x02(), ops::qutrit_x01());
    const double scale = res.witness->norm / hs_norm(expect);
    const double mismatch =
        std::min(hs_norm(res.witness->matrix - scale * expect),
                 hs_norm(res.witness->matrix + scale * expect));
    CHECK(mismatch < 1e-9 * scale);
}

TEST_CASE("degenerate pointer with free-Hamiltonian-induced mixing") {
    const HamiltonianModel m = degenerate_mixing_model();

    // the commutant beyond the identity is diag(a, b, a): a degenerate pointer
    const auto cb = pointer_observable(m);
    REQUIRE(cb.has_pointer_observable());
    const auto rep = pointer_representative(cb);
    REQUIRE(rep.has_value());
    CHECK(rep->degenerate);

    // [S1, [H_S, S2]] = -2 H_S does not vanish
    const auto res = mixing_closure(m);
    CHECK_FALSE(res.mixing_free());
    REQUIRE(res.witness.has_value());
    const Matrix hs = ops::qutrit_x02();
    CHECK(hs_norm(res.witness->matrix + 2.0 * hs) <= 1e-10);
    // description names a nested commutator through H_S
    CHECK(res.witness->description.find("H_S") != std::string::npos);

    const auto verdict = classify(m);
    CHECK(verdict.overall == Overall::fails_mixing);
    CHECK(verdict.pointer_degenerate);
}

TEST_CASE("simplified constraints imply mixing freedom") {
    // random models satisfying [H_S, S_jk] = 0 and [S_j'k', S_jk] = 0: build
    // every operator diagonal in one random unitary frame
    Prng rng(37);
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 2 + static_cast<int>(rng.below(3));
        const Matrix u = hermitian_eig(oracles::random_hermitian(rng, d)).vectors;
        auto commuting_op = [&] {
            Vector diag(d);
            for (int i = 0; i < d; ++i) diag(i) = rng.normal();
            Matrix m = u * Matrix(diag.asDiagonal()) * u.adjoint();
            m -= (m.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
            return m;
        };
        std::vector<TaggedGenerator> gens;
        gens.push_back({commuting_op(), -1, "H_S"});
        const int sites = 2 + static_cast<int>(rng.below(3));
        for (int j = 1; j <= sites; ++j) {
            gens.push_back({commuting_op(), j, "S(site=" + std::to_string(j) + ")"});
        }
        const auto res = mixing_closure(gens, 4096);
        CHECK(res.mixing_free());
    }
}

TEST_CASE("mixing verdict is independent of sample-time order") {
    const HamiltonianModel m = preset("F", 3, {});
    const std::vector<double> forward{1.5, 4.5};
    const std::vector<double> backward{4.5, 1.5};
    CHECK(mixing_closure(m, forward).status == mixing_closure(m, backward).status);
    const auto v1 = classify(m, {forward, 0});
    const auto v2 = classify(m, {backward, 0});
    CHECK(v1.overall == v2.overall);
}

TEST_CASE("environment separability of raw terms") {
    for (const std::string& name : preset_names()) {
        CHECK(check_env_separability(preset(name, 3, {})));
    }

    HamiltonianModel bad{SubsystemLayout({2, 2, 2})};
    RawTerm ee;
    ee.factors = {{1, ops::pauli_z()}, {2, ops::pauli_z()}};
    ee.coefficient = CoefficientDistribution::constant(1.0);
    ee.schedule = Schedule::always_on();
    bad.add_raw_term(ee);
    CHECK_FALSE(check_env_separability(bad));
    const auto verdict = classify(bad);
    CHECK(verdict.overall == Overall::fails_mixing);
    CHECK_FALSE(verdict.env_separable);

    HamiltonianModel good{SubsystemLayout({2, 2, 2})};
    RawTerm se;
    se.factors = {{0, ops::pauli_z()}, {1, ops::pauli_z()}};
    se.coefficient = CoefficientDistribution::normal(0, 1);
    se.schedule = Schedule::always_on();
    good.add_raw_term(se);
    CHECK(check_env_separability(good));
    CHECK(classify(good).overall == Overall::supports_qd);

    // a factor that is secretly the identity does not count as support
    HamiltonianModel sneaky{SubsystemLayout({2, 2, 2})};
    RawTerm idf;
    idf.factors = {{1, ops::pauli_z()}, {2, ops::identity(2)}};
    idf.coefficient = CoefficientDistribution::constant(1.0);
    idf.schedule = Schedule::always_on();
    sneaky.add_raw_term(idf);
    CHECK(check_env_separability(sneaky));
}

TEST_CASE("coupling-distribution support check") {
    CHECK(check_support(preset("A", 4, {})));
    CHECK(check_support(preset("I", 4, {})));  // windows are exempt

    PresetParams rad;
    rad.coupling = CoefficientDistribution::rademacher(1.0);
    const HamiltonianModel m = preset("A", 4, rad);
    CHECK_FALSE(check_support(m));
    const auto verdict = classify(m);
    CHECK(verdict.overall == Overall::fails_support);
    CHECK(verdict.pointer.has_value());  // pointer and mixing still fine
    CHECK(verdict.mixing_free);
}

TEST_CASE("classifier table over all presets") {
    auto overall_of = [](const std::string& name) {
        return classify(preset(name, name == "E" || name == "F" || name == "G" ||
                                         name == "H"
                                     ? 5
                                     : 6,
                               {}))
            .overall;
    };
    for (const std::string name : {"A", "B", "C", "E", "H", "I"}) {
        CHECK(overall_of(name) == Overall::supports_qd);
    }
    for (const std::string name : {"D", "F", "G", "L", "demon"}) {
        CHECK(overall_of(name) == Overall::fails_no_pointer);
    }
    CHECK(overall_of("J") == Overall::state_prep_prefix);
    CHECK(overall_of("K") == Overall::state_prep_prefix);
    CHECK(overall_of("qubit") == Overall::supports_qd);
}

TEST_CASE("collision prefix cutoffs follow the window arithmetic") {
    const auto vj = classify(preset("J", 8, {}));
    REQUIRE(vj.prefix_cutoff.has_value());
    CHECK(*vj.prefix_cutoff == doctest::Approx(1.0));  // tau

    const auto vk = classify(preset("K", 8, {}));
    REQUIRE(vk.prefix_cutoff.has_value());
    CHECK(*vk.prefix_cutoff == doctest::Approx(5.0));  // 5 tau

    // the pointer basis of the suffix is the sigma^z eigenbasis
    REQUIRE(vk.pointer.has_value());
    const Matrix p = vk.pointer->observable;
    CHECK(max_abs(commutator(p, ops::pauli_z())) < 1e-10);
}

TEST_CASE("non-commuting interactions confined to one site warn but pass") {
    HamiltonianModel m{SubsystemLayout({3, 2, 2})};
    Matrix s1 = Matrix::Zero(3, 3);
    s1(0, 0) = 1;
    s1(1, 1) = -1;
    m.add_interaction({s1, 1, ops::pauli_z(), CoefficientDistribution::normal(0, 1),
                       Schedule::always_on()});
    m.add_interaction({ops::qutrit_x01(), 1, ops::pauli_x(),
                       CoefficientDistribution::normal(0, 1),
                       Schedule::always_on()});
    const auto verdict = classify(m);
    CHECK(verdict.overall == Overall::supports_qd);
    CHECK(verdict.pointer_degenerate);
    REQUIRE(!verdict.warnings.empty());
    CHECK(verdict.warnings[0].find("site 1") != std::string::npos);

    // a tiny operator budget makes a growing closure inconclusive, never a
    // pass; the generators live in a degenerate block so a pointer survives
    Prng rng(55);
    HamiltonianModel big{SubsystemLayout({4, 2})};
    for (int k = 0; k < 2; ++k) {
        Matrix block = oracles::random_hermitian(rng, 3);
        block -= (block.trace() / 3.0) * Matrix::Identity(3, 3);
        Matrix op = Matrix::Zero(4, 4);
        op.topLeftCorner(3, 3) = block;
        big.add_interaction({op, 1, ops::pauli_z(),
                             CoefficientDistribution::normal(0, 1),
                             Schedule::always_on()});
    }
    ClassifyOptions opt;
    opt.max_ops = 2;
    const auto limited = classify(big, opt);
    CHECK(limited.overall == Overall::inconclusive);
    CHECK(limited.exit_code() == 4);
}

TEST_CASE("verdict invariance under site relabeling and coupling rescaling") {
    auto build = [](const std::vector<int>& site_of_term, double sigma) {
        HamiltonianModel m{SubsystemLayout({3, 2, 2, 2})};
        int k = 0;
        for (int site : site_of_term) {
            const Matrix sys = (k++ % 2 == 0) ? ops::qutrit_z2() : ops::qutrit_x01();
            m.add_interaction({sys, site, ops::pauli_z(),
                               CoefficientDistribution::normal(0, sigma),
                               Schedule::always_on()});
        }
        return m;
    };
    const auto v1 = classify(build({1, 2, 3}, 1.0));
    const auto v2 = classify(build({3, 1, 2}, 1.0));   // relabeled
    const auto v3 = classify(build({1, 2, 3}, 2.5));   // rescaled
    CHECK(v1.overall == v2.overall);
    CHECK(v1.overall == v3.overall);
    CHECK(v1.overall == Overall::supports_qd);
}

TEST_CASE("initial-state admissibility") {
    const SubsystemLayout lay = SubsystemLayout::system_plus_env(3, 6);

    const StateVector prod = make_initial_state("qutrit_product", lay);
    CHECK(check_initial_state(prod, lay));

    const StateVector sbf = make_initial_state("sbf", lay, 3);
    CHECK(check_initial_state(sbf, lay));
    // with the explicit computational pointer basis as well
    CHECK(check_initial_state(sbf, lay, 1e-8, ops::identity(3)));

    const StateVector ent = make_initial_state("ent", lay, 3);
    CHECK_FALSE(check_initial_state(ent, lay));

    const StateVector sep = make_initial_state("sep", lay, 3);
    CHECK_FALSE(check_initial_state(sep, lay));

    const StateVector haar_prod = make_initial_state("prod", lay, 3);
    CHECK(check_initial_state(haar_prod, lay));

    CHECK_THROWS_AS(
        check_initial_state(prod, lay, 1e-8, Matrix(2.0 * ops::identity(3))),
        std::invalid_argument);
}

TEST_CASE("verdict report serialization") {
    const auto verdict = classify(preset("K", 6, {}));
    const json j = verdict_to_json(verdict);
    CHECK(j["overall"] == "state_prep_prefix");
    CHECK(j["exit_code"] == 3);
    CHECK(j["prefix_cutoff"] == doctest::Approx(5.0));
    CHECK(j.contains("pointer_observable"));
    CHECK(j["pointer_observable"].contains("spectrum"));

    const auto bad = classify(preset("D", 4, {}));
    const json jb = verdict_to_json(bad);
    CHECK(jb["overall"] == "fails_no_pointer");
    CHECK(jb["exit_code"] == 2);
    CHECK(jb["pointer_observable"].is_null());
}
