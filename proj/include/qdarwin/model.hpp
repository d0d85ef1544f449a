// model.hpp — Declarative system-environment Hamiltonians: layouts, free and
// interaction terms, time-dependence schedules, coefficient distributions, and
// seeded instances with drawn couplings.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdarwin/layout.hpp"
#include "qdarwin/linalg.hpp"
#include "qdarwin/rng.hpp"
#include "qdarwin/sparse.hpp"

namespace qdarwin {

// --------------------------- schedules --------------------------------------

// Binary on/off activity of a Hamiltonian term.
//   always_on           — value 1 everywhere
//   alternating         — active on even (phase a) or odd (phase b) periods of
//                         length tau, switched off during the trailing guard
//                         interval of each period so the paired group never
//                         overlaps the other
//   window              — value 1 on [start, stop)
struct Schedule {
    enum class Kind { always_on, alternating, window };

    Kind kind = Kind::always_on;
    double tau = 0.0;
    double guard = 0.0;
    int phase = 0;  // 0 = even periods (a), 1 = odd periods (b)
    double start = 0.0;
    double stop = 0.0;

    static Schedule always_on() { return {}; }

    static Schedule alternating(double tau, double guard, int phase) {
        if (tau <= 0 || guard < 0 || guard >= tau || (phase != 0 && phase != 1)) {
            throw std::invalid_argument("Schedule: invalid alternating parameters");
        }
        Schedule s;
        s.kind = Kind::alternating;
        s.tau = tau;
        s.guard = guard;
        s.phase = phase;
        return s;
    }

    static Schedule window(double start, double stop) {
        if (!(start < stop) || start < 0) {
            throw std::invalid_argument("Schedule: invalid window");
        }
        Schedule s;
        s.kind = Kind::window;
        s.start = start;
        s.stop = stop;
        return s;
    }

    double value(double t) const {
        switch (kind) {
            case Kind::always_on:
                return 1.0;
            case Kind::alternating: {
                const double p = std::floor(t / tau);
                const bool parity_on =
                    (static_cast<long long>(p) % 2 == 0) == (phase == 0);
                const double within = t - p * tau;
                return (parity_on && within < tau - guard) ? 1.0 : 0.0;
            }
            case Kind::window:
                return (t >= start && t < stop) ? 1.0 : 0.0;
        }
        return 0.0;
    }

    void append_breakpoints(double horizon, std::vector<double>& out) const {
        switch (kind) {
            case Kind::always_on:
                return;
            case Kind::alternating:
                for (int k = 0;; ++k) {
                    const double edge_on = k * tau;
                    const double edge_off = (k + 1) * tau - guard;
                    if (edge_on > horizon) break;
                    if (edge_on > 0 && edge_on < horizon) out.push_back(edge_on);
                    if (edge_off > 0 && edge_off < horizon) out.push_back(edge_off);
                }
                return;
            case Kind::window:
                if (start > 0 && start < horizon) out.push_back(start);
                if (stop > 0 && stop < horizon) out.push_back(stop);
                return;
        }
    }
};

// --------------------------- coefficient distributions -----------------------

struct CoefficientDistribution {
    enum class Kind { constant, normal, rademacher, uniform };

    Kind kind = Kind::constant;
    double a = 1.0;  // constant value | mean | magnitude | lo
    double b = 0.0;  // sigma | hi

    static CoefficientDistribution constant(double value) {
        return {Kind::constant, value, 0.0};
    }
    static CoefficientDistribution normal(double mean, double sigma) {
        if (sigma <= 0) {
            throw std::invalid_argument("CoefficientDistribution: sigma must be > 0");
        }
        return {Kind::normal, mean, sigma};
    }
    static CoefficientDistribution rademacher(double magnitude) {
        return {Kind::rademacher, magnitude, 0.0};
    }
    static CoefficientDistribution uniform(double lo, double hi) {
        if (!(lo < hi)) {
            throw std::invalid_argument("CoefficientDistribution: requires lo < hi");
        }
        return {Kind::uniform, lo, hi};
    }

    bool support_is_continuous() const {
        return kind == Kind::normal || kind == Kind::uniform;
    }

    double draw(Prng& rng) const {
        switch (kind) {
            case Kind::constant: return a;
            case Kind::normal: return rng.normal(a, b);
            case Kind::rademacher: return rng.rademacher(a);
            case Kind::uniform: return rng.uniform(a, b);
        }
        return a;
    }
};

// --------------------------- terms ------------------------------------------

// Two-body interaction: system_op on site 0 coupled to env_op on one
// environment site, scaled by a random coefficient when the schedule is on.
struct InteractionTerm {
    Matrix system_op;
    int env_site = 1;
    Matrix env_op;
    CoefficientDistribution coefficient;
    Schedule schedule;
};

// Escape hatch for ingested operator files: an explicit product of site-local
// factors. Unlike InteractionTerm this can express intra-environment coupling,
// which the classifier detects and rejects.
struct RawTerm {
    std::vector<std::pair<int, Matrix>> factors;  // (site, operator)
    CoefficientDistribution coefficient;
    Schedule schedule;
};

struct FreeTerm {
    Matrix op;
    Schedule schedule;
};

struct EnvFreeTerm {
    int site = 1;
    Matrix op;
    Schedule schedule;
};

// One unit of the repeating tail pattern of a collision stream: the forms
// through which every future unit couples to the system. All forms in one
// TailUnit act on the same (fresh) unit.
using TailUnit = std::vector<std::pair<Matrix, Matrix>>;  // (system_op, env_op)

// --------------------------- the model --------------------------------------

class HamiltonianModel {
public:
    HamiltonianModel() = default;

    explicit HamiltonianModel(SubsystemLayout layout) : layout_(std::move(layout)) {}

    void set_system_free(Matrix op, Schedule schedule = Schedule::always_on()) {
        check_square(op, layout_.system_dim(), "system free term");
        system_free_ = FreeTerm{std::move(op), schedule};
    }

    void add_env_free(int site, Matrix op, Schedule schedule = Schedule::always_on()) {
        if (!layout_.valid_env_site(site)) {
            throw std::out_of_range("HamiltonianModel: invalid environment site");
        }
        check_square(op, layout_.dim(site), "environment free term");
        env_free_.push_back({site, std::move(op), schedule});
    }

    void add_interaction(InteractionTerm term) {
        if (!layout_.valid_env_site(term.env_site)) {
            throw std::out_of_range("HamiltonianModel: invalid environment site");
        }
        check_square(term.system_op, layout_.system_dim(), "interaction system op");
        check_square(term.env_op, layout_.dim(term.env_site), "interaction env op");
        if (!is_traceless(term.system_op) || !is_traceless(term.env_op)) {
            throw std::invalid_argument(
                "HamiltonianModel: interaction operators must be traceless");
        }
        interactions_.push_back(std::move(term));
    }

    void add_raw_term(RawTerm term) {
        for (const auto& [site, op] : term.factors) {
            if (site < 0 || site >= layout_.num_sites()) {
                throw std::out_of_range("HamiltonianModel: raw term site out of range");
            }
            check_square(op, layout_.dim(site), "raw term factor");
        }
        raw_terms_.push_back(std::move(term));
    }

    void set_collision_tail(std::vector<TailUnit> tail) {
        collision_tail_ = std::move(tail);
    }

    const SubsystemLayout& layout() const { return layout_; }
    const std::optional<FreeTerm>& system_free() const { return system_free_; }
    const std::vector<EnvFreeTerm>& env_free() const { return env_free_; }
    const std::vector<InteractionTerm>& interactions() const { return interactions_; }
    const std::vector<RawTerm>& raw_terms() const { return raw_terms_; }
    const std::vector<TailUnit>& collision_tail() const { return collision_tail_; }

    bool has_windows() const {
        for (const auto& t : interactions_) {
            if (t.schedule.kind == Schedule::Kind::window) return true;
        }
        for (const auto& t : raw_terms_) {
            if (t.schedule.kind == Schedule::Kind::window) return true;
        }
        return false;
    }

    // Interval containing one full cycle of every schedule: one alternation
    // period pair, and all collision windows.
    double schedule_horizon() const {
        double h = 0.0;
        auto consider = [&h](const Schedule& s) {
            if (s.kind == Schedule::Kind::alternating) h = std::max(h, 2 * s.tau);
            if (s.kind == Schedule::Kind::window) h = std::max(h, s.stop);
        };
        if (system_free_) consider(system_free_->schedule);
        for (const auto& t : env_free_) consider(t.schedule);
        for (const auto& t : interactions_) consider(t.schedule);
        for (const auto& t : raw_terms_) consider(t.schedule);
        return h > 0 ? h : 1.0;
    }

    // Schedule discontinuities in [0, horizon], deduplicated, with 0 and the
    // horizon always included.
    std::vector<double> breakpoints(double horizon) const {
        if (horizon <= 0) {
            throw std::invalid_argument("breakpoints: horizon must be > 0");
        }
        std::vector<double> pts{0.0, horizon};
        if (system_free_) system_free_->schedule.append_breakpoints(horizon, pts);
        for (const auto& t : env_free_) t.schedule.append_breakpoints(horizon, pts);
        for (const auto& t : interactions_) t.schedule.append_breakpoints(horizon, pts);
        for (const auto& t : raw_terms_) t.schedule.append_breakpoints(horizon, pts);
        std::sort(pts.begin(), pts.end());
        std::vector<double> out;
        for (double p : pts) {
            if (out.empty() || p - out.back() > 1e-12) out.push_back(p);
        }
        return out;
    }

private:
    static void check_square(const Matrix& m, int dim, const char* what) {
        if (m.rows() != m.cols() || m.rows() != dim) {
            throw std::invalid_argument(std::string("HamiltonianModel: ") + what +
                                        " has wrong dimension");
        }
    }

    SubsystemLayout layout_;
    std::optional<FreeTerm> system_free_;
    std::vector<EnvFreeTerm> env_free_;
    std::vector<InteractionTerm> interactions_;
    std::vector<RawTerm> raw_terms_;
    std::vector<TailUnit> collision_tail_;
};

// --------------------------- instances --------------------------------------

// A model with coefficients drawn once from the seed-deterministic stream
// (couplings are static random parameters; only schedules vary in time).
struct ModelInstance {
    HamiltonianModel model;
    std::uint64_t seed = 0;
    std::vector<double> interaction_coeffs;  // one per interaction, in order
    std::vector<double> raw_coeffs;          // one per raw term, in order

    static ModelInstance draw(HamiltonianModel m, std::uint64_t seed) {
        ModelInstance inst;
        Prng rng = Prng::stream(seed, "coefficients");
        inst.interaction_coeffs.reserve(m.interactions().size());
        for (const auto& t : m.interactions()) {
            inst.interaction_coeffs.push_back(t.coefficient.draw(rng));
        }
        inst.raw_coeffs.reserve(m.raw_terms().size());
        for (const auto& t : m.raw_terms()) {
            inst.raw_coeffs.push_back(t.coefficient.draw(rng));
        }
        inst.model = std::move(m);
        inst.seed = seed;
        return inst;
    }

    std::vector<double> breakpoints(double horizon) const {
        return model.breakpoints(horizon);
    }
};

// Sum of all active terms at time t: schedule value x drawn coefficient x
// embedded tensor product.
inline SparseOperator assemble(const ModelInstance& inst, double t) {
    if (t < 0) throw std::invalid_argument("assemble: t must be >= 0");
    const SubsystemLayout& lay = inst.model.layout();
    std::vector<SparseOperator::Triplet> ts;

    auto accumulate = [&ts](const SparseOperator& op, double scale) {
        const auto& m = op.matrix();
        for (int k = 0; k < m.outerSize(); ++k) {
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(m, k); it; ++it) {
                ts.emplace_back(it.row(), it.col(), scale * it.value());
            }
        }
    };

    if (inst.model.system_free()) {
        const auto& f = *inst.model.system_free();
        const double v = f.schedule.value(t);
        if (v != 0.0) accumulate(embed(f.op, 0, lay), v);
    }
    for (const auto& f : inst.model.env_free()) {
        const double v = f.schedule.value(t);
        if (v != 0.0) accumulate(embed(f.op, f.site, lay), v);
    }
    for (std::size_t i = 0; i < inst.model.interactions().size(); ++i) {
        const auto& term = inst.model.interactions()[i];
        const double v = term.schedule.value(t) * inst.interaction_coeffs[i];
        if (v == 0.0) continue;
        accumulate(embed_product({{0, term.system_op}, {term.env_site, term.env_op}},
                                 lay),
                   v);
    }
    for (std::size_t i = 0; i < inst.model.raw_terms().size(); ++i) {
        const auto& term = inst.model.raw_terms()[i];
        const double v = term.schedule.value(t) * inst.raw_coeffs[i];
        if (v == 0.0) continue;
        accumulate(embed_product(term.factors, lay), v);
    }

    Eigen::SparseMatrix<cplx> sum(lay.joint_dim(), lay.joint_dim());
    sum.setFromTriplets(ts.begin(), ts.end());
    sum.prune([](Eigen::Index, Eigen::Index, const cplx& v) {
        return v != cplx(0, 0);
    });
    return SparseOperator(std::move(sum));
}

}  // namespace qdarwin
