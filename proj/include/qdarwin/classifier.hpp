// classifier.hpp — Static analysis of a HamiltonianModel for the criteria of
// quantum Darwinism: pointer-observable existence, mixing freedom,
// environment separability, coupling-distribution support, and the
// state-preparation-prefix reinterpretation of collision streams.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qdarwin/commutant.hpp"
#include "qdarwin/evolution.hpp"
#include "qdarwin/mixing.hpp"
#include "qdarwin/model.hpp"

namespace qdarwin {

// --------------------------- operator support analysis -----------------------

namespace detail {

// Partial trace of a dense operator over one site of a small sub-layout.
inline Matrix op_trace_site(const Matrix& op, const std::vector<int>& dims,
                            std::size_t site) {
    std::int64_t pre = 1, post = 1;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (s < site) pre *= dims[s];
        if (s > site) post *= dims[s];
    }
    const std::int64_t d = dims[site];
    Matrix out = Matrix::Zero(pre * post, pre * post);
    for (std::int64_t p = 0; p < pre; ++p) {
        for (std::int64_t q = 0; q < pre; ++q) {
            for (std::int64_t r = 0; r < post; ++r) {
                for (std::int64_t c = 0; c < post; ++c) {
                    cplx acc = 0.0;
                    for (std::int64_t a = 0; a < d; ++a) {
                        acc += op((p * d + a) * post + r, (q * d + a) * post + c);
                    }
                    out(p * post + r, q * post + c) = acc;
                }
            }
        }
    }
    return out;
}

// Does the operator act non-trivially on `site`? Tested by comparing against
// the reconstruction I_site (x) Tr_site(op) / d_site.
inline bool site_in_support(const Matrix& op, const std::vector<int>& dims,
                            std::size_t site, double tol = 1e-10) {
    const Matrix t = op_trace_site(op, dims, site) /
                     static_cast<double>(dims[site]);
    std::int64_t pre = 1, post = 1;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (s < site) pre *= dims[s];
        if (s > site) post *= dims[s];
    }
    const std::int64_t d = dims[site];
    const double scale = std::max(1.0, max_abs(op));
    for (std::int64_t p = 0; p < pre; ++p) {
        for (std::int64_t q = 0; q < pre; ++q) {
            for (std::int64_t a = 0; a < d; ++a) {
                for (std::int64_t b = 0; b < d; ++b) {
                    for (std::int64_t r = 0; r < post; ++r) {
                        for (std::int64_t c = 0; c < post; ++c) {
                            const cplx expect =
                                (a == b) ? t(p * post + r, q * post + c) : cplx(0, 0);
                            const cplx got =
                                op((p * d + a) * post + r, (q * d + b) * post + c);
                            if (std::abs(got - expect) > tol * scale) return true;
                        }
                    }
                }
            }
        }
    }
    return false;
}

// Dense joint operator of a raw term over its involved sites only.
inline Matrix raw_term_dense(const RawTerm& term, std::vector<int>& sites_out) {
    std::vector<std::pair<int, Matrix>> factors = term.factors;
    std::sort(factors.begin(), factors.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Matrix joint = Matrix::Identity(1, 1);
    sites_out.clear();
    for (const auto& [site, op] : factors) {
        joint = kron(joint, op);
        sites_out.push_back(site);
    }
    return joint;
}

}  // namespace detail

// Environment-site support of a raw term, by partial-trace analysis of its
// dense joint operator.
inline std::vector<int> raw_term_support(const RawTerm& term,
                                         const SubsystemLayout& layout) {
    std::vector<int> sites;
    const Matrix joint = detail::raw_term_dense(term, sites);
    std::vector<int> dims;
    for (int s : sites) dims.push_back(layout.dim(s));
    std::vector<int> support;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (detail::site_in_support(joint, dims, i)) support.push_back(sites[i]);
    }
    return support;
}

// --------------------------- individual checks ------------------------------

// True iff no raw term couples two or more environment sites. Plain
// interaction terms cannot express such coupling by construction.
inline bool check_env_separability(const HamiltonianModel& model) {
    for (const auto& term : model.raw_terms()) {
        const auto support = raw_term_support(term, model.layout());
        int env_sites = 0;
        for (int s : support) {
            if (s >= 1) ++env_sites;
        }
        if (env_sites >= 2) return false;
    }
    return true;
}

// True iff every always-on or alternating interaction draws its coefficient
// from a distribution with continuous support. Window-scheduled terms are
// exempt: each unit interacts exactly once for a finite time, so the transfer
// is irreversible regardless of the coefficient values.
inline bool check_support(const HamiltonianModel& model) {
    auto exempt = [](const Schedule& s) { return s.kind == Schedule::Kind::window; };
    for (const auto& t : model.interactions()) {
        if (!exempt(t.schedule) && !t.coefficient.support_is_continuous()) {
            return false;
        }
    }
    for (const auto& t : model.raw_terms()) {
        bool touches_env = false, touches_sys = false;
        for (const auto& [site, op] : t.factors) {
            (site >= 1 ? touches_env : touches_sys) = true;
        }
        if (touches_env && touches_sys && !exempt(t.schedule) &&
            !t.coefficient.support_is_continuous()) {
            return false;
        }
    }
    return true;
}

// --------------------------- verdicts ---------------------------------------

enum class Overall {
    supports_qd,
    fails_no_pointer,
    fails_mixing,
    fails_support,
    state_prep_prefix,
    inconclusive,
};

inline std::string overall_name(Overall o) {
    switch (o) {
        case Overall::supports_qd: return "supports_QD";
        case Overall::fails_no_pointer: return "fails_no_pointer";
        case Overall::fails_mixing: return "fails_mixing";
        case Overall::fails_support: return "fails_support";
        case Overall::state_prep_prefix: return "state_prep_prefix";
        case Overall::inconclusive: return "inconclusive";
    }
    return "?";
}

struct ClassifierVerdict {
    Overall overall = Overall::inconclusive;
    std::optional<PointerObservable> pointer;
    bool pointer_degenerate = false;
    bool mixing_free = false;
    std::optional<MixingWitness> witness;
    bool env_separable = true;
    bool continuous_support = true;
    std::optional<double> prefix_cutoff;
    std::vector<std::string> warnings;

    // classify: 0 supports, 2 fails, 3 state-prep prefix, 4 inconclusive
    int exit_code() const {
        switch (overall) {
            case Overall::supports_qd: return 0;
            case Overall::state_prep_prefix: return 3;
            case Overall::inconclusive: return 4;
            default: return 2;
        }
    }

    std::string reason() const {
        switch (overall) {
            case Overall::supports_qd:
                return "supports quantum Darwinism";
            case Overall::fails_no_pointer:
                return "no time-independent pointer observable";
            case Overall::fails_mixing:
                return witness ? "induced intra-environment mixing: " +
                                     witness->description
                               : "intra-environment coupling";
            case Overall::fails_support:
                return "coupling distribution lacks continuous support";
            case Overall::state_prep_prefix:
                return "state-preparation prefix, cutoff t = " +
                       std::to_string(prefix_cutoff.value_or(0.0));
            case Overall::inconclusive:
                return "commutator closure exceeded the operator budget";
        }
        return "?";
    }
};

struct ClassifyOptions {
    std::vector<double> sample_times;  // empty: phase midpoints over one cycle
    std::size_t max_ops = 0;           // 0: sites * dim^2 * 4 + 256
};

// --------------------------- generator collection ----------------------------

namespace detail {

inline void add_tagged(std::vector<TaggedGenerator>& gens, const Matrix& op,
                       int site, const std::string& label) {
    for (auto& h : hermitian_split(op)) {
        bool dup = false;
        for (const auto& g : gens) {
            if (g.site == site && g.op.rows() == h.rows() &&
                max_abs(g.op - h) <= 1e-12 * std::max(1.0, max_abs(h))) {
                dup = true;
                break;
            }
        }
        if (!dup) gens.push_back({h, site, label});
    }
}

inline std::vector<double> default_sample_times(const HamiltonianModel& model) {
    const double horizon = model.schedule_horizon();
    const auto bps = model.breakpoints(horizon);
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
        mids.push_back(0.5 * (bps[i] + bps[i + 1]));
    }
    if (mids.empty()) mids.push_back(0.0);
    return mids;
}

struct WindowedEntry {
    std::size_t term_index;
    Matrix system_op;
    int site;
    double start, stop;
    std::string label;
};

struct CollectedGenerators {
    std::vector<TaggedGenerator> static_gens;  // always-on / alternating content
    std::vector<WindowedEntry> windowed;       // collision-window terms
    bool env_separable = true;
};

inline CollectedGenerators collect_generators(const HamiltonianModel& model,
                                              const std::vector<double>& times) {
    CollectedGenerators out;

    auto label_site_term = [](int site, std::size_t index) {
        std::ostringstream os;
        os << "S(site=" << site << ",term=" << index << ")";
        return os.str();
    };

    for (double t : times) {
        if (model.system_free() && model.system_free()->schedule.value(t) != 0.0) {
            add_tagged(out.static_gens, model.system_free()->op, -1, "H_S");
        }
        for (std::size_t i = 0; i < model.interactions().size(); ++i) {
            const auto& term = model.interactions()[i];
            if (term.schedule.kind == Schedule::Kind::window) continue;
            if (term.schedule.value(t) == 0.0) continue;
            add_tagged(out.static_gens, term.system_op, term.env_site,
                       label_site_term(term.env_site, i));
        }
    }
    for (std::size_t i = 0; i < model.interactions().size(); ++i) {
        const auto& term = model.interactions()[i];
        if (term.schedule.kind != Schedule::Kind::window) continue;
        out.windowed.push_back({i, term.system_op, term.env_site,
                                term.schedule.start, term.schedule.stop,
                                label_site_term(term.env_site, i)});
    }

    // Raw terms: classify by environment support; the factored form names the
    // system-side operator directly.
    for (std::size_t i = 0; i < model.raw_terms().size(); ++i) {
        const auto& term = model.raw_terms()[i];
        const auto support = raw_term_support(term, model.layout());
        int env_sites = 0, env_site = -1;
        bool system_in = false;
        for (int s : support) {
            if (s == 0) system_in = true;
            if (s >= 1) {
                ++env_sites;
                env_site = s;
            }
        }
        if (env_sites >= 2) {
            out.env_separable = false;
            continue;
        }
        const bool windowed = term.schedule.kind == Schedule::Kind::window;
        bool active_somewhere = windowed;
        for (double t : times) {
            if (term.schedule.value(t) != 0.0) active_somewhere = true;
        }
        if (!active_somewhere) continue;

        std::ostringstream os;
        os << "raw(term=" << i << ")";
        if (system_in && env_sites == 0) {
            for (const auto& [site, op] : term.factors) {
                if (site == 0) add_tagged(out.static_gens, op, -1, os.str() + ":H_S");
            }
        } else if (system_in && env_sites == 1) {
            Matrix sys_factor;
            bool have_sys = false;
            for (const auto& [site, op] : term.factors) {
                if (site == 0) {
                    sys_factor = op;
                    have_sys = true;
                }
            }
            if (have_sys) {
                if (windowed) {
                    out.windowed.push_back({model.interactions().size() + i,
                                            sys_factor, env_site,
                                            term.schedule.start, term.schedule.stop,
                                            os.str()});
                } else {
                    add_tagged(out.static_gens, sys_factor, env_site, os.str());
                }
            }
        }
        // env-only raw terms place no constraint on the system side
    }
    return out;
}

// Two synthetic instantiations of the repeating unit pattern, on fresh sites.
inline std::vector<TaggedGenerator> instantiate_tail(
    const std::vector<TailUnit>& tail, int first_free_site) {
    std::vector<TaggedGenerator> gens;
    int site = first_free_site;
    for (int copy = 0; copy < 2; ++copy) {
        for (std::size_t u = 0; u < tail.size(); ++u) {
            for (std::size_t k = 0; k < tail[u].size(); ++k) {
                std::ostringstream os;
                os << "S(tail unit " << u << "." << copy << ",form=" << k << ")";
                add_tagged(gens, tail[u][k].first, site, os.str());
            }
            ++site;
        }
    }
    return gens;
}

inline std::vector<Matrix> system_ops_of(const std::vector<TaggedGenerator>& gens) {
    std::vector<Matrix> ops;
    for (const auto& g : gens) ops.push_back(g.op);
    return ops;
}

}  // namespace detail

// Pointer-observable computation over the sampled schedule phases: the joint
// commutant of the free system Hamiltonian and every active system operator.
inline CommutantBasis pointer_observable(const HamiltonianModel& model,
                                         std::vector<double> sample_times = {}) {
    if (sample_times.empty()) sample_times = detail::default_sample_times(model);
    auto collected = detail::collect_generators(model, sample_times);
    std::vector<TaggedGenerator> all = collected.static_gens;
    for (const auto& w : collected.windowed) {
        detail::add_tagged(all, w.system_op, w.site, w.label);
    }
    if (all.empty()) {
        all.push_back({Matrix::Zero(model.layout().system_dim(),
                                    model.layout().system_dim()),
                       -1, "0"});
    }
    return commutant_basis(detail::system_ops_of(all));
}

// Mixing-freedom over the sampled phases (no collision-prefix treatment).
inline MixingResult mixing_closure(const HamiltonianModel& model,
                                   std::vector<double> sample_times = {},
                                   std::size_t max_ops = 0) {
    if (sample_times.empty()) sample_times = detail::default_sample_times(model);
    const int d = model.layout().system_dim();
    if (max_ops == 0) {
        max_ops = static_cast<std::size_t>(model.layout().num_sites()) *
                      static_cast<std::size_t>(d) * static_cast<std::size_t>(d) * 4 +
                  256;
    }
    auto collected = detail::collect_generators(model, sample_times);
    std::vector<TaggedGenerator> all = collected.static_gens;
    for (const auto& w : collected.windowed) {
        detail::add_tagged(all, w.system_op, w.site, w.label);
    }
    return mixing_closure(all, max_ops);
}

// --------------------------- the composed verdict ----------------------------

inline ClassifierVerdict classify(const HamiltonianModel& model,
                                  ClassifyOptions opt = {}) {
    ClassifierVerdict v;
    std::vector<double> times =
        opt.sample_times.empty() ? detail::default_sample_times(model)
                                 : opt.sample_times;
    const int d = model.layout().system_dim();
    const std::size_t max_ops =
        opt.max_ops ? opt.max_ops
                    : static_cast<std::size_t>(model.layout().num_sites()) *
                              static_cast<std::size_t>(d) *
                              static_cast<std::size_t>(d) * 4 +
                          256;

    auto collected = detail::collect_generators(model, times);
    v.env_separable = collected.env_separable;
    v.continuous_support = check_support(model);

    auto finish = [&](const std::vector<TaggedGenerator>& gens,
                      std::optional<double> cutoff) {
        CommutantBasis cb = commutant_basis(detail::system_ops_of(gens));
        MixingResult mix = mixing_closure(gens, max_ops);
        v.pointer = pointer_representative(cb);
        v.pointer_degenerate = v.pointer && v.pointer->degenerate;
        v.mixing_free = mix.mixing_free();
        v.witness = mix.witness;
        if (!v.env_separable) {
            v.overall = Overall::fails_mixing;
            if (!v.witness) {
                v.witness = MixingWitness{
                    "explicit coupling between environment sites", Matrix(), 0.0};
            }
            return;
        }
        if (!cb.has_pointer_observable()) {
            v.pointer.reset();
            v.overall = Overall::fails_no_pointer;
            return;
        }
        if (mix.status == MixingStatus::inconclusive) {
            v.overall = Overall::inconclusive;
            return;
        }
        if (mix.status == MixingStatus::mixing) {
            v.overall = Overall::fails_mixing;
            return;
        }
        if (!v.continuous_support) {
            v.overall = Overall::fails_support;
            return;
        }
        for (int site : mix.noncommuting_sites) {
            std::ostringstream os;
            os << "non-commuting interactions confined to environment site " << site
               << "; consider treating that site as part of the system";
            v.warnings.push_back(os.str());
        }
        v.prefix_cutoff = cutoff;
        v.overall = cutoff ? Overall::state_prep_prefix : Overall::supports_qd;
    };

    if (collected.windowed.empty()) {
        std::vector<TaggedGenerator> gens = collected.static_gens;
        if (gens.empty()) {
            gens.push_back({Matrix::Zero(d, d), -1, "0"});
        }
        finish(gens, std::nullopt);
        return v;
    }

    // Collision stream: classify the asymptotic content (static terms plus the
    // repeating tail), then treat non-conforming explicit units as a finite
    // state-preparation prefix.
    std::vector<TailUnit> tail = model.collision_tail();
    if (tail.empty()) {
        // Undeclared tail: assume the stream continues like the unit(s) whose
        // window opens last.
        double last_start = -1.0;
        for (const auto& w : collected.windowed) {
            last_start = std::max(last_start, w.start);
        }
        TailUnit unit;
        for (const auto& w : collected.windowed) {
            if (w.start == last_start) {
                unit.emplace_back(w.system_op,
                                  Matrix::Zero(2, 2));  // env side unused here
            }
        }
        tail.push_back(std::move(unit));
    }

    std::vector<TaggedGenerator> asymptotic = collected.static_gens;
    for (auto& g : detail::instantiate_tail(tail, model.layout().num_sites() + 1)) {
        asymptotic.push_back(std::move(g));
    }

    {
        CommutantBasis cb = commutant_basis(detail::system_ops_of(asymptotic));
        MixingResult mix = mixing_closure(asymptotic, max_ops);
        if (!cb.has_pointer_observable() || mix.status != MixingStatus::free ||
            !v.env_separable) {
            finish(asymptotic, std::nullopt);
            return v;
        }
    }

    // Conformance of each explicit unit against the asymptotic content.
    std::vector<const detail::WindowedEntry*> conforming, nonconforming;
    for (const auto& w : collected.windowed) {
        std::vector<TaggedGenerator> probe = asymptotic;
        detail::add_tagged(probe, w.system_op, w.site, w.label);
        CommutantBasis cb = commutant_basis(detail::system_ops_of(probe));
        MixingResult mix = mixing_closure(probe, max_ops);
        if (cb.has_pointer_observable() && mix.status == MixingStatus::free) {
            conforming.push_back(&w);
        } else {
            nonconforming.push_back(&w);
        }
    }

    std::vector<TaggedGenerator> suffix = asymptotic;
    for (const auto* w : conforming) {
        detail::add_tagged(suffix, w->system_op, w->site, w->label);
    }

    if (nonconforming.empty()) {
        finish(suffix, std::nullopt);
        return v;
    }

    double last_bad_stop = 0.0;
    for (const auto* w : nonconforming) {
        last_bad_stop = std::max(last_bad_stop, w->stop);
    }
    double cutoff = last_bad_stop;
    double best = std::numeric_limits<double>::infinity();
    for (const auto* w : conforming) {
        if (w->start >= last_bad_stop) best = std::min(best, w->start);
    }
    if (std::isfinite(best)) cutoff = best;

    finish(suffix, cutoff);
    return v;
}

// --------------------------- initial-state admissibility ---------------------

// Singly-branching test: in the candidate pointer basis, every branch's
// conditional reduced state on every environment site must be pure within tol.
// Without a supplied basis the computational and reduced-system eigenbases are
// tried.
inline bool check_initial_state(const StateVector& state,
                                const SubsystemLayout& layout, double tol = 1e-8,
                                std::optional<Matrix> pointer_basis = std::nullopt) {
    if (!(state.layout == layout)) {
        throw std::invalid_argument("check_initial_state: layout mismatch");
    }
    auto branching_in = [&](const Matrix& basis) {
        const BranchDecomposition bd = branch_decompose(state, basis);
        for (const auto& cond : bd.conditionals) {
            for (int j = 0; j < bd.env_layout.num_sites(); ++j) {
                const Matrix rho = partial_trace(cond, {j});
                const Eigen::VectorXd evals = hermitian_eigvals(rho);
                double purity = 0.0;
                for (Eigen::Index i = 0; i < evals.size(); ++i) {
                    purity += evals(i) * evals(i);
                }
                if (purity < 1.0 - tol) return false;
            }
        }
        return true;
    };

    if (pointer_basis) {
        if (max_abs(pointer_basis->adjoint() * *pointer_basis -
                    Matrix::Identity(layout.system_dim(), layout.system_dim())) >
            1e-8) {
            throw std::invalid_argument("check_initial_state: basis is not unitary");
        }
        return branching_in(*pointer_basis);
    }
    if (branching_in(Matrix::Identity(layout.system_dim(), layout.system_dim()))) {
        return true;
    }
    const Matrix rho_s = partial_trace(state, {0});
    return branching_in(hermitian_eig(rho_s).vectors);
}

}  // namespace qdarwin
