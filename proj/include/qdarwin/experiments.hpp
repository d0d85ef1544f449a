// experiments.hpp — Reproduction harness: initial-state generators, multi-trial
// averaging with deterministic seeding, and diagnostics for the bundled model
// presets.

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qdarwin/classifier.hpp"
#include "qdarwin/evolution.hpp"
#include "qdarwin/information.hpp"
#include "qdarwin/parallel.hpp"
#include "qdarwin/presets.hpp"

namespace qdarwin {

// --------------------------- initial states ---------------------------------

// Families:
//   qutrit_product  (|0>+|1>+|2>)/sqrt3 (x) prod (|0>+|1>)/sqrt2
//   y_product       prod of (|0>+i|1>)/sqrt2 over every site
//   ent             Haar-random joint state
//   sep             Haar system state (x) Haar full-environment state
//   prod            Haar state on every site independently
//   sbf             equal-weight branches |n> (x) prod of Haar site states
//   demon           system (|A>+|B>+2i|C|)/sqrt6, units (|0>+2i|1>)/sqrt5
// Haar-random pure states are drawn as normalized complex Gaussian vectors.
inline StateVector make_initial_state(const std::string& kind,
                                      const SubsystemLayout& layout,
                                      std::uint64_t seed = 0) {
    auto gaussian_state = [](Prng& rng, std::int64_t dim) {
        Vector v(dim);
        for (std::int64_t i = 0; i < dim; ++i) v(i) = rng.complex_normal();
        v /= v.norm();
        return v;
    };

    if (kind == "qutrit_product") {
        if (layout.system_dim() != 3) {
            throw std::invalid_argument("make_initial_state: needs a qutrit system");
        }
        std::vector<Vector> locals;
        Vector sys(3);
        sys << 1, 1, 1;
        locals.push_back(sys);
        for (int s = 1; s < layout.num_sites(); ++s) {
            locals.push_back(Vector::Ones(layout.dim(s)));
        }
        return product_state(layout, locals);
    }
    if (kind == "y_product") {
        std::vector<Vector> locals;
        for (int s = 0; s < layout.num_sites(); ++s) {
            if (layout.dim(s) != 2) {
                throw std::invalid_argument("make_initial_state: y_product needs qubits");
            }
            Vector v(2);
            v << 1.0, cplx(0, 1);
            locals.push_back(v);
        }
        return product_state(layout, locals);
    }
    if (kind == "demon") {
        if (layout.system_dim() != 3) {
            throw std::invalid_argument("make_initial_state: needs a qutrit system");
        }
        std::vector<Vector> locals;
        Vector sys(3);
        sys << 1.0, 1.0, cplx(0, 2);
        locals.push_back(sys);
        for (int s = 1; s < layout.num_sites(); ++s) {
            Vector v(2);
            v << 1.0, cplx(0, 2);
            locals.push_back(v);
        }
        return product_state(layout, locals);
    }

    Prng rng = Prng::stream(seed, "haar");
    if (kind == "ent") {
        return StateVector(layout, gaussian_state(rng, layout.joint_dim()));
    }
    if (kind == "sep") {
        const Vector sys = gaussian_state(rng, layout.system_dim());
        const Vector env = gaussian_state(rng, layout.joint_dim() / layout.system_dim());
        Vector amps(layout.joint_dim());
        for (Eigen::Index i = 0; i < sys.size(); ++i) {
            amps.segment(i * env.size(), env.size()) = sys(i) * env;
        }
        return StateVector(layout, std::move(amps));
    }
    if (kind == "prod") {
        std::vector<Vector> locals;
        for (int s = 0; s < layout.num_sites(); ++s) {
            locals.push_back(gaussian_state(rng, layout.dim(s)));
        }
        return product_state(layout, locals);
    }
    if (kind == "sbf") {
        const int d = layout.system_dim();
        const std::int64_t d_env = layout.joint_dim() / d;
        Vector amps = Vector::Zero(layout.joint_dim());
        for (int n = 0; n < d; ++n) {
            Vector branch = Vector::Ones(1);
            for (int s = 1; s < layout.num_sites(); ++s) {
                const Vector site = gaussian_state(rng, layout.dim(s));
                Vector next(branch.size() * site.size());
                for (Eigen::Index i = 0; i < branch.size(); ++i) {
                    next.segment(i * site.size(), site.size()) = branch(i) * site;
                }
                branch = std::move(next);
            }
            amps.segment(static_cast<std::int64_t>(n) * d_env, d_env) =
                branch / std::sqrt(static_cast<double>(d));
        }
        return StateVector(layout, std::move(amps));
    }
    throw std::invalid_argument("make_initial_state: unknown kind '" + kind + "'");
}

inline std::string preset_default_initial_state(const std::string& name) {
    if (name == "A" || name == "B" || name == "C" || name == "D") {
        return "qutrit_product";
    }
    if (name == "demon") return "demon";
    return "y_product";
}

inline int preset_default_trials(const std::string& name) {
    if (name == "A" || name == "B" || name == "C" || name == "D") return 100;
    if (name == "E" || name == "F" || name == "G" || name == "H") return 500;
    if (name == "demon") return 1;
    if (name == "qubit") return 128;
    return 128;  // I-L
}

inline double preset_default_t_max(const std::string& name, int n_env,
                                   const PresetParams& params = {}) {
    if (name == "qubit") return 20.0;
    if (name == "I" || name == "J" || name == "K" || name == "L" ||
        name == "demon") {
        return params.tau.value_or(1.0) * n_env;
    }
    return 6.0;
}

inline std::vector<double> time_grid(double t_max, int points) {
    if (points < 1 || t_max <= 0) {
        throw std::invalid_argument("time_grid: invalid grid");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        out.push_back(t_max * static_cast<double>(i) /
                      static_cast<double>(points - 1 == 0 ? 1 : points - 1));
    }
    if (points == 1) out[0] = t_max;
    return out;
}

// --------------------------- experiment spec --------------------------------

namespace detail {

inline std::uint64_t stable_state_seed(std::uint64_t master) {
    return mix64(master ^ hash_name("initial-state"));
}

// Sites available for fragments at time t: in interacted mode, only those
// whose earliest interaction window has opened.
inline std::vector<int> fragment_universe(const HamiltonianModel& model, double t,
                                          bool interacted_only) {
    std::vector<int> universe;
    for (int s = 1; s < model.layout().num_sites(); ++s) {
        if (!interacted_only) {
            universe.push_back(s);
            continue;
        }
        bool opened = false;
        bool windowed_site = false;
        for (const auto& term : model.interactions()) {
            if (term.env_site != s) continue;
            if (term.schedule.kind == Schedule::Kind::window) {
                windowed_site = true;
                if (term.schedule.start < t) opened = true;
            } else {
                opened = true;
            }
        }
        for (const auto& term : model.raw_terms()) {
            for (const auto& [site, op] : term.factors) {
                if (site != s) continue;
                if (term.schedule.kind == Schedule::Kind::window) {
                    windowed_site = true;
                    if (term.schedule.start < t) opened = true;
                } else {
                    opened = true;
                }
            }
        }
        if (opened || !windowed_site) universe.push_back(s);
    }
    return universe;
}

inline std::string digest_coefficients(const ModelInstance& inst) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (double c : inst.interaction_coeffs) feed(c);
    for (double c : inst.raw_coeffs) feed(c);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace detail

struct ExperimentSpec {
    std::string preset;  // empty when explicit_model is set
    int n_env = 0;       // 0: preset default
    PresetParams params;
    std::optional<HamiltonianModel> explicit_model;

    std::string initial_state;  // empty: preset default
    int trials = 0;             // 0: preset default
    std::vector<double> times;  // output grid; empty: 100 points to default t_max
    std::vector<double> mi_times;  // subset for MI evaluation; empty: all times
    std::vector<int> sizes;        // fragment sizes; empty: 0..N

    enum class SamplerMode { automatic, exhaustive, random };
    SamplerMode sampler_mode = SamplerMode::automatic;
    int sampler_k = 256;

    std::uint64_t master_seed = 0;
    std::optional<std::uint64_t> state_seed;  // random states are drawn once
    std::optional<bool> interacted_universe;  // default: windowed models only
    int workers = 0;                          // 0: hardware concurrency
    double expm_tol = 1e-10;
    bool normalize_by_entropy = true;

    std::int64_t dim_cap = SubsystemLayout::kDefaultDimCap;
    int max_trials_cap = 10000;

    HamiltonianModel resolve_model() const {
        if (explicit_model) return *explicit_model;
        PresetParams p = params;
        p.dim_cap = dim_cap;
        const int n = n_env > 0 ? n_env : preset_default_n_env(preset);
        return ::qdarwin::preset(preset, n, p);
    }

    // All defaults applied; the echoed configuration has no hidden values.
    ExperimentSpec resolved() const {
        ExperimentSpec s = *this;
        HamiltonianModel model = resolve_model();
        if (!s.preset.empty() && s.n_env == 0) {
            s.n_env = preset_default_n_env(s.preset);
        }
        if (s.n_env == 0) s.n_env = model.layout().num_env_sites();
        if (s.initial_state.empty()) {
            s.initial_state = s.preset.empty()
                                  ? (model.layout().system_dim() == 3
                                         ? "qutrit_product"
                                         : "y_product")
                                  : preset_default_initial_state(s.preset);
        }
        if (s.trials == 0) {
            s.trials = s.preset.empty() ? 1 : preset_default_trials(s.preset);
        }
        if (s.times.empty()) {
            const double t_max = s.preset.empty()
                                     ? model.schedule_horizon()
                                     : preset_default_t_max(s.preset, s.n_env, s.params);
            s.times = time_grid(t_max, 100);
        }
        if (s.mi_times.empty()) s.mi_times = s.times;
        if (s.sizes.empty()) {
            for (int f = 0; f <= model.layout().num_env_sites(); ++f) {
                s.sizes.push_back(f);
            }
        }
        if (!s.interacted_universe) s.interacted_universe = model.has_windows();
        if (s.workers == 0) s.workers = default_workers();
        if (!s.state_seed) {
            s.state_seed = detail::stable_state_seed(s.master_seed);
        }
        return s;
    }
};

// --------------------------- results ----------------------------------------

struct TrialMeta {
    std::uint64_t seed = 0;
    std::string coefficient_digest;
};

struct ExperimentResult {
    ExperimentSpec spec;  // fully resolved
    MIProfile profile;
    ClassifierVerdict verdict;
    std::vector<TrialMeta> trial_meta;
    double wall_seconds = 0.0;

    // Collision-model linearity diagnostic (run_demon): per MI time with at
    // least three fragment sizes, R^2 of the linear fit of raw MI vs size.
    std::vector<std::pair<double, double>> linearity_r2;
};

// --------------------------- run --------------------------------------------

inline ExperimentResult run(const ExperimentSpec& raw_spec) {
    const auto t_begin = std::chrono::steady_clock::now();
    ExperimentSpec spec = raw_spec.resolved();
    if (spec.trials < 1 || spec.trials > spec.max_trials_cap) {
        throw std::invalid_argument("run: trial count outside configured limits");
    }
    HamiltonianModel model = spec.resolve_model();
    const SubsystemLayout& layout = model.layout();
    const int n_env = layout.num_env_sites();

    ExperimentResult result;
    result.spec = spec;
    result.verdict = classify(model);

    const StateVector psi0 =
        make_initial_state(spec.initial_state, layout, *spec.state_seed);

    // Fragment sets are fixed per (time, size) across trials so trial spread
    // measures coefficient randomness only.
    const std::size_t n_times = spec.mi_times.size();
    const std::size_t n_sizes = spec.sizes.size();
    std::vector<std::vector<int>> universes(n_times);
    std::vector<std::vector<std::vector<Fragment>>> fragments(n_times);
    for (std::size_t ti = 0; ti < n_times; ++ti) {
        universes[ti] = detail::fragment_universe(model, spec.mi_times[ti],
                                                  *spec.interacted_universe);
        fragments[ti].resize(n_sizes);
        const int m = static_cast<int>(universes[ti].size());
        for (std::size_t si = 0; si < n_sizes; ++si) {
            const int f = spec.sizes[si];
            if (f > m) continue;
            FragmentSampler sampler;
            switch (spec.sampler_mode) {
                case ExperimentSpec::SamplerMode::automatic:
                    sampler = FragmentSampler::auto_policy(
                        binomial(m, f), spec.master_seed, spec.sampler_k);
                    break;
                case ExperimentSpec::SamplerMode::exhaustive:
                    sampler = FragmentSampler::exhaustive();
                    break;
                case ExperimentSpec::SamplerMode::random:
                    sampler = binomial(m, f) <= static_cast<std::uint64_t>(spec.sampler_k)
                                  ? FragmentSampler::exhaustive()
                                  : FragmentSampler::random(spec.sampler_k,
                                                            spec.master_seed);
                    break;
            }
            fragments[ti][si] = enumerate_fragments(universes[ti], f, sampler);
        }
    }

    struct Cell {
        bool present = false;
        double raw = 0.0, norm = 0.0;
    };
    std::vector<std::vector<std::vector<Cell>>> per_trial(
        static_cast<std::size_t>(spec.trials));
    result.trial_meta.resize(static_cast<std::size_t>(spec.trials));

    auto run_trial = [&](std::size_t trial, int inner_workers) {
        const std::uint64_t seed = spec.master_seed + trial;
        ModelInstance inst = ModelInstance::draw(model, seed);
        result.trial_meta[trial] = {seed, detail::digest_coefficients(inst)};
        Trajectory traj = evolve(inst, psi0, spec.mi_times, spec.expm_tol);

        auto& cells = per_trial[trial];
        cells.assign(n_times, std::vector<Cell>(n_sizes));
        parallel_for(n_times, inner_workers, [&](std::size_t ti) {
            const StateVector& psi = traj.states[ti];
            const double s_sys = detail::entropy_of_keep(psi, {0});
            for (std::size_t si = 0; si < n_sizes; ++si) {
                const int f = spec.sizes[si];
                if (f > static_cast<int>(universes[ti].size())) continue;
                double mean = 0.0;
                if (f > 0) {
                    for (const Fragment& frag : fragments[ti][si]) {
                        mean += mutual_information(psi, frag);
                    }
                    mean /= static_cast<double>(fragments[ti][si].size());
                }
                Cell& c = cells[ti][si];
                c.present = true;
                c.raw = mean;
                c.norm = spec.normalize_by_entropy
                             ? (s_sys > 1e-12 ? mean / s_sys : 0.0)
                             : mean;
            }
        });
    };

    if (spec.trials > 1) {
        parallel_for(static_cast<std::size_t>(spec.trials), spec.workers,
                     [&](std::size_t trial) { run_trial(trial, 1); });
    } else {
        run_trial(0, spec.workers);
    }

    // Ordered reduction: identical output for any worker count.
    MIProfile& prof = result.profile;
    prof.times = spec.mi_times;
    prof.sizes = spec.sizes;
    prof.env_size = n_env;
    prof.trials = spec.trials;
    prof.normalization = spec.normalize_by_entropy ? "by_system_entropy" : "raw";
    prof.cells.assign(n_times, std::vector<MICell>(n_sizes));
    for (std::size_t ti = 0; ti < n_times; ++ti) {
        for (std::size_t si = 0; si < n_sizes; ++si) {
            if (!per_trial[0][ti][si].present) continue;
            double mean_raw = 0.0, mean_norm = 0.0;
            for (int tr = 0; tr < spec.trials; ++tr) {
                mean_raw += per_trial[static_cast<std::size_t>(tr)][ti][si].raw;
                mean_norm += per_trial[static_cast<std::size_t>(tr)][ti][si].norm;
            }
            mean_raw /= spec.trials;
            mean_norm /= spec.trials;
            double var = 0.0;
            for (int tr = 0; tr < spec.trials; ++tr) {
                const double d =
                    per_trial[static_cast<std::size_t>(tr)][ti][si].norm - mean_norm;
                var += d * d;
            }
            MICell& c = prof.cells[ti][si];
            c.present = true;
            c.mean_raw = mean_raw;
            c.mean_norm = mean_norm;
            c.stderr_norm =
                spec.trials > 1
                    ? std::sqrt(var / (spec.trials - 1)) / std::sqrt(double(spec.trials))
                    : 0.0;
        }
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
            .count();
    return result;
}

// Demon harness: standard run plus the MI-vs-size linearity diagnostic.
inline ExperimentResult run_demon(ExperimentSpec spec) {
    if (spec.preset.empty()) spec.preset = "demon";
    ExperimentResult result = run(spec);
    const MIProfile& prof = result.profile;
    for (std::size_t ti = 0; ti < prof.times.size(); ++ti) {
        std::vector<double> xs, ys;
        for (int f = 1; f <= prof.env_size; ++f) {
            const MICell* c = prof.cell(ti, f);
            if (c) {
                xs.push_back(static_cast<double>(f));
                ys.push_back(c->mean_raw);
            }
        }
        if (xs.size() >= 3) {
            result.linearity_r2.emplace_back(prof.times[ti], linear_r2(xs, ys));
        }
    }
    return result;
}

// --------------------------- decoherence profile ----------------------------

struct DecoherenceResult {
    ExperimentSpec spec;
    std::vector<double> times;
    std::vector<double> mean_abs_gamma_sq;  // <|Gamma(t)|^2> over trials
    ClassifierVerdict verdict;
};

// Trial-averaged |Gamma(t)|^2 between the two pointer branches of a qubit
// system, from per-site branch overlaps along each trajectory.
inline DecoherenceResult run_decoherence(const ExperimentSpec& raw_spec) {
    ExperimentSpec spec = raw_spec.resolved();
    HamiltonianModel model = spec.resolve_model();
    if (model.layout().system_dim() != 2) {
        throw std::invalid_argument("run_decoherence: qubit systems only");
    }
    DecoherenceResult result;
    result.spec = spec;
    result.verdict = classify(model);
    if (!result.verdict.pointer) {
        throw std::invalid_argument("run_decoherence: model has no pointer basis");
    }
    const Matrix basis = result.verdict.pointer->eigenbasis;
    const StateVector psi0 =
        make_initial_state(spec.initial_state, model.layout(), *spec.state_seed);

    result.times = spec.mi_times;
    std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(spec.trials));
    parallel_for(static_cast<std::size_t>(spec.trials), spec.workers,
                 [&](std::size_t trial) {
                     ModelInstance inst =
                         ModelInstance::draw(model, spec.master_seed + trial);
                     Trajectory traj = evolve(inst, psi0, spec.mi_times, spec.expm_tol);
                     const auto gammas = decoherence_factor(traj, basis, {0, 1});
                     auto& row = per_trial[trial];
                     row.reserve(gammas.size());
                     for (cplx g : gammas) row.push_back(std::norm(g));
                 });
    result.mean_abs_gamma_sq.assign(result.times.size(), 0.0);
    for (const auto& row : per_trial) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            result.mean_abs_gamma_sq[i] += row[i];
        }
    }
    for (double& v : result.mean_abs_gamma_sq) v /= spec.trials;
    return result;
}

}  // namespace qdarwin
