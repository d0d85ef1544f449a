// io.hpp — File formats: JSON model definitions and verdict reports, CSV
// result tables, and run metadata sidecars.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qdarwin/classifier.hpp"
#include "qdarwin/experiments.hpp"
#include "qdarwin/model.hpp"
#include "qdarwin/presets.hpp"
#include "qdarwin/version.hpp"

namespace qdarwin {

using json = nlohmann::json;

// --------------------------- operators --------------------------------------

// Operators are given by name (pauli_x/y/z, gellmann_1..8, identity_d,
// dyad(d,i,j)) or as an explicit matrix of [re, im] pairs (bare numbers are
// treated as real entries).
inline Matrix operator_from_json(const json& j) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "pauli_x") return ops::pauli_x();
        if (name == "pauli_y") return ops::pauli_y();
        if (name == "pauli_z") return ops::pauli_z();
        if (name.rfind("gellmann_", 0) == 0) {
            return ops::gellmann(std::stoi(name.substr(9)));
        }
        if (name.rfind("identity_", 0) == 0) {
            return ops::identity(std::stoi(name.substr(9)));
        }
        int d = 0, a = 0, b = 0;
        if (std::sscanf(name.c_str(), "dyad(%d,%d,%d)", &d, &a, &b) == 3) {
            return ops::dyad(d, a, b);
        }
        throw std::invalid_argument("operator_from_json: unknown operator '" +
                                    name + "'");
    }
    if (!j.is_array() || j.empty()) {
        throw std::invalid_argument("operator_from_json: expected name or matrix");
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::invalid_argument("operator_from_json: ragged matrix");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& e = row.at(static_cast<std::size_t>(c));
            if (e.is_number()) {
                m(r, c) = e.get<double>();
            } else if (e.is_array() && e.size() == 2) {
                m(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
            } else {
                throw std::invalid_argument(
                    "operator_from_json: entry must be a number or [re, im]");
            }
        }
    }
    return m;
}

inline json operator_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// --------------------------- schedules / distributions ----------------------

inline Schedule schedule_from_json(const json& j) {
    const std::string kind = j.value("kind", "always_on");
    if (kind == "always_on") return Schedule::always_on();
    if (kind == "alternating") {
        int phase = 0;
        if (j.contains("phase")) {
            if (j["phase"].is_string()) {
                phase = j["phase"].get<std::string>() == "b" ? 1 : 0;
            } else {
                phase = j["phase"].get<int>();
            }
        }
        return Schedule::alternating(j.at("tau").get<double>(),
                                     j.value("guard", 0.01), phase);
    }
    if (kind == "window") {
        return Schedule::window(j.at("start").get<double>(),
                                j.at("stop").get<double>());
    }
    throw std::invalid_argument("schedule_from_json: unknown kind '" + kind + "'");
}

inline json schedule_to_json(const Schedule& s) {
    switch (s.kind) {
        case Schedule::Kind::always_on:
            return {{"kind", "always_on"}};
        case Schedule::Kind::alternating:
            return {{"kind", "alternating"},
                    {"tau", s.tau},
                    {"guard", s.guard},
                    {"phase", s.phase == 0 ? "a" : "b"}};
        case Schedule::Kind::window:
            return {{"kind", "window"}, {"start", s.start}, {"stop", s.stop}};
    }
    return {};
}

inline CoefficientDistribution distribution_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        return CoefficientDistribution::constant(j.value("value", 1.0));
    }
    if (kind == "normal") {
        return CoefficientDistribution::normal(j.value("mean", 0.0),
                                               j.at("sigma").get<double>());
    }
    if (kind == "rademacher") {
        return CoefficientDistribution::rademacher(j.value("magnitude", 1.0));
    }
    if (kind == "uniform") {
        return CoefficientDistribution::uniform(j.at("lo").get<double>(),
                                                j.at("hi").get<double>());
    }
    throw std::invalid_argument("distribution_from_json: unknown kind '" + kind +
                                "'");
}

inline json distribution_to_json(const CoefficientDistribution& d) {
    switch (d.kind) {
        case CoefficientDistribution::Kind::constant:
            return {{"kind", "constant"}, {"value", d.a}};
        case CoefficientDistribution::Kind::normal:
            return {{"kind", "normal"}, {"mean", d.a}, {"sigma", d.b}};
        case CoefficientDistribution::Kind::rademacher:
            return {{"kind", "rademacher"}, {"magnitude", d.a}};
        case CoefficientDistribution::Kind::uniform:
            return {{"kind", "uniform"}, {"lo", d.a}, {"hi", d.b}};
    }
    return {};
}

// --------------------------- model files ------------------------------------

inline PresetParams preset_params_from_json(const json& j) {
    PresetParams p;
    if (j.contains("sigma_j")) p.sigma_j = j["sigma_j"].get<double>();
    if (j.contains("sigma_k")) p.sigma_k = j["sigma_k"].get<double>();
    if (j.contains("tau")) p.tau = j["tau"].get<double>();
    if (j.contains("delta")) p.delta = j["delta"].get<double>();
    if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
    if (j.contains("guard")) p.guard = j["guard"].get<double>();
    if (j.contains("replaced_unit")) p.replaced_unit = j["replaced_unit"].get<int>();
    if (j.contains("coupling")) p.coupling = distribution_from_json(j["coupling"]);
    return p;
}

inline HamiltonianModel model_from_json(const json& j) {
    if (j.contains("preset")) {
        const std::string name = j["preset"].get<std::string>();
        const int n_env = j.value("n_env", preset_default_n_env(name));
        PresetParams params;
        if (j.contains("params")) params = preset_params_from_json(j["params"]);
        return preset(name, n_env, params);
    }

    const auto dims = j.at("layout").at("dims").get<std::vector<int>>();
    HamiltonianModel model{SubsystemLayout(
        dims, j.value("dim_cap", SubsystemLayout::kDefaultDimCap))};

    if (j.contains("system_free")) {
        const json& f = j["system_free"];
        model.set_system_free(operator_from_json(f.at("op")),
                              f.contains("schedule")
                                  ? schedule_from_json(f["schedule"])
                                  : Schedule::always_on());
    }
    for (const json& f : j.value("env_free", json::array())) {
        model.add_env_free(f.at("site").get<int>(), operator_from_json(f.at("op")),
                           f.contains("schedule") ? schedule_from_json(f["schedule"])
                                                  : Schedule::always_on());
    }
    for (const json& t : j.value("interactions", json::array())) {
        model.add_interaction(
            {operator_from_json(t.at("system_op")), t.at("env_site").get<int>(),
             operator_from_json(t.at("env_op")),
             t.contains("coefficient") ? distribution_from_json(t["coefficient"])
                                       : CoefficientDistribution::constant(1.0),
             t.contains("schedule") ? schedule_from_json(t["schedule"])
                                    : Schedule::always_on()});
    }
    for (const json& t : j.value("raw_terms", json::array())) {
        RawTerm term;
        for (const json& f : t.at("factors")) {
            term.factors.emplace_back(f.at("site").get<int>(),
                                      operator_from_json(f.at("op")));
        }
        term.coefficient = t.contains("coefficient")
                               ? distribution_from_json(t["coefficient"])
                               : CoefficientDistribution::constant(1.0);
        term.schedule = t.contains("schedule") ? schedule_from_json(t["schedule"])
                                               : Schedule::always_on();
        model.add_raw_term(std::move(term));
    }
    if (j.contains("collision_tail")) {
        std::vector<TailUnit> tail;
        for (const json& unit : j["collision_tail"]) {
            TailUnit u;
            for (const json& form : unit) {
                u.emplace_back(operator_from_json(form.at("system_op")),
                               operator_from_json(form.at("env_op")));
            }
            tail.push_back(std::move(u));
        }
        model.set_collision_tail(std::move(tail));
    }
    return model;
}

inline json model_to_json(const HamiltonianModel& model) {
    json j;
    j["layout"] = {{"dims", model.layout().dims()}};
    if (model.system_free()) {
        j["system_free"] = {{"op", operator_to_json(model.system_free()->op)},
                            {"schedule", schedule_to_json(model.system_free()->schedule)}};
    }
    json env_free = json::array();
    for (const auto& f : model.env_free()) {
        env_free.push_back({{"site", f.site},
                            {"op", operator_to_json(f.op)},
                            {"schedule", schedule_to_json(f.schedule)}});
    }
    if (!env_free.empty()) j["env_free"] = env_free;
    json inter = json::array();
    for (const auto& t : model.interactions()) {
        inter.push_back({{"system_op", operator_to_json(t.system_op)},
                         {"env_site", t.env_site},
                         {"env_op", operator_to_json(t.env_op)},
                         {"coefficient", distribution_to_json(t.coefficient)},
                         {"schedule", schedule_to_json(t.schedule)}});
    }
    j["interactions"] = inter;
    json raws = json::array();
    for (const auto& t : model.raw_terms()) {
        json factors = json::array();
        for (const auto& [site, op] : t.factors) {
            factors.push_back({{"site", site}, {"op", operator_to_json(op)}});
        }
        raws.push_back({{"factors", factors},
                        {"coefficient", distribution_to_json(t.coefficient)},
                        {"schedule", schedule_to_json(t.schedule)}});
    }
    if (!raws.empty()) j["raw_terms"] = raws;
    if (!model.collision_tail().empty()) {
        json tail = json::array();
        for (const auto& unit : model.collision_tail()) {
            json u = json::array();
            for (const auto& [sys, env] : unit) {
                u.push_back({{"system_op", operator_to_json(sys)},
                             {"env_op", operator_to_json(env)}});
            }
            tail.push_back(std::move(u));
        }
        j["collision_tail"] = tail;
    }
    return j;
}

inline HamiltonianModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j;
    in >> j;
    return model_from_json(j);
}

// --------------------------- verdict reports --------------------------------

inline json verdict_to_json(const ClassifierVerdict& v) {
    json j;
    j["overall"] = overall_name(v.overall);
    j["reason"] = v.reason();
    j["exit_code"] = v.exit_code();
    j["env_separable"] = v.env_separable;
    j["continuous_support"] = v.continuous_support;
    j["mixing_free"] = v.mixing_free;
    if (v.pointer) {
        json p;
        p["degenerate"] = v.pointer->degenerate;
        p["observable"] = operator_to_json(v.pointer->observable);
        p["spectrum"] = std::vector<double>(
            v.pointer->spectrum.data(),
            v.pointer->spectrum.data() + v.pointer->spectrum.size());
        p["eigenbasis"] = operator_to_json(v.pointer->eigenbasis);
        j["pointer_observable"] = p;
    } else {
        j["pointer_observable"] = nullptr;
    }
    if (v.witness) {
        j["mixing_witness"] = {{"description", v.witness->description},
                               {"norm", v.witness->norm},
                               {"matrix", operator_to_json(v.witness->matrix)}};
    }
    if (v.prefix_cutoff) j["prefix_cutoff"] = *v.prefix_cutoff;
    if (!v.warnings.empty()) j["warnings"] = v.warnings;
    return j;
}

// --------------------------- results on disk ---------------------------------

namespace detail {

inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

inline json spec_to_json(const ExperimentSpec& spec) {
    json j;
    if (!spec.preset.empty()) j["preset"] = spec.preset;
    j["n_env"] = spec.n_env;
    json params;
    if (spec.params.sigma_j) params["sigma_j"] = *spec.params.sigma_j;
    if (spec.params.sigma_k) params["sigma_k"] = *spec.params.sigma_k;
    if (spec.params.tau) params["tau"] = *spec.params.tau;
    if (spec.params.delta) params["delta"] = *spec.params.delta;
    if (spec.params.gamma) params["gamma"] = *spec.params.gamma;
    if (spec.params.guard) params["guard"] = *spec.params.guard;
    if (spec.params.replaced_unit) params["replaced_unit"] = *spec.params.replaced_unit;
    if (spec.params.coupling) params["coupling"] = distribution_to_json(*spec.params.coupling);
    j["params"] = params;
    j["initial_state"] = spec.initial_state;
    j["trials"] = spec.trials;
    j["times"] = spec.times;
    j["mi_times"] = spec.mi_times;
    j["sizes"] = spec.sizes;
    j["sampler"] =
        spec.sampler_mode == ExperimentSpec::SamplerMode::exhaustive
            ? "exhaustive"
            : (spec.sampler_mode == ExperimentSpec::SamplerMode::random
                   ? "random:" + std::to_string(spec.sampler_k)
                   : "auto:" + std::to_string(spec.sampler_k));
    j["master_seed"] = spec.master_seed;
    if (spec.state_seed) j["state_seed"] = *spec.state_seed;
    if (spec.interacted_universe) j["interacted_universe"] = *spec.interacted_universe;
    j["workers"] = spec.workers;
    j["expm_tol"] = spec.expm_tol;
    j["normalization"] = spec.normalize_by_entropy ? "by_system_entropy" : "raw";
    j["dim_cap"] = spec.dim_cap;
    return j;
}

// Long-format CSV: one row per (time, fragment size) cell.
inline void write_profile_csv(std::ostream& out, const MIProfile& prof) {
    out << "time,fragment_size,mean_mi,mean_mi_normalized,stderr,trials,n_env\n";
    for (std::size_t ti = 0; ti < prof.times.size(); ++ti) {
        for (std::size_t si = 0; si < prof.sizes.size(); ++si) {
            const MICell& c = prof.cells[ti][si];
            if (!c.present) continue;
            out << detail::fmt_double(prof.times[ti]) << ',' << prof.sizes[si] << ','
                << detail::fmt_double(c.mean_raw) << ','
                << detail::fmt_double(c.mean_norm) << ','
                << detail::fmt_double(c.stderr_norm) << ',' << prof.trials << ','
                << prof.env_size << '\n';
        }
    }
}

inline void write_plateau_csv(std::ostream& out, const MIProfile& prof,
                              double epsilon) {
    out << "time,plateau_score,epsilon\n";
    for (double t : prof.times) {
        out << detail::fmt_double(t) << ','
            << detail::fmt_double(plateau_score(prof, t, epsilon)) << ','
            << detail::fmt_double(epsilon) << '\n';
    }
}

inline void write_decoherence_csv(std::ostream& out, const DecoherenceResult& r) {
    out << "time,mean_abs_gamma_sq,trials\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        out << detail::fmt_double(r.times[i]) << ','
            << detail::fmt_double(r.mean_abs_gamma_sq[i]) << ',' << r.spec.trials
            << '\n';
    }
}

inline json result_metadata(const ExperimentResult& result) {
    json j;
    j["version"] = kVersion;
    j["spec"] = spec_to_json(result.spec);
    j["verdict"] = verdict_to_json(result.verdict);
    j["wall_seconds"] = result.wall_seconds;
    json trials = json::array();
    for (const auto& t : result.trial_meta) {
        trials.push_back({{"seed", t.seed}, {"coefficients", t.coefficient_digest}});
    }
    j["trials"] = trials;
    if (!result.linearity_r2.empty()) {
        json r2 = json::array();
        for (const auto& [t, r] : result.linearity_r2) {
            r2.push_back({{"time", t}, {"r2", r}});
        }
        j["linearity_r2"] = r2;
    }
    return j;
}

// Atomic-ish file write: content lands under the final name only when
// complete, so failed runs leave no partial outputs.
inline void write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace qdarwin
