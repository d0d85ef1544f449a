// qdarwin — command-line front end: model classification, simulation runs,
// and sweep studies, with plot-ready CSV output.
//
//   qdarwin classify --preset A --n-env 10
//   qdarwin simulate --preset E --trials 500 --t-max 6 --out runs/e
//   qdarwin sweep --preset A --axis initial_state_kind
//       --values ent,sep,prod,sbf --out runs/states
//
// classify exit codes: 0 supports quantum Darwinism, 2 fails, 3 state-prep
// prefix, 4 inconclusive; 64 parse/usage errors, 65 dimension cap exceeded.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <qdarwin/io.hpp>

namespace fs = std::filesystem;
using namespace qdarwin;

namespace {

constexpr int kExitParse = 64;
constexpr int kExitDimCap = 65;

struct CommonOptions {
    std::string preset;
    std::string model_file;
    int n_env = 0;
    double sigma_j = -1, sigma_k = -1, tau = -1, delta = -1, gamma = -1,
           guard = -1;
    int replaced_unit = 0;
    std::string coupling;  // normal[:sigma] | rademacher[:m] | constant[:v] | uniform:lo:hi
    std::int64_t dim_cap = SubsystemLayout::kDefaultDimCap;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--preset", o.preset, "named model (A..L, demon, qubit)");
    cmd->add_option("--model-file", o.model_file, "JSON model definition");
    cmd->add_option("--n-env", o.n_env, "environment size (preset default if 0)");
    cmd->add_option("--sigma-j", o.sigma_j, "first coupling width");
    cmd->add_option("--sigma-k", o.sigma_k, "second coupling width");
    cmd->add_option("--tau", o.tau, "alternation period / collision spacing");
    cmd->add_option("--delta", o.delta, "collision window length");
    cmd->add_option("--gamma", o.gamma, "demon interaction strength");
    cmd->add_option("--guard", o.guard, "alternation guard interval");
    cmd->add_option("--replaced-unit", o.replaced_unit,
                    "unit index carrying the replaced interaction (J, K)");
    cmd->add_option("--coupling", o.coupling,
                    "coefficient distribution override, e.g. rademacher:1");
    cmd->add_option("--dim-cap", o.dim_cap, "joint-dimension resource cap");
}

CoefficientDistribution parse_distribution(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    const std::string& kind = parts.at(0);
    auto arg = [&](std::size_t i, double fallback) {
        return parts.size() > i ? std::stod(parts[i]) : fallback;
    };
    if (kind == "normal") return CoefficientDistribution::normal(0.0, arg(1, 1.0));
    if (kind == "rademacher") {
        return CoefficientDistribution::rademacher(arg(1, 1.0));
    }
    if (kind == "constant") return CoefficientDistribution::constant(arg(1, 1.0));
    if (kind == "uniform") {
        return CoefficientDistribution::uniform(arg(1, -1.0), arg(2, 1.0));
    }
    throw CLI::ValidationError("--coupling", "unknown distribution '" + kind + "'");
}

PresetParams to_params(const CommonOptions& o) {
    PresetParams p;
    if (o.sigma_j >= 0) p.sigma_j = o.sigma_j;
    if (o.sigma_k >= 0) p.sigma_k = o.sigma_k;
    if (o.tau >= 0) p.tau = o.tau;
    if (o.delta >= 0) p.delta = o.delta;
    if (o.gamma >= 0) p.gamma = o.gamma;
    if (o.guard >= 0) p.guard = o.guard;
    if (o.replaced_unit > 0) p.replaced_unit = o.replaced_unit;
    if (!o.coupling.empty()) p.coupling = parse_distribution(o.coupling);
    p.dim_cap = o.dim_cap;
    return p;
}

HamiltonianModel resolve_model(const CommonOptions& o) {
    if (!o.model_file.empty()) return load_model_file(o.model_file);
    if (o.preset.empty()) {
        throw CLI::ValidationError("--preset", "need --preset or --model-file");
    }
    const int n = o.n_env > 0 ? o.n_env : preset_default_n_env(o.preset);
    return preset(o.preset, n, to_params(o));
}

// JSON config files: option keys by long name, nested objects select
// subcommands, e.g. {"simulate": {"preset": "A", "trials": 100}}.
// Command-line flags always win over file values.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool, bool, std::string) const override {
        json j;
        for (const CLI::Option* opt : app->get_options()) {
            if (!opt->get_lnames().empty() && opt->count() > 0) {
                j[opt->get_lnames()[0]] = opt->results().front();
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        input >> j;
        std::vector<CLI::ConfigItem> out;
        collect(j, {}, out);
        return out;
    }

private:
    static void collect(const json& j, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& out) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.value().is_object()) {
                auto deeper = parents;
                deeper.push_back(it.key());
                collect(it.value(), std::move(deeper), out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = it.key();
            if (it.value().is_array()) {
                for (const auto& v : it.value()) {
                    item.inputs.push_back(v.is_string() ? v.get<std::string>()
                                                        : v.dump());
                }
            } else {
                item.inputs.push_back(it.value().is_string()
                                          ? it.value().get<std::string>()
                                          : it.value().dump());
            }
            out.push_back(std::move(item));
        }
    }
};

void print_verdict(const ClassifierVerdict& v, std::ostream& out) {
    out << "overall: " << overall_name(v.overall) << "\n";
    out << "reason: " << v.reason() << "\n";
    out << "env_separable: " << (v.env_separable ? "yes" : "no") << "\n";
    out << "continuous_support: " << (v.continuous_support ? "yes" : "no")
        << "\n";
    out << "mixing_free: " << (v.mixing_free ? "yes" : "no") << "\n";
    if (v.pointer) {
        out << "pointer_observable: present"
            << (v.pointer->degenerate ? " (degenerate)" : "") << "\n";
        out << "pointer spectrum:";
        for (Eigen::Index i = 0; i < v.pointer->spectrum.size(); ++i) {
            out << ' ' << v.pointer->spectrum(i);
        }
        out << "\npointer eigenbasis (columns):\n"
            << v.pointer->eigenbasis << "\n";
    } else {
        out << "pointer_observable: none\n";
    }
    if (v.witness) {
        out << "mixing witness: " << v.witness->description
            << "  (norm " << v.witness->norm << ")\n";
    }
    if (v.prefix_cutoff) out << "prefix cutoff: t = " << *v.prefix_cutoff << "\n";
    for (const auto& w : v.warnings) out << "warning: " << w << "\n";
}

struct SimulateOptions {
    CommonOptions common;
    std::string initial_state;
    int trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t state_seed = 0;
    bool state_seed_set = false;
    double t_max = -1;
    int t_points = 100;
    std::string sampler = "auto";
    double epsilon = -1;
    std::string out;
    int workers = 0;
    bool all_units = false;
    bool decoherence = false;
    int max_trials = 10000;
};

ExperimentSpec to_spec(const SimulateOptions& o) {
    ExperimentSpec spec;
    spec.preset = o.common.preset;
    spec.n_env = o.common.n_env;
    spec.params = to_params(o.common);
    if (!o.common.model_file.empty()) {
        spec.explicit_model = load_model_file(o.common.model_file);
    }
    spec.initial_state = o.initial_state;
    spec.trials = o.trials;
    spec.master_seed = o.seed;
    if (o.state_seed_set) spec.state_seed = o.state_seed;
    if (o.t_max > 0) {
        spec.times = time_grid(o.t_max, o.t_points);
    }
    if (o.sampler == "exhaustive") {
        spec.sampler_mode = ExperimentSpec::SamplerMode::exhaustive;
    } else if (o.sampler.rfind("random:", 0) == 0) {
        spec.sampler_mode = ExperimentSpec::SamplerMode::random;
        spec.sampler_k = std::stoi(o.sampler.substr(7));
    } else if (o.sampler != "auto") {
        throw CLI::ValidationError("--fragment-sampler",
                                   "expected exhaustive or random:k");
    }
    if (o.all_units) spec.interacted_universe = false;
    spec.workers = o.workers;
    spec.dim_cap = o.common.dim_cap;
    spec.max_trials_cap = o.max_trials;
    return spec;
}

void add_simulate_options(CLI::App* cmd, SimulateOptions& o) {
    add_common(cmd, o.common);
    cmd->add_option("--initial-state", o.initial_state,
                    "qutrit_product | y_product | ent | sep | prod | sbf | demon");
    cmd->add_option("--trials", o.trials, "trial count (preset default if 0)");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--state-seed", o.state_seed, "random initial-state seed")
        ->each([&o](const std::string&) { o.state_seed_set = true; });
    cmd->add_option("--t-max", o.t_max, "time horizon");
    cmd->add_option("--t-points", o.t_points, "output grid points")
        ->capture_default_str();
    cmd->add_option("--fragment-sampler", o.sampler,
                    "exhaustive | random:k | auto");
    cmd->add_option("--epsilon", o.epsilon,
                    "plateau tolerance: writes a plateau summary");
    cmd->add_option("--out", o.out, "output path prefix")->required();
    cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
    cmd->add_option("--max-trials", o.max_trials, "trial resource cap");
    cmd->add_flag("--all-units", o.all_units,
                  "fragments may include not-yet-interacted collision units");
    cmd->add_flag("--decoherence", o.decoherence,
                  "also write the branch-overlap decoherence profile");
}

void write_simulation_outputs(const std::string& prefix,
                              const ExperimentResult& result, double epsilon) {
    const fs::path p(prefix);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    {
        std::ostringstream csv;
        write_profile_csv(csv, result.profile);
        write_file(prefix + ".csv", csv.str());
    }
    write_file(prefix + ".meta.json", result_metadata(result).dump(2) + "\n");
    if (epsilon > 0) {
        std::ostringstream csv;
        write_plateau_csv(csv, result.profile, epsilon);
        write_file(prefix + ".plateau.csv", csv.str());
    }
}

int cmd_simulate(const SimulateOptions& o) {
    const ExperimentSpec spec = to_spec(o);
    const ExperimentResult result =
        spec.resolved().preset == "demon" ? run_demon(spec) : run(spec);
    // all computation precedes any write, so a failed run leaves no outputs
    std::string gamma_csv;
    if (o.decoherence) {
        const DecoherenceResult d = run_decoherence(spec);
        std::ostringstream csv;
        write_decoherence_csv(csv, d);
        gamma_csv = csv.str();
    }
    write_simulation_outputs(o.out, result, o.epsilon);
    if (o.decoherence) write_file(o.out + ".gamma.csv", gamma_csv);
    std::cout << "wrote " << o.out << ".csv (" << result.profile.times.size()
              << " times, " << result.spec.trials << " trials, "
              << result.wall_seconds << " s)\n";
    return 0;
}

int cmd_sweep(const SimulateOptions& base, const std::string& axis,
              const std::vector<std::string>& values) {
    if (values.empty()) {
        throw CLI::ValidationError("--values", "sweep needs at least one value");
    }
    fs::create_directories(base.out);
    std::ostringstream summary;
    summary << "value,final_time,plateau_score,epsilon";
    const double epsilon = base.epsilon > 0 ? base.epsilon : 0.15;
    const bool gamma_sweep = axis == "distribution_kind";
    if (gamma_sweep) summary << ",gamma_revival_dist,gamma_late_max";
    summary << "\n";

    for (const std::string& value : values) {
        SimulateOptions o = base;
        if (axis == "initial_state_kind") {
            o.initial_state = value;
        } else if (axis == "distribution_kind") {
            o.common.coupling = value;
        } else if (axis == "replaced_unit_index") {
            o.common.replaced_unit = std::stoi(value);
        } else {
            throw CLI::ValidationError("--axis", "unknown sweep axis '" + axis + "'");
        }
        o.out = (fs::path(base.out) / (axis + "_" + value)).string();
        const ExperimentSpec spec = to_spec(o);
        const ExperimentResult result =
            spec.resolved().preset == "demon" ? run_demon(spec) : run(spec);
        write_simulation_outputs(o.out, result, epsilon);

        const double t_final = result.profile.times.back();
        summary << value << ',' << t_final << ','
                << plateau_score(result.profile, t_final, epsilon) << ','
                << epsilon;
        if (gamma_sweep) {
            const DecoherenceResult d = run_decoherence(spec);
            std::ostringstream csv;
            write_decoherence_csv(csv, d);
            write_file(o.out + ".gamma.csv", csv.str());
            double revival = 1.0, late = 0.0;
            for (std::size_t i = 0; i < d.times.size(); ++i) {
                if (d.times[i] > 0) {
                    revival = std::min(revival,
                                       std::abs(1.0 - d.mean_abs_gamma_sq[i]));
                }
                if (d.times[i] >= 2.0) {
                    late = std::max(late, d.mean_abs_gamma_sq[i]);
                }
            }
            summary << ',' << revival << ',' << late;
        }
        summary << "\n";
        std::cout << "swept " << axis << " = " << value << "\n";
    }
    write_file((fs::path(base.out) / "summary.csv").string(), summary.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum Darwinism model classifier and simulator"};
    app.set_version_flag("--version", kVersion);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file (flags override it)");
    app.require_subcommand(1);

    // classify
    CommonOptions classify_opts;
    std::string classify_out;
    CLI::App* classify_cmd =
        app.add_subcommand("classify", "static analysis of a model");
    add_common(classify_cmd, classify_opts);
    classify_cmd->add_option("--out", classify_out, "write a JSON verdict report");
    classify_cmd->fallthrough();

    // simulate
    SimulateOptions sim_opts;
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "exact state-vector reproduction run");
    add_simulate_options(simulate_cmd, sim_opts);
    simulate_cmd->fallthrough();

    // sweep
    SimulateOptions sweep_opts;
    std::string axis;
    std::vector<std::string> values;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run one axis of variations");
    add_simulate_options(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--axis", axis,
                          "initial_state_kind | distribution_kind | "
                          "replaced_unit_index")
        ->required();
    sweep_cmd->add_option("--values", values, "comma-separated axis values")
        ->required()
        ->delimiter(',');
    sweep_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
        app.exit(e);
        return kExitParse;
    }

    try {
        if (classify_cmd->parsed()) {
            const HamiltonianModel model = resolve_model(classify_opts);
            const ClassifierVerdict verdict = classify(model);
            print_verdict(verdict, std::cout);
            if (!classify_out.empty()) {
                write_file(classify_out, verdict_to_json(verdict).dump(2) + "\n");
            }
            return verdict.exit_code();
        }
        if (simulate_cmd->parsed()) return cmd_simulate(sim_opts);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, axis, values);
    } catch (const DimCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDimCap;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
