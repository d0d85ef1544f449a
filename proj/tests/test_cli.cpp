#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* p = std::getenv("QDARWIN_CLI");
    REQUIRE_MESSAGE(p != nullptr, "QDARWIN_CLI must point at the built binary");
    return p;
}

int run_cli(const std::string& args, const std::string& out_file = "/dev/null") {
    const std::string cmd = cli_path() + " " + args + " > " + out_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("qdarwin_cli_test_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("classify exit codes follow the verdict") {
    CHECK(run_cli("classify --preset A --n-env 6") == 0);
    CHECK(run_cli("classify --preset E --n-env 5") == 0);
    CHECK(run_cli("classify --preset L --n-env 8") == 2);
    CHECK(run_cli("classify --preset demon --n-env 6") == 2);
    CHECK(run_cli("classify --preset J --n-env 8") == 3);
    CHECK(run_cli("classify --preset K --n-env 8") == 3);
}

TEST_CASE("classify failure reason is printed") {
    TempDir tmp;
    const fs::path log = tmp.path / "l.txt";
    CHECK(run_cli("classify --preset L --n-env 8", log.string()) == 2);
    const std::string text = slurp(log);
    CHECK(text.find("no time-independent pointer observable") != std::string::npos);
}

TEST_CASE("classify writes a machine-readable report") {
    TempDir tmp;
    const fs::path report = tmp.path / "k.json";
    CHECK(run_cli("classify --preset K --n-env 8 --out " + report.string()) == 3);
    const json j = json::parse(slurp(report));
    CHECK(j["overall"] == "state_prep_prefix");
    CHECK(j["prefix_cutoff"].get<double>() == doctest::Approx(5.0));
}

TEST_CASE("usage and resource errors use the documented exit codes") {
    CHECK(run_cli("classify --no-such-flag") == 64);
    CHECK(run_cli("classify") == 64);               // no model given
    CHECK(run_cli("classify --preset A --n-env 14") == 65);  // over the cap
    TempDir tmp;
    const fs::path bad = tmp.path / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK(run_cli("classify --model-file " + bad.string()) == 64);
}

TEST_CASE("model files drive classification") {
    TempDir tmp;
    const fs::path model = tmp.path / "ee.json";
    std::ofstream(model) << R"({
        "layout": {"dims": [2, 2, 2]},
        "interactions": [
            {"system_op": "pauli_z", "env_site": 1, "env_op": "pauli_z",
             "coefficient": {"kind": "normal", "sigma": 1.0}}
        ],
        "raw_terms": [
            {"factors": [{"site": 1, "op": "pauli_z"}, {"site": 2, "op": "pauli_z"}]}
        ]
    })";
    TempDir out;
    const fs::path report = out.path / "v.json";
    CHECK(run_cli("classify --model-file " + model.string() + " --out " +
                  report.string()) == 2);
    const json j = json::parse(slurp(report));
    CHECK(j["env_separable"] == false);
}

TEST_CASE("simulate writes byte-identical CSV for identical invocations") {
    TempDir tmp;
    const std::string args =
        "simulate --preset A --n-env 3 --trials 2 --seed 7 --t-max 2 "
        "--t-points 5 --out ";
    CHECK(run_cli(args + (tmp.path / "a").string()) == 0);
    CHECK(run_cli(args + (tmp.path / "b").string()) == 0);
    CHECK(slurp(tmp.path / "a.csv") == slurp(tmp.path / "b.csv"));
    CHECK(!slurp(tmp.path / "a.csv").empty());

    const json meta = json::parse(slurp(tmp.path / "a.meta.json"));
    CHECK(meta["spec"]["trials"] == 2);
    CHECK(meta["spec"]["master_seed"] == 7);
    CHECK(meta["verdict"]["overall"] == "supports_QD");
}

TEST_CASE("config file values apply and flags override them") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    std::ofstream(cfg) << R"({"simulate": {"preset": "A", "n-env": 3,
                             "trials": 3, "seed": 11,
                             "t-max": 1.0, "t-points": 3,
                             "out": ")" << (tmp.path / "from_cfg").string()
                       << R"("}})";

    // all values from the file
    CHECK(run_cli("simulate --config " + cfg.string()) == 0);
    const json m1 = json::parse(slurp(tmp.path / "from_cfg.meta.json"));
    CHECK(m1["spec"]["trials"] == 3);
    CHECK(m1["spec"]["master_seed"] == 11);

    // a flag overrides the same key in the file, other keys keep file values
    CHECK(run_cli("simulate --config " + cfg.string() + " --trials 5 --out " +
                  (tmp.path / "override").string()) == 0);
    const json m2 = json::parse(slurp(tmp.path / "override.meta.json"));
    CHECK(m2["spec"]["trials"] == 5);
    CHECK(m2["spec"]["master_seed"] == 11);
}

TEST_CASE("sweep produces per-value outputs and a summary table") {
    TempDir tmp;
    const fs::path out = tmp.path / "sweep";
    CHECK(run_cli("sweep --preset A --n-env 3 --trials 2 --t-max 1 --t-points 3 "
                  "--axis initial_state_kind --values prod,ent --out " +
                  out.string()) == 0);
    CHECK(fs::exists(out / "initial_state_kind_prod.csv"));
    CHECK(fs::exists(out / "initial_state_kind_ent.csv"));
    const std::string summary = slurp(out / "summary.csv");
    CHECK(summary.rfind("value,final_time,plateau_score", 0) == 0);
    CHECK(summary.find("prod,") != std::string::npos);
    CHECK(summary.find("ent,") != std::string::npos);
}
