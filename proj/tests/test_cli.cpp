#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fpp/commands.hpp"
#include "fpp/config.hpp"
#include "fpp/output.hpp"

using namespace fpp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("fpp_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(FPP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

const char* kSmallSweep = R"(
[model]
p = 2
u = 1, 0
[sweep]
models = rewards
epsilon_grid = geomspace(0.01, 0.16, 5)
s_grid = 10
replicas = 8
)";

} // namespace

TEST_CASE("defaults") {
    RunConfig c = parse_config("");
    CHECK(c.d == 2);
    CHECK(c.p == 2);
    CHECK(c.u == Vec{1, 0});
    CHECK(c.replicas == 32);
    CHECK(c.tolerance == 0.15);
    CHECK(c.seed == 1);
    CHECK(c.solver.mode == SolverMode::exact_pruned);
    CHECK(c.solver.max_memory == 32);
    REQUIRE(c.epsilon_grid.size() == 6);
    CHECK(c.epsilon_grid.front() == doctest::Approx(0.004));
    CHECK(c.epsilon_grid.back() == 0.128);
    CHECK(c.s_grid == Vec{50, 100, 200});
    CHECK(c.eta_grid.size() == 16);
    CHECK(c.selftest_budget == "reduced");
}

TEST_CASE("grid syntax") {
    RunConfig c = parse_config("[sweep]\nepsilon_grid = geomspace(0.01, 0.16, 5)\n");
    REQUIRE(c.epsilon_grid.size() == 5);
    for (size_t i = 1; i < 5; ++i) CHECK(c.epsilon_grid[i] / c.epsilon_grid[i - 1] == doctest::Approx(2));
    CHECK(c.epsilon_grid.back() == 0.16);
    CHECK(parse_config("[sweep]\nepsilon_grid = 0.01, 0.02\n").epsilon_grid == Vec{0.01, 0.02});
    CHECK_THROWS_AS(parse_config("[sweep]\nepsilon_grid = 0.02, 0.01\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[sweep]\nepsilon_grid = geomspace(0.1, 0.01, 3)\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[sweep]\nepsilon_grid = geomspace(0.01, 0.1)\n"), ConfigError);
}

TEST_CASE("rejected configs") {
    auto key_of = [](const std::string& ini) {
        try {
            parse_config(ini);
        } catch (const ConfigError& e) {
            return e.key;
        }
        return std::string("none");
    };
    CHECK(key_of("[model]\ncolour = red\n") == "model.colour");
    CHECK(key_of("[nonsense]\nd = 2\n") == "nonsense.d");
    CHECK(key_of("[model]\np = two\n") == "model.p");
    CHECK(key_of("[model]\nu = 1, 0, 0\n") == "model.u");
    CHECK(key_of("[model]\nu = 0, 0\n") == "model.u");
    CHECK(key_of("[sweep]\nreplicas = 4\n") == "sweep.replicas");
    CHECK(key_of("[run]\nseed = -3\n") == "run.seed");
    CHECK(key_of("[solver]\nmode = fast\n") == "solver.mode");
    CHECK(key_of("[solver]\nmax_memory = 0\n") == "solver.max_memory");
    CHECK(key_of("[greedy]\nspaced = maybe\n") == "greedy.spaced");
    CHECK(key_of("[mc]\nsamples = 10\n") == "mc.samples");
    CHECK(key_of("[model]\np = 0.5\n") == "model.p");
}

TEST_CASE("environment and override precedence") {
    ConfigKey k{"model", "p", "", ""};
    CHECK(env_name(k) == "FPP_MODEL_P");
    ::setenv("FPP_MODEL_P", "1", 1);
    ::setenv("FPP_SWEEP_REPLICAS", "12", 1);
    RunConfig env_only = parse_config("[model]\np = 3\n");
    CHECK(env_only.p == 1);
    CHECK(env_only.replicas == 12);
    RunConfig flag = parse_config("[model]\np = 3\n", {{"model.p", "inf"}});
    CHECK(std::isinf(flag.p));
    ::setenv("FPP_MODEL_P", "bogus", 1);
    CHECK_THROWS_AS(parse_config(""), ConfigError);
    ::unsetenv("FPP_MODEL_P");
    ::unsetenv("FPP_SWEEP_REPLICAS");
    CHECK(parse_config("[model]\np = 3\n").p == 3);
    CHECK_THROWS_AS(parse_config("", {{"model.q", "1"}}), ConfigError);
}

TEST_CASE("help lists every key") {
    std::string h = config_help();
    for (auto& k : config_schema()) {
        size_t sec = h.find("[" + k.section + "]");
        REQUIRE(sec != std::string::npos);
        CHECK(h.find("  " + k.name + " = ", sec) != std::string::npos);
    }
    CHECK(h.find(kEnvPrefix) != std::string::npos);
}

TEST_CASE("number formatting") {
    CHECK(fmt_num(0.1) == "0.10000000000000001");
    CHECK(fmt_num(2) == "2");
    CHECK(fmt_num(NAN) == "nan");
    CHECK(fmt_num(INFINITY) == "inf");
    CHECK(fmt_num(-INFINITY) == "-inf");
}

TEST_CASE("geometry output") {
    fs::path dir = scratch("geometry");
    RunConfig c = parse_config("[geometry]\neta_grid = 0.1\n[mc]\nsamples = 10000\n", {{"run.out", dir.string()}});
    auto files = cmd_geometry(c);
    CHECK(files.size() == 3);
    std::istringstream in(slurp(dir / "geometry.csv"));
    std::string line;
    std::vector<std::string> comments, rows;
    while (std::getline(in, line)) (line.rfind("#", 0) == 0 ? comments : rows).push_back(line);
    REQUIRE(comments.size() >= 3);
    CHECK(comments[0] == "# fpp 0.3.0");
    CHECK(comments[1] == "# command geometry");
    CHECK(comments[2].rfind("# model.d = 2", 0) == 0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "eta,k_vol,k_err,m_vol,m_err,h,hbar,I,I_plus,gamma,kappa");
    CHECK(rows[1].rfind("0.10000000000000001,", 0) == 0);
    CHECK(slurp(dir / "geometry.csv").find('\r') == std::string::npos);
    auto j = nlohmann::json::parse(slurp(dir / "geometry.json"));
    CHECK(j["fpp_version"] == "0.3.0");
    CHECK(j["config"].contains("model.p"));
    CHECK_FALSE(j["config"].contains("run.threads"));
    fs::remove_all(dir);
}

TEST_CASE("sweep output and replay") {
    fs::path a = scratch("sweep_a"), b = scratch("sweep_b");
    auto fa = cmd_sweep(parse_config(kSmallSweep, {{"run.out", a.string()}, {"run.threads", "1"}}));
    auto fb = cmd_sweep(parse_config(kSmallSweep, {{"run.out", b.string()}, {"run.threads", "4"}}));
    REQUIRE(fa.size() == fb.size());
    for (auto& f : fs::directory_iterator(a)) CHECK(slurp(f.path()) == slurp(b / f.path().filename()));
    auto j = nlohmann::json::parse(slurp(a / "sweep.json"));
    CHECK(j["kappa_ref"].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(j["kappa_ref_exact"] == "2/3");
    CHECK(j["fits"].contains("rewards"));
    CHECK(fs::exists(a / "sweep_points.csv"));
    CHECK_FALSE(fs::exists(a / "sweep_gap.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("runtime error codes") {
    CHECK(runtime_error_code(EpsilonTooLarge("x")) == 3);
    CHECK(runtime_error_code(ResourceError("x")) == 3);
    CHECK(runtime_error_code(UnsupportedCase("x")) == 3);
    CHECK(runtime_error_code(DegeneratePoint("x", 0.1)) == 3);
    CHECK(runtime_error_code(InvalidArgument("x")) == 3);
    CHECK(runtime_error_code(std::runtime_error("x")) == 0);
}

TEST_CASE("binary exit codes") {
    fs::path dir = scratch("exit");
    fs::create_directories(dir);
    std::string out = " --out " + dir.string();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("geometry --seed nope" + out) == 2);
    {
        std::ofstream(dir / "bad.ini") << "[model]\ncolour = red\n";
        CHECK(run_cli("geometry --config " + (dir / "bad.ini").string() + out) == 2);
    }
    {
        std::ofstream(dir / "tiny.ini") << "[solver]\nmax_nodes = 10\n";
        CHECK(run_cli("geodesic --config " + (dir / "tiny.ini").string() + out) == 3);
    }
    {
        std::ofstream(dir / "ok.ini") << "[geometry]\neta_grid = 0.2\n[mc]\nsamples = 10000\n";
        CHECK(run_cli("geometry --config " + (dir / "ok.ini").string() + out) == 0);
        CHECK(fs::exists(dir / "geometry.csv"));
        CHECK(slurp(dir / "run.log").find("done geometry") != std::string::npos);
    }
    fs::remove_all(dir);
}
