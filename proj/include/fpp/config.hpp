#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpp/estimation.hpp"
#include "fpp/greedy.hpp"
#include "fpp/paths.hpp"

namespace fpp {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr const char* kEnvPrefix = "FPP_";

// Schema violation; key is "section.name".
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& key_, const std::string& msg)
        : std::runtime_error(key_.empty() ? msg : key_ + ": " + msg), key(key_) {}
    std::string key;
};

struct ConfigKey {
    std::string section, name, default_value, help;
    std::string full() const { return section + "." + name; }
};

const std::vector<ConfigKey>& config_schema();

struct RunConfig {
    int d = 2;
    double p = 2;
    Vec u{1, 0};

    std::vector<ModelKind> models{ModelKind::rewards, ModelKind::balls};
    Vec epsilon_grid;
    Vec s_grid{50, 100, 200};
    int replicas = 32;
    double tolerance = 0.15;
    uint64_t seed = 1;

    SolverOptions solver;
    long long mc_samples = 100000;
    Vec eta_grid;

    ModelKind geodesic_model = ModelKind::rewards;
    double geodesic_epsilon = 0.05;
    double geodesic_s = 50;
    int geodesic_replica = 0;

    double greedy_eta = 0.1;
    double greedy_epsilon = 0.05;
    double greedy_s = 1000;
    GreedyMode greedy_mode = GreedyMode::direct_law;
    bool greedy_spaced = false;
    Vec greedy_eta_grid;
    double greedy_bound_s = 10000;

    std::string selftest_budget = "reduced";

    // not part of the results
    std::string out_dir = "out";
    int threads = 0;

    // resolved key -> value text, in schema order; echoed into output headers
    std::vector<std::pair<std::string, std::string>> echo;
};

// Reads the INI file (empty path: defaults only), then FPP_<SECTION>_<NAME>
// environment overrides, then the explicit overrides (keyed "section.name").
RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});

// Same, from INI text.
RunConfig parse_config(const std::string& ini_text, const std::map<std::string, std::string>& overrides = {});

std::string config_help();

std::string env_name(const ConfigKey& k);

} // namespace fpp
