#include "fpp/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace fpp {

namespace pt = boost::property_tree;

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> keys = {
        {"model", "d", "2", "dimension, >= 2"},
        {"model", "p", "2", "norm exponent, >= 1 or inf"},
        {"model", "u", "1, 0", "direction (normalized internally)"},
        {"sweep", "models", "rewards, balls", "models to estimate"},
        {"sweep", "epsilon_grid", "geomspace(0.004, 0.128, 6)", "epsilon values; a list or geomspace(lo, hi, n)"},
        {"sweep", "s_grid", "50, 100, 200", "distances s, increasing; mu is read at the largest"},
        {"sweep", "replicas", "32", "independent realizations per (epsilon, s), >= 8"},
        {"sweep", "tolerance", "0.15", "allowed |slope - kappa|"},
        {"run", "seed", "1", "master seed (u64)"},
        {"run", "threads", "0", "worker threads, 0 = OpenMP default; never changes results"},
        {"run", "out", "out", "output directory"},
        {"solver", "mode", "exact-pruned", "exact-pruned or exact-complete"},
        {"solver", "window_margin", "4", "initial window margin around the endpoints"},
        {"solver", "max_nodes", "200000", "window size limit"},
        {"solver", "candidate_radius", "5", "pruned mode: pairs closer than this are tested up front"},
        {"solver", "max_memory", "32", "rewards model: largest per-vertex memory, 1..64"},
        {"solver", "max_doublings", "10", "window doublings before giving up"},
        {"mc", "samples", "100000", "Monte Carlo samples per volume or integral"},
        {"geometry", "eta_grid", "geomspace(0.001, 1, 16)", "eta values for the cap tables"},
        {"geodesic", "model", "rewards", "rewards or balls"},
        {"geodesic", "epsilon", "0.05", "epsilon"},
        {"geodesic", "s", "50", "target s u"},
        {"geodesic", "replica", "0", "realization index (same stream as the sweep at its first s)"},
        {"greedy", "eta", "0.1", "cone parameter of the traced run, in (0, 1)"},
        {"greedy", "epsilon", "0.05", "epsilon of the traced run"},
        {"greedy", "s", "1000", "length of the traced run"},
        {"greedy", "mode", "direct-law", "direct-law or on-cloud"},
        {"greedy", "spaced", "false", "force consecutive points at distance >= 1"},
        {"greedy", "eta_grid", "geomspace(0.005, 0.5, 12)", "eta values for the upper-bound curve"},
        {"greedy", "bound_s", "10000", "run length for the upper-bound curve"},
        {"selftest", "budget", "reduced", "reduced or full"},
    };
    return keys;
}

std::string env_name(const ConfigKey& k) { return boost::to_upper_copy(kEnvPrefix + k.section + "_" + k.name); }

namespace {

const std::set<std::string> kNotEchoed = {"run.threads", "run.out"};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    boost::split(parts, s, boost::is_any_of(","));
    for (auto& t : parts) boost::trim(t);
    if (parts.size() == 1 && parts[0].empty()) parts.clear();
    return parts;
}

double to_num(const std::string& key, const std::string& t) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + t + "'");
    }
    if (pos != t.size() || !std::isfinite(v)) throw ConfigError(key, "expected a number, got '" + t + "'");
    return v;
}

long long to_int(const std::string& key, const std::string& t) {
    size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected an integer, got '" + t + "'");
    }
    if (pos != t.size()) throw ConfigError(key, "expected an integer, got '" + t + "'");
    return v;
}

Vec to_grid(const std::string& key, const std::string& t) {
    Vec g;
    std::string s = boost::trim_copy(t);
    if (boost::starts_with(s, "geomspace(") && boost::ends_with(s, ")")) {
        auto args = split_list(s.substr(10, s.size() - 11));
        if (args.size() != 3) throw ConfigError(key, "geomspace takes (lo, hi, n)");
        double lo = to_num(key, args[0]), hi = to_num(key, args[1]);
        long long n = to_int(key, args[2]);
        if (!(lo > 0 && hi > lo) || n < 1) throw ConfigError(key, "geomspace needs 0 < lo < hi and n >= 1");
        if (n == 1) return {lo};
        for (long long i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / double(n - 1)));
        g.back() = hi;
        return g;
    }
    for (auto& p : split_list(s)) g.push_back(to_num(key, p));
    if (g.empty()) throw ConfigError(key, "empty list");
    return g;
}

void require_increasing(const std::string& key, const Vec& g, bool positive) {
    for (size_t i = 0; i < g.size(); ++i) {
        if (positive && !(g[i] > 0)) throw ConfigError(key, "values must be positive");
        if (i && !(g[i] > g[i - 1])) throw ConfigError(key, "values must be strictly increasing");
    }
}

bool to_bool(const std::string& key, const std::string& t) {
    std::string s = boost::to_lower_copy(t);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + t + "'");
}

template <class F>
auto wrap(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
    }
}

RunConfig build(const pt::ptree& tree, const std::map<std::string, std::string>& overrides) {
    const auto& schema = config_schema();
    std::set<std::string> known;
    for (auto& k : schema) known.insert(k.full());

    std::map<std::string, std::string> val;
    for (auto& k : schema) val[k.full()] = k.default_value;

    for (auto& [section, sub] : tree) {
        if (sub.empty()) throw ConfigError(section, "unknown key outside a section");
        for (auto& [name, leaf] : sub) {
            std::string key = section + "." + name;
            if (!known.count(key)) throw ConfigError(key, "unknown key");
            val[key] = boost::trim_copy(leaf.data());
        }
    }
    for (auto& k : schema)
        if (const char* e = std::getenv(env_name(k).c_str())) val[k.full()] = boost::trim_copy(std::string(e));
    for (auto& [key, v] : overrides) {
        if (!known.count(key)) throw ConfigError(key, "unknown key");
        val[key] = v;
    }

    RunConfig c;
    auto get = [&](const char* key) { return val.at(key); };

    c.d = static_cast<int>(to_int("model.d", get("model.d")));
    if (c.d < 2) throw ConfigError("model.d", "must be >= 2");
    c.p = wrap("model.p", [&] { return parse_p(get("model.p")); });
    c.u.clear();
    for (auto& t : split_list(get("model.u"))) c.u.push_back(to_num("model.u", t));
    if (static_cast<int>(c.u.size()) != c.d) throw ConfigError("model.u", "needs d entries");
    if (std::all_of(c.u.begin(), c.u.end(), [](double x) { return x == 0; }))
        throw ConfigError("model.u", "must be nonzero");

    c.models.clear();
    for (auto& t : split_list(get("sweep.models")))
        c.models.push_back(wrap("sweep.models", [&] { return parse_model_kind(t); }));
    if (c.models.empty()) throw ConfigError("sweep.models", "empty list");
    c.epsilon_grid = to_grid("sweep.epsilon_grid", get("sweep.epsilon_grid"));
    require_increasing("sweep.epsilon_grid", c.epsilon_grid, true);
    for (double e : c.epsilon_grid)
        if (!(e < 1)) throw ConfigError("sweep.epsilon_grid", "values must be < 1");
    c.s_grid = to_grid("sweep.s_grid", get("sweep.s_grid"));
    require_increasing("sweep.s_grid", c.s_grid, true);
    c.replicas = static_cast<int>(to_int("sweep.replicas", get("sweep.replicas")));
    if (c.replicas < 8) throw ConfigError("sweep.replicas", "must be >= 8");
    c.tolerance = to_num("sweep.tolerance", get("sweep.tolerance"));
    if (!(c.tolerance > 0)) throw ConfigError("sweep.tolerance", "must be > 0");

    {
        const std::string t = get("run.seed");
        if (t.empty() || t[0] == '-' || !std::all_of(t.begin(), t.end(), ::isdigit))
            throw ConfigError("run.seed", "expected an unsigned integer, got '" + t + "'");
        try {
            c.seed = std::stoull(t);
        } catch (const std::exception&) {
            throw ConfigError("run.seed", "out of range");
        }
    }
    c.threads = static_cast<int>(to_int("run.threads", get("run.threads")));
    if (c.threads < 0) throw ConfigError("run.threads", "must be >= 0");
    c.out_dir = get("run.out");
    if (c.out_dir.empty()) throw ConfigError("run.out", "empty path");

    c.solver.mode = wrap("solver.mode", [&] { return parse_solver_mode(get("solver.mode")); });
    c.solver.window_margin = to_num("solver.window_margin", get("solver.window_margin"));
    if (!(c.solver.window_margin > 0)) throw ConfigError("solver.window_margin", "must be > 0");
    long long mn = to_int("solver.max_nodes", get("solver.max_nodes"));
    if (mn < 2) throw ConfigError("solver.max_nodes", "must be >= 2");
    c.solver.max_nodes = static_cast<size_t>(mn);
    c.solver.candidate_radius = to_num("solver.candidate_radius", get("solver.candidate_radius"));
    if (!(c.solver.candidate_radius > 0)) throw ConfigError("solver.candidate_radius", "must be > 0");
    c.solver.max_memory = static_cast<int>(to_int("solver.max_memory", get("solver.max_memory")));
    if (c.solver.max_memory < 1 || c.solver.max_memory > 64) throw ConfigError("solver.max_memory", "must be in 1..64");
    c.solver.max_doublings = static_cast<int>(to_int("solver.max_doublings", get("solver.max_doublings")));
    if (c.solver.max_doublings < 0) throw ConfigError("solver.max_doublings", "must be >= 0");

    c.mc_samples = to_int("mc.samples", get("mc.samples"));
    if (c.mc_samples < 10000) throw ConfigError("mc.samples", "must be >= 10000");
    c.eta_grid = to_grid("geometry.eta_grid", get("geometry.eta_grid"));
    require_increasing("geometry.eta_grid", c.eta_grid, true);

    c.geodesic_model = wrap("geodesic.model", [&] { return parse_model_kind(get("geodesic.model")); });
    c.geodesic_epsilon = to_num("geodesic.epsilon", get("geodesic.epsilon"));
    if (!(c.geodesic_epsilon > 0 && c.geodesic_epsilon < 1)) throw ConfigError("geodesic.epsilon", "must be in (0, 1)");
    c.geodesic_s = to_num("geodesic.s", get("geodesic.s"));
    if (!(c.geodesic_s > 0)) throw ConfigError("geodesic.s", "must be > 0");
    c.geodesic_replica = static_cast<int>(to_int("geodesic.replica", get("geodesic.replica")));
    if (c.geodesic_replica < 0) throw ConfigError("geodesic.replica", "must be >= 0");

    c.greedy_eta = to_num("greedy.eta", get("greedy.eta"));
    if (!(c.greedy_eta > 0 && c.greedy_eta < 1)) throw ConfigError("greedy.eta", "must be in (0, 1)");
    c.greedy_epsilon = to_num("greedy.epsilon", get("greedy.epsilon"));
    if (!(c.greedy_epsilon > 0 && c.greedy_epsilon < 1)) throw ConfigError("greedy.epsilon", "must be in (0, 1)");
    c.greedy_s = to_num("greedy.s", get("greedy.s"));
    if (!(c.greedy_s > 0)) throw ConfigError("greedy.s", "must be > 0");
    c.greedy_mode = wrap("greedy.mode", [&] { return parse_greedy_mode(get("greedy.mode")); });
    c.greedy_spaced = to_bool("greedy.spaced", get("greedy.spaced"));
    c.greedy_eta_grid = to_grid("greedy.eta_grid", get("greedy.eta_grid"));
    require_increasing("greedy.eta_grid", c.greedy_eta_grid, true);
    if (!(c.greedy_eta_grid.back() < 1)) throw ConfigError("greedy.eta_grid", "values must be < 1");
    c.greedy_bound_s = to_num("greedy.bound_s", get("greedy.bound_s"));
    if (!(c.greedy_bound_s > 0)) throw ConfigError("greedy.bound_s", "must be > 0");

    c.selftest_budget = get("selftest.budget");
    if (c.selftest_budget != "reduced" && c.selftest_budget != "full")
        throw ConfigError("selftest.budget", "must be reduced or full");

    for (auto& k : schema)
        if (!kNotEchoed.count(k.full())) c.echo.emplace_back(k.full(), val[k.full()]);
    return c;
}

} // namespace

RunConfig parse_config(const std::string& ini_text, const std::map<std::string, std::string>& overrides) {
    pt::ptree tree;
    std::istringstream is(ini_text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", std::string("config syntax: ") + e.what());
    }
    return build(tree, overrides);
}

RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    if (path.empty()) return parse_config("", overrides);
    std::ifstream f(path);
    if (!f) throw ConfigError("", "cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string config_help() {
    std::ostringstream os;
    os << "Config file (INI). Every key is optional; environment variables " << kEnvPrefix
       << "<SECTION>_<KEY> override the file, command-line flags override both.\n";
    std::string section;
    for (auto& k : config_schema()) {
        if (k.section != section) {
            section = k.section;
            os << "\n[" << section << "]\n";
        }
        os << "  " << k.name << " = " << k.default_value << "\n      " << k.help << "\n";
    }
    return os.str();
}

} // namespace fpp
