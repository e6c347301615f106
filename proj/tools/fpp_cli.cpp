// fpp: first-passage percolation experiments on Poisson Boolean models.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "fpp/commands.hpp"
#include "fpp/config.hpp"
#include "fpp/parallel.hpp"

namespace {

std::string now_text() {
    std::time_t t = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::localtime(&t));
    return buf;
}

// Timestamps and file lists only go here, never into data files.
void sidecar(const fpp::RunConfig& cfg, const std::string& line) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream log(std::filesystem::path(cfg.out_dir) / "run.log", std::ios::app);
    log << now_text() << " " << line << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuum first-passage percolation: geodesics, cap geometry and time-constant scaling"};
    app.require_subcommand(1, 1);
    app.footer(fpp::config_help());

    std::string config_path;
    std::string out_dir;
    std::string seed;
    int threads = -1;
    app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides run.out)");
    app.add_option("--seed", seed, "master seed, u64 (overrides run.seed)");
    app.add_option("--threads", threads, "worker threads; affects wall time only")->check(CLI::NonNegativeNumber);

    auto* geometry = app.add_subcommand("geometry", "cap volumes, h_u, g_u, I(eta) and exponents");
    auto* geodesic = app.add_subcommand("geodesic", "one geodesic from 0 to s u");
    auto* greedy = app.add_subcommand("greedy", "greedy cone run and the upper-bound curve for 1 - mu");
    auto* sweep = app.add_subcommand("sweep", "epsilon sweep of mu with log-log scaling fits");
    auto* selftest = app.add_subcommand("selftest", "acceptance checks at reduced budget");
    for (auto* sc : {geometry, geodesic, greedy, sweep, selftest}) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::map<std::string, std::string> ov;
    if (!out_dir.empty()) ov["run.out"] = out_dir;
    if (!seed.empty()) ov["run.seed"] = seed;
    if (threads >= 0) ov["run.threads"] = std::to_string(threads);

    fpp::RunConfig cfg;
    try {
        cfg = fpp::load_config(config_path, ov);
    } catch (const fpp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    fpp::set_threads(cfg.threads);

    const std::string name = app.get_subcommands().front()->get_name();
    auto t0 = std::chrono::steady_clock::now();
    int status = 0;
    std::vector<std::string> files;
    try {
        sidecar(cfg, "start " + name + " threads=" + std::to_string(fpp::max_threads()));
        if (name == "geometry") files = fpp::cmd_geometry(cfg);
        else if (name == "geodesic") files = fpp::cmd_geodesic(cfg);
        else if (name == "greedy") files = fpp::cmd_greedy(cfg);
        else if (name == "sweep") files = fpp::cmd_sweep(cfg);
        else status = fpp::cmd_selftest(cfg, &files);
    } catch (const std::exception& e) {
        int code = fpp::runtime_error_code(e);
        std::cerr << name << ": " << e.what() << "\n";
        sidecar(cfg, "error " + std::string(e.what()));
        return code ? code : 4;
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& f : files) std::cout << f << "\n";
    sidecar(cfg, "done " + name + " status=" + std::to_string(status) + " seconds=" + std::to_string(sec));
    return status;
}
