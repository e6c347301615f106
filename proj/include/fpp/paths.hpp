#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpp/norm.hpp"
#include "fpp/point_process.hpp"

namespace fpp {

struct EpsilonTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Path {
    std::vector<Vec> vertices;
    std::vector<bool> interior_in_cloud;

    size_t size() const { return vertices.size(); }
};

double path_length(const NormSpec& spec, const Path& path);

enum class SolverMode { exact_complete, exact_pruned };
enum class Certificate { exact_complete, exact_pruned, window_saturated };

std::string to_string(SolverMode m);
std::string to_string(Certificate c);
SolverMode parse_solver_mode(const std::string& s);

struct SolverOptions {
    double window_margin = 4.0;
    SolverMode mode = SolverMode::exact_pruned;
    size_t max_nodes = 200000;
    // pruned mode: every pair closer than this is tested for domination up front
    double candidate_radius = 5.0;
    // rewards model: largest number of nearby points a vertex may have to
    // remember to rule out revisits (see README, "Rewards solver")
    int max_memory = 32;
    int max_doublings = 10;
};

struct SolveStats {
    size_t nodes = 0;
    size_t edges = 0;
    size_t states = 0;
    int certificate_rounds = 0;
    int max_memory = 0;      // largest remembered neighbourhood
    int memory_growths = 0;  // cycles or revisits that enlarged it
    int windows = 0;
};

struct GeodesicResult {
    Path path;
    double time = 0;
    double n_length = 0;
    long reward_count = 0;
    Box window;
    Certificate certificate = Certificate::exact_pruned;
    bool upper_bound = false; // set with window_saturated
    double graph_value = 0;   // optimum of the graph relaxation, equals time when exact
    SolveStats stats;
};

// Supplies the points of one realization inside a requested window.
using PointSource = std::function<PointCloud(const Box&)>;

PointSource source_of(const PointCloud& cloud);
PointSource source_of(const PoissonField& field);

} // namespace fpp
