#pragma once

#include "fpp/geometry.hpp"
#include "fpp/parallel.hpp"
#include "fpp/paths.hpp"

namespace fpp {

// Reward collected per visited point, epsilon^(1/d); also the ball diameter.
double reward_delta(int d, double epsilon);

// Cloud points on the polygonal curve (segment distance <= 1e-12), each counted once.
long count_rewards(const NormSpec& spec, const Path& path, const PointCloud& cloud);

// N(path) - epsilon^(1/d) * count_rewards(path).
double path_time_rewards(const NormSpec& spec, const Path& path, const PointCloud& cloud, double epsilon);

// Exact minimizer of the rewards travel time over polygonal paths whose
// interior vertices are points of `cloud` (all of it, no windowing).
// ex only affects how candidate edges and certificate checks are spread over threads.
GeodesicResult solve_rewards_window(const NormSpec& spec, const PointCloud& cloud, const Vec& x, const Vec& y,
                                    double epsilon, const SolverOptions& opts, Exec ex = Exec::serial);

// Window-doubling driver around solve_rewards_window.
GeodesicResult geodesic_rewards(const NormSpec& spec, const PointSource& source, const Vec& x, const Vec& y,
                                double epsilon, const SolverOptions& opts = {}, Exec ex = Exec::serial);

struct PathStats {
    double length_ratio = 0; // N(path) / s
    double reward_rate = 0;  // epsilon^(1/d) * #interior cloud vertices / s
    bool chernov_flag = false;
};

// Path from 0 to s u. The flag marks paths with N <= (1 + eta) s that still
// collect more than c |K_eta(u)|^(1/d) s points.
PathStats path_stats(const NormSpec& spec, const Path& path, double s, double epsilon, double eta, double k_eta_volume,
                     double c);

} // namespace fpp
