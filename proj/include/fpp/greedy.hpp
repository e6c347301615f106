#pragma once

#include <string>

#include "fpp/geometry.hpp"
#include "fpp/paths.hpp"

namespace fpp {

enum class GreedyMode { direct_law, on_cloud };

std::string to_string(GreedyMode m);
GreedyMode parse_greedy_mode(const std::string& s);

struct GreedyIncrement {
    double lambda = 0;
    Vec w; // in H
};

// One run of the cone algorithm from 0 towards s u. increments holds the
// first Z(s) + 1 steps, the last one being the step that passes s.
struct GreedyRun {
    double eta = 0, epsilon = 0, s = 0;
    GreedyMode mode = GreedyMode::direct_law;
    bool spaced = false;
    double m_volume = 0;
    std::vector<GreedyIncrement> increments;
    Vec S;              // S_0 .. S_n
    std::vector<Vec> V; // V_0 .. V_n
    long z_s = 0;
    Path path; // (0, X_1, ..., X_Z(s), s u)
    double n_length = 0;
    double path_time = 0; // N(path) - epsilon^(1/d) Z(s)
};

// Rate a in P(lambda >= t) = exp(-a t^d): a = |M_eta| / (d ||u*||_2).
double greedy_rate(const Direction& dir, double m_volume);

// m_volume <= 0 means estimate |M_eta(u)| with mc.
GreedyRun greedy_path(const NormSpec& spec, const Direction& dir, double eta, double epsilon, double s,
                      GreedyMode mode, uint64_t seed, double m_volume = 0, const MCParams& mc = {});

// Consecutive points at least 1 apart along u (lambda >= 1).
GreedyRun greedy_path_spaced(const NormSpec& spec, const Direction& dir, double eta, double epsilon, double s,
                             uint64_t seed, GreedyMode mode = GreedyMode::direct_law, double m_volume = 0,
                             const MCParams& mc = {});

// n independent first steps lambda_1 drawn from the direct law.
Vec greedy_lambda_draws(const Direction& dir, double m_volume, long long n, bool spaced, uint64_t seed);

} // namespace fpp
