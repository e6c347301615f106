#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpp/norm.hpp"

namespace fpp {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

struct AcceptanceBudget {
    long long mc_samples = 100000;
    int oracle_instances = 200; // per model
    int pruned_instances = 100; // per model
    int pruned_max_points = 400;
    long long greedy_draws = 100000;
    int domination_instances = 1000;
    double sweep_s = 200;
    int sweep_replicas = 32;
    Vec sweep_eps;
    double mono_s = 200;
    int mono_replicas = 32;
    Vec mono_eps{0.0125, 0.025, 0.05, 0.1};
    std::string scratch_dir = "acceptance_scratch";
};

AcceptanceBudget full_budget();
AcceptanceBudget reduced_budget();

// Runs criteria 1..10 and returns them in order. Progress lines go to log if given.
std::vector<CriterionResult> run_acceptance(const AcceptanceBudget& b, uint64_t seed, std::ostream* log = nullptr);

std::string format_result(const CriterionResult& r);

} // namespace fpp
