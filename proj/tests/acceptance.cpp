// Acceptance criteria 1-10 at full budget. One PASS/FAIL line per criterion;
// exit status is nonzero if any criterion fails.

#include <cstdlib>
#include <iostream>
#include <string>

#include "fpp/selftest.hpp"

int main(int argc, char** argv) {
    fpp::AcceptanceBudget b = fpp::full_budget();
    uint64_t seed = 20240601;
    if (argc > 1) seed = std::stoull(argv[1]);
    if (const char* dir = std::getenv("FPP_ACCEPTANCE_SCRATCH")) b.scratch_dir = dir;
    auto res = fpp::run_acceptance(b, seed, &std::clog);
    int failed = 0;
    std::cout << "\n";
    for (auto& r : res) {
        std::cout << fpp::format_result(r) << "\n";
        failed += !r.pass;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
    return failed ? 1 : 0;
}
