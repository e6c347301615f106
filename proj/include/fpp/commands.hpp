#pragma once

#include <string>
#include <vector>

#include "fpp/config.hpp"

namespace fpp {

// Each command writes into cfg.out_dir (created if missing) and returns the
// paths it wrote. Model errors propagate as exceptions.
std::vector<std::string> cmd_geometry(const RunConfig& cfg);
std::vector<std::string> cmd_geodesic(const RunConfig& cfg);
std::vector<std::string> cmd_greedy(const RunConfig& cfg);
std::vector<std::string> cmd_sweep(const RunConfig& cfg);
// Returns the process exit status: 0 when every criterion passes, 1 otherwise.
int cmd_selftest(const RunConfig& cfg, std::vector<std::string>* written = nullptr);

// 3 for errors raised by the model modules, 0 if e is not one of them.
int runtime_error_code(const std::exception& e);

} // namespace fpp
