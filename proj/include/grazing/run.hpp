#pragma once

#include "grazing/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace grazing {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_numerical = 3,
};

struct RunResult {
    int exit_code = exit_ok;
    std::string message;  // empty on success
    std::vector<std::filesystem::path> files;
    nlohmann::json manifest;
};

/// Validates `cfg` and executes it, writing into cfg.output:
///   simulate: trajectory.csv (optional), moments.csv
///   couple:   coupling.csv
///   verify:   report.txt, ratios.csv
/// plus manifest.json. Any file created by a failed run is removed again.
/// Never throws for configuration or numerical failures; those map to
/// exit_config and exit_numerical.
RunResult run(const RunConfig& cfg);

/// Decimal text with 15 significant digits.
std::string format15(double x);

}  // namespace grazing
