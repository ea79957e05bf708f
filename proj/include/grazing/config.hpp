#pragma once

#include "grazing/ensemble.hpp"
#include "grazing/kernel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace grazing {

enum class Mode { simulate, couple, verify };

struct KernelConfig {
    double nu = 1.0;
    double c_beta = 1.0;
    VelocityVariant velocity = PowerLaw{0.0};
};

struct VerifyConfig {
    std::size_t samples = 64;
    std::vector<double> cutoffs{1.0, 10.0, 100.0};
    std::size_t a3_pairs = 2000;
};

struct RunConfig {
    Mode mode = Mode::simulate;
    KernelConfig kernel;
    std::size_t n_particles = 1000;
    double cutoff_k = 50.0;
    double dt = 0.01;
    double t_end = 1.0;
    /// Recording times; empty means every step.
    std::vector<double> sample_times;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> mirror_seed;
    std::size_t refresh_period = 0;
    /// Unset: re-pair exactly when the refresh period exceeds 1.
    std::optional<bool> repair_on_refresh;
    UpdateRule update_rule = UpdateRule::one_sided;
    /// 0 selects the data-driven default.
    double floor_delta = 0.0;
    bool write_trajectory = true;
    InitialLaw initial = GaussianIso{};
    InitialLaw initial_mirror = GaussianIso{{1.0, 0.0, 0.0}, 1.0};
    VerifyConfig verify;
    std::string output = "out";
};

/// Throws ConfigError naming the offending field.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys and malformed values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

Model make_model(const RunConfig& cfg);

/// Number of steps and the uniform step t_end / steps, the largest such step not above dt.
std::pair<std::size_t, double> step_plan(const RunConfig& cfg);

}  // namespace grazing
