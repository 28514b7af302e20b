#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairflow/io.hpp"
#include "fairflow/sim.hpp"

namespace fairflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;            // usage, config or I/O problem
inline constexpr int kExitControllerFault = 2;  // inconsistent observation
inline constexpr int kExitNumericFault = 3;     // non-finite plant state

struct RunConfig {
    std::string preset;             // exactly one of preset / config
    std::filesystem::path config;
    std::vector<std::pair<std::string, std::string>> overrides;  // applied in order
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir;  // empty: default_out_dir()
    bool csv = true;
    bool json = true;
    std::vector<Policy> policies{Policy::robust_fair, Policy::surge};
};

/// $FAIRFLOW_OUT when set and non-empty, else the current directory.
std::filesystem::path default_out_dir();

/// Scenarios selected by the config, overrides and seed applied and
/// validated. A config file yields a single point.
Preset load_scenarios(const RunConfig& rc);

/// JSON document with the scenario's thresholds and one summary per policy.
std::string summary_json(const Scenario& scn, std::span<const RunSummary> runs);

/// Files are produced in memory and only then written, each to a temporary
/// name renamed into place; on any failure nothing new is left behind.
int run_command(const RunConfig& rc, std::ostream& log);
int sweep_command(const RunConfig& rc, std::ostream& log);
int presets_command(std::ostream& out, bool json);
int validate_command(const RunConfig& rc, std::ostream& log);

}  // namespace fairflow
