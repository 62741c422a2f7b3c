#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/profiles.hpp"
#include "core/schedule.hpp"
#include "core/stochastic.hpp"

namespace elrdyn {

// Output file names, resolved relative to the run's output directory.
struct OutputNames {
    std::string trajectory_csv = "trajectory.csv";
    std::string summary_json = "summary.json";
    std::string ensemble_csv = "ensemble.csv";
    std::string deviation_json = "deviation.json";
    std::string comparison_json = "comparison.json";
};

struct NamedScheduleSpec {
    std::string name;
    nlohmann::json spec;
};

// One parsed scenario file (schema 1). Which fields must be present depends
// on the command: simulate needs `schedule` + `steps`, compare needs
// `schedules` + `steps`, mc needs `schedule` + `steps` + `mc`.
struct ScenarioConfig {
    ProfileSpec profile;
    ModelConfig model;
    std::optional<nlohmann::json> schedule;
    std::vector<NamedScheduleSpec> schedules;
    std::optional<std::uint64_t> steps;
    std::uint64_t record_every = 1;
    double convergence_ratio_tolerance = 1e-9;
    std::optional<McConfig> mc;
    OutputNames outputs;
};

// Builds a schedule from its JSON spec. Unknown kinds, missing or mistyped
// fields, and unknown keys all raise ConfigError naming the offending field.
std::unique_ptr<Schedule> schedule_from_json(const nlohmann::json& spec,
                                             const std::string& context = "schedule");

ScenarioConfig parse_scenario(const nlohmann::json& j);

// Reads and parses a scenario file. Parse errors carry nlohmann's
// line/column diagnostics; missing files raise ConfigError.
ScenarioConfig load_scenario(const std::string& path);

}  // namespace elrdyn
