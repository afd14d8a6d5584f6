#pragma once

// JSON scenario configuration and the runner that turns a configuration
// into deterministic CSV/JSON artifacts plus a hashed manifest.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "paramode/core_model.hpp"
#include "paramode/dynamics.hpp"
#include "paramode/io.hpp"

namespace paramode {

enum class Scenario { flux_arch, spectrum, splitting_map, splitting_sweep, beating, memory, fit };

std::string to_string(Scenario s);
std::optional<Scenario> scenario_from_string(const std::string& name);
const std::vector<std::string>& scenario_names();

struct SweepAxis {
    std::string name;
    double start = 0.0; ///< SI
    double stop = 0.0;
    std::size_t count = 1;

    std::vector<double> values() const;
};

struct FitSettings {
    std::filesystem::path input;
    std::string model; ///< "single-mode" or "lambda"
    SingleModeParams single_mode_guess;
    LambdaParams lambda_guess;
    LambdaFixed lambda_fixed;
    bool use_phase = false;
    bool fit_amplitude_scale = false;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::spectrum;
    std::filesystem::path source; ///< config file, for resolving relative paths
    DeviceParams device;
    FluxOperatingPoint operating_point;
    CouplingLaw coupling;
    int probed_mode = 3;
    int partner_mode = 2;
    bool motional_shifts = true;
    std::optional<SweepAxis> sweep;
    std::optional<SweepAxis> probe;
    std::optional<SweepAxis> probe_lower;
    std::optional<SweepAxis> probe_upper;
    std::optional<DriveSpec> drive;
    TimeSpan time;
    std::optional<double> dt;
    double g_on = 0.0;
    double t_off = 0.0;
    std::optional<TimeWindow> analysis_window;
    bool run_fit = true;
    FitSettings fit;
    std::filesystem::path output_dir;

    json normalized; ///< echo with every default resolved, canonical units
};

struct ValidationReport {
    std::vector<std::string> errors; ///< "<json-pointer>: <message>"
    std::optional<ScenarioConfig> config;

    bool ok() const { return errors.empty(); }
};

/// Parses and validates without running; collects every error.
ValidationReport validate_config(const std::filesystem::path& path);
ValidationReport validate_config_json(const json& doc, const std::filesystem::path& source);

/// Loads a configuration, throwing ConfigError with all errors joined.
ScenarioConfig load_config(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    unsigned threads = 1;
    std::optional<double> dt_override;
};

struct Artifact {
    std::string path; ///< relative to the run directory
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunResult {
    std::filesystem::path directory;
    std::vector<Artifact> artifacts; ///< excludes manifest.json itself
    json manifest;
};

/// Two-mode system of the configured pair at a given modulation amplitude.
TwoModeSystem build_system(const ScenarioConfig& cfg, double delta_phi);

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options);

} // namespace paramode
