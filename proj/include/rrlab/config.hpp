#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrlab/grid.hpp"
#include "rrlab/overhead.hpp"
#include "rrlab/sensitivity.hpp"
#include "rrlab/sim/scenario.hpp"

namespace rrlab::cli {

/// Raised for malformed experiment files; the message names the offending
/// key path.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class ExperimentMode { Analytic, Simulate, Sensitivity, Compare, Validate };

const char* to_string(ExperimentMode mode);
ExperimentMode mode_from_string(const std::string& name);

struct SweepSpec {
    std::string parameter;  // empty: no sweep, single point
    std::vector<double> values;
};

struct AnalyticSpec {
    AnalyticalParams params;
    CoverageIndexTable coverage;
    std::vector<double> tiers;
    // When set, n, H and the tier expectations are derived from a corner- or
    // center-sourced square grid instead of being given directly.
    bool from_grid = false;
    int grid_rows = 0;
    int grid_cols = 0;
    double grid_spacing = 100.0;
    bool grid_source_corner = true;
    std::vector<RouteDescriptor> routes;
};

struct SensitivitySpec {
    SensitivityMode mode = SensitivityMode::Exact;
    SensitivityDeltas deltas;
};

struct ValidateSpec {
    std::vector<int> sides{3, 4, 5, 6};
    double spacing = 200.0;
    double forward_prob = 1.0;
    CoverageIndexTable coverage;
    std::optional<BlackoutRegion> blackout;
};

struct Experiment {
    std::string name = "experiment";
    ExperimentMode mode = ExperimentMode::Simulate;
    sim::ScenarioConfig scenario;
    AnalyticSpec analytic;
    SensitivitySpec sensitivity;
    ValidateSpec validate;
    SweepSpec sweep;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> protocols{"aodv", "dsr", "dymo"};
    std::string output_csv;
    std::string record_stream;
    std::string trace_path;
    int parallelism = 1;

    /// Throws ConfigError when a mode-required section is missing or empty.
    void check() const;
};

/// Paper-study scenario: 50 nodes, 1000 m x 1000 m, 2 m/s, 2 Mbps, 512 B.
sim::ScenarioConfig preset_paper();
/// Desk-scale variant for CI: 25 nodes, 300 s, otherwise the paper setup.
sim::ScenarioConfig preset_ci();

nlohmann::json scenario_to_json(const sim::ScenarioConfig& cfg);
sim::ScenarioConfig scenario_from_json(const nlohmann::json& j);

Experiment load_experiment_json(const nlohmann::json& j,
                                std::optional<ExperimentMode> forced_mode = std::nullopt);
Experiment load_experiment_file(const std::string& path,
                                std::optional<ExperimentMode> forced_mode = std::nullopt);

}  // namespace rrlab::cli
