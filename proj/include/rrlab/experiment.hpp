#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rrlab/config.hpp"
#include "rrlab/metrics.hpp"

namespace rrlab::cli {

/// One executed run: the row that went to CSV plus the inputs echo that
/// reproduces it bit-exactly.
struct RunRecord {
    std::string experiment;
    int run_id = 0;
    std::string inputs_json;
    std::string csv_row;
    double wall_ms = 0.0;
};

struct ExperimentResult {
    std::string csv_header;
    std::vector<RunRecord> records;
    std::vector<std::string> summary;  // median table / ranking lines
};

/// Executes the run matrix (sweep values x seeds x protocols, as the mode
/// requires), writes CSV rows incrementally in run-id order, appends the
/// JSONL record stream when configured, and returns everything. A failing
/// run aborts the experiment after flushing the rows before it.
ExperimentResult run_experiment(const Experiment& e);

/// Re-executes a simulate/compare RunRecord's inputs echo and returns the
/// CSV row it produces now; byte-equality with the recorded row is the
/// reproducibility contract.
std::string replay_simulation(const std::string& inputs_json);

struct ValidationRow {
    int side = 0;
    int node_count = 0;
    int hops = 0;
    bool unreachable = false;
    double analytic_rreq = 0.0;
    std::int64_t oracle_tx = 0;
    std::int64_t sim_rreq_tx = 0;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    // true when the analytic value, the flood oracle, and the simulator
    // count all strictly increase across the reachable grid sizes
    bool monotone_agreement = false;
};

/// Binds the closed-form RREQ model to the flood oracle and to a static
/// single-discovery simulation, per grid side. No pass/fail: the models
/// differ by construction and the report carries the raw counts.
ValidationReport validate_model(const ValidateSpec& spec, const sim::ScenarioConfig& base);

std::string validation_csv(const ValidationReport& report);

}  // namespace rrlab::cli
