#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rrlab/experiment.hpp"

using namespace rrlab;
using namespace rrlab::cli;
using nlohmann::json;

namespace {

json small_sim_config() {
    return json::parse(R"({
        "name": "tiny",
        "mode": "simulate",
        "seeds": [1, 2, 3],
        "scenario": {
            "nodes": 10,
            "arena": [500, 500],
            "speed": 2.0,
            "duration": 20,
            "flows": {"random": true, "count": 3, "rate": 4.0}
        }
    })");
}

std::string metrics_suffix(const std::string& row) {
    // the metric columns start after the 14 identification columns
    size_t pos = 0;
    for (int i = 0; i < 14; ++i) pos = row.find(',', pos) + 1;
    return row.substr(pos);
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys with a path") {
    json bad = small_sim_config();
    bad["scenario"]["bandwdith"] = 1;  // typo
    try {
        load_experiment_json(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        std::string what = err.what();
        CHECK(what.find("scenario") != std::string::npos);
        CHECK(what.find("bandwdith") != std::string::npos);
    }
}

TEST_CASE("config parsing enforces mode requirements") {
    json no_seeds = small_sim_config();
    no_seeds["seeds"] = json::array();
    CHECK_NOTHROW(load_experiment_json(no_seeds));  // empty list falls back to {1}

    json missing_mode = small_sim_config();
    missing_mode.erase("mode");
    CHECK_THROWS_AS(load_experiment_json(missing_mode), ConfigError);
    CHECK_NOTHROW(load_experiment_json(missing_mode, ExperimentMode::Simulate));

    json clash = small_sim_config();
    CHECK_THROWS_AS(load_experiment_json(clash, ExperimentMode::Compare), ConfigError);
}

TEST_CASE("scenario json round-trips") {
    sim::ScenarioConfig cfg = preset_ci();
    cfg.placement.kind = sim::PlacementKind::Grid;
    cfg.placement.rows = 3;
    cfg.placement.cols = 4;
    cfg.moves.push_back({1.0, 2, 30.0, 40.0});
    cfg.flows.random = false;
    cfg.flows.flows.push_back({0, 5, 2.0, 0.5, 9.5});
    sim::ScenarioConfig back = scenario_from_json(scenario_to_json(cfg));
    CHECK(scenario_to_json(back) == scenario_to_json(cfg));
}

TEST_CASE("analytic sweep over growing grids yields increasing aggregate") {
    json j = json::parse(R"({
        "name": "grid-sweep",
        "mode": "analytic",
        "sweep": {"parameter": "grid_side", "values": [3, 4, 5]},
        "analytic": {
            "params": {"p": 1.0},
            "routes": [{"links": 3, "T": 10, "t": 2}]
        }
    })");
    ExperimentResult result = run_experiment(load_experiment_json(j));
    REQUIRE(result.records.size() == 3);
    double prev = -1.0;
    for (const auto& rec : result.records) {
        size_t last = rec.csv_row.rfind(',');
        double aggregate = std::stod(rec.csv_row.substr(last + 1));
        CHECK(aggregate > prev);
        prev = aggregate;
    }
    // n column reflects side^2
    CHECK(result.records[0].csv_row.find(",9,") != std::string::npos);
    CHECK(result.records[1].csv_row.find(",16,") != std::string::npos);
    CHECK(result.records[2].csv_row.find(",25,") != std::string::npos);
}

TEST_CASE("simulate runs are reproducible row for row") {
    Experiment e = load_experiment_json(small_sim_config());
    ExperimentResult a = run_experiment(e);
    ExperimentResult b = run_experiment(e);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i)
        CHECK(a.records[i].csv_row == b.records[i].csv_row);

    // same seed twice gives identical metrics; different seeds differ
    json same = small_sim_config();
    same["seeds"] = {7, 7, 8};
    ExperimentResult c = run_experiment(load_experiment_json(same));
    CHECK(metrics_suffix(c.records[0].csv_row) == metrics_suffix(c.records[1].csv_row));
    CHECK(metrics_suffix(c.records[0].csv_row) != metrics_suffix(c.records[2].csv_row));
}

TEST_CASE("records replay bit-exactly from their inputs echo") {
    Experiment e = load_experiment_json(small_sim_config());
    ExperimentResult result = run_experiment(e);
    for (const auto& rec : result.records) {
        CHECK(replay_simulation(rec.inputs_json) == metrics_suffix(rec.csv_row));
    }
}

TEST_CASE("parallel execution preserves row order and bytes") {
    json j = small_sim_config();
    j["seeds"] = {1, 2, 3, 4, 5, 6};
    Experiment serial = load_experiment_json(j);
    j["parallelism"] = 4;
    Experiment parallel = load_experiment_json(j);
    ExperimentResult a = run_experiment(serial);
    ExperimentResult b = run_experiment(parallel);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].run_id == static_cast<int>(i));
        CHECK(a.records[i].csv_row == b.records[i].csv_row);
    }
}

TEST_CASE("compare mode emits protocol rows and ranking lines") {
    json j = json::parse(R"({
        "name": "mini-compare",
        "mode": "compare",
        "seeds": [1, 2],
        "protocols": ["aodv", "dsr", "dymo"],
        "scenario": {
            "nodes": 12,
            "arena": [600, 600],
            "speed": 2.0,
            "duration": 20,
            "flows": {"random": true, "count": 3, "rate": 4.0}
        }
    })");
    ExperimentResult result = run_experiment(load_experiment_json(j));
    CHECK(result.records.size() == 6);
    int rankings = 0;
    for (const auto& line : result.summary)
        if (line.rfind("ranking", 0) == 0) ++rankings;
    CHECK(rankings == 2);  // nrl and delay
}

TEST_CASE("sensitivity mode emits report rows") {
    json j = json::parse(R"({
        "name": "sens",
        "mode": "sensitivity",
        "sweep": {"parameter": "t", "values": [1.0, 2.0]},
        "analytic": {
            "params": {"n": 20, "H": 3, "T": 10, "t": 2, "p": 0.5},
            "tiers": [3, 3],
            "routes": [{"links": 3, "T": 10, "t": 2}]
        },
        "sensitivity": {"mode": "exact", "deltas": {"dt": 0.01}}
    })");
    ExperimentResult result = run_experiment(load_experiment_json(j));
    REQUIRE(result.records.size() == 2);
    for (const auto& rec : result.records)
        CHECK(rec.csv_row.find("exact") != std::string::npos);
}

TEST_CASE("validate_model agrees with the flood oracle on small grids") {
    ValidateSpec spec;
    spec.sides = {3, 4, 5, 6};
    spec.spacing = 200.0;
    sim::ScenarioConfig base;
    base.seed = 1;
    base.protocol = "aodv";
    ValidationReport report = validate_model(spec, base);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.monotone_agreement);
    for (const auto& row : report.rows) {
        CHECK_FALSE(row.unreachable);
        CHECK(row.sim_rreq_tx == row.oracle_tx);
    }
    CHECK(report.rows[0].oracle_tx == 8);  // 3x3 corner-to-corner
}

TEST_CASE("validate_model emits an unreachable row for a split grid") {
    ValidateSpec spec;
    spec.sides = {5};
    spec.spacing = 200.0;
    BlackoutRegion cut;
    cut.row_lo = 0;
    cut.row_hi = 4;
    cut.col_lo = 2;
    cut.col_hi = 2;
    spec.blackout = cut;
    sim::ScenarioConfig base;
    ValidationReport report = validate_model(spec, base);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].unreachable);
    CHECK_FALSE(report.monotone_agreement);
}

TEST_CASE("validate_model handles the two-node degenerate lattice") {
    ValidateSpec spec;
    spec.sides = {1};
    spec.spacing = 100.0;
    sim::ScenarioConfig base;
    ValidationReport single = validate_model(spec, base);
    CHECK(single.rows[0].unreachable);  // one node, nothing to discover

    // 1x2 handled through the grid path of the experiment entry point is not
    // square; emulate with a 2x1 lattice instead
    GridNetwork pair = build_grid(1, 2, 100.0);
    CHECK(flood_oracle(pair, 0, 1, 1).transmissions == 1);
}

TEST_CASE("csv and record stream files are written") {
    json j = small_sim_config();
    j["seeds"] = {1};
    j["output"] = "test_experiment_out.csv";
    j["records"] = "test_experiment_out.jsonl";
    ExperimentResult result = run_experiment(load_experiment_json(j));
    REQUIRE(result.records.size() == 1);

    std::ifstream csv("test_experiment_out.csv");
    REQUIRE(csv.good());
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header == result.csv_header);
    CHECK(row == result.records[0].csv_row);

    std::ifstream jsonl("test_experiment_out.jsonl");
    REQUIRE(jsonl.good());
    std::string line;
    std::getline(jsonl, line);
    json rec = json::parse(line);
    CHECK(rec["run_id"] == 0);
    CHECK(rec["row"] == result.records[0].csv_row);
    CHECK(rec["inputs"]["scenario"]["seed"] == 1);

    std::remove("test_experiment_out.csv");
    std::remove("test_experiment_out.jsonl");
}
