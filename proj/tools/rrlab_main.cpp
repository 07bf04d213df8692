#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rrlab/experiment.hpp"

using namespace rrlab;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string output;
    std::string records;
    std::string trace;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int parallelism = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "experiment config file (JSON)");
    cmd->add_option("--preset", opts.preset, "base scenario preset: paper or ci")
        ->check(CLI::IsMember({"paper", "ci"}));
    cmd->add_option("-o,--output", opts.output, "CSV output path");
    cmd->add_option("--records", opts.records, "line-delimited record stream path");
    cmd->add_option("--trace", opts.trace, "event trace path (simulate runs)");
    cmd->add_option("--seed", opts.seed, "override the seed list with one seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("-j,--parallelism", opts.parallelism, "concurrent runs");
}

cli::Experiment build_experiment(const CommonOpts& opts, cli::ExperimentMode mode) {
    cli::Experiment e;
    if (!opts.config_path.empty()) {
        e = cli::load_experiment_file(opts.config_path, mode);
    } else if (!opts.preset.empty()) {
        e.mode = mode;
        e.scenario = opts.preset == "paper" ? cli::preset_paper() : cli::preset_ci();
        e.name = opts.preset + "-" + cli::to_string(mode);
        e.seeds = {e.scenario.seed};
        e.check();
    } else {
        throw cli::ConfigError("give --config FILE or --preset paper|ci");
    }
    if (!opts.output.empty()) e.output_csv = opts.output;
    if (!opts.records.empty()) e.record_stream = opts.records;
    if (!opts.trace.empty()) e.trace_path = opts.trace;
    if (opts.seed_set) e.seeds = {opts.seed};
    if (opts.parallelism > 0) e.parallelism = opts.parallelism;
    return e;
}

int run_mode(const CommonOpts& opts, cli::ExperimentMode mode) {
    cli::Experiment e;
    try {
        e = build_experiment(opts, mode);
    } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 1;
    }
    try {
        cli::ExperimentResult result = cli::run_experiment(e);
        if (e.output_csv.empty()) {
            std::cout << result.csv_header << "\n";
            for (const auto& rec : result.records) std::cout << rec.csv_row << "\n";
        } else {
            std::cout << result.records.size() << " rows -> " << e.output_csv << "\n";
        }
        for (const auto& line : result.summary) std::cout << line << "\n";
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "execution error: " << err.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reactive-routing overhead lab: analytic models, sensitivity, and a "
                 "deterministic AODV/DSR/DYMO simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    struct Verb {
        const char* name;
        const char* help;
        cli::ExperimentMode mode;
    };
    const Verb verbs[] = {
        {"analytic", "evaluate the closed-form overhead model", cli::ExperimentMode::Analytic},
        {"simulate", "run the discrete-event simulator", cli::ExperimentMode::Simulate},
        {"sensitivity", "evaluate partial derivatives and total differentials",
         cli::ExperimentMode::Sensitivity},
        {"compare", "run the protocol comparison study", cli::ExperimentMode::Compare},
        {"validate", "cross-check the analytic model against the flood oracle and simulator",
         cli::ExperimentMode::Validate},
    };
    for (const auto& verb : verbs) {
        CLI::App* cmd = app.add_subcommand(verb.name, verb.help);
        add_common(cmd, opts);
        cli::ExperimentMode mode = verb.mode;
        cmd->callback([&opts, mode]() { std::exit(run_mode(opts, mode)); });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
