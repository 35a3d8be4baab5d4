// pecopt: surrogate-assisted design optimization for half-bridge converters.
//
// Subcommands: generate, train, evaluate, optimize, report. One JSON
// config drives the full pipeline; see README.md for the schema.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pecopt/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"surrogate-assisted half-bridge converter design optimization"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool deterministic_fitness = false;

    app.add_option("--config", config_path, "pipeline config JSON (defaults used when absent)");
    app.add_option("--out", out_dir, "override the output directory");
    app.add_option("--seed", seed, "override the master RNG seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_flag("--deterministic-fitness", deterministic_fitness,
                 "use predictive means instead of interval draws in the fitness");

    auto* c_generate = app.add_subcommand("generate", "simulate and label the design dataset");
    auto* c_train = app.add_subcommand("train", "train classifier, baseline and regressor");
    auto* c_evaluate = app.add_subcommand("evaluate", "write metric reports and plot CSVs");
    auto* c_optimize = app.add_subcommand("optimize", "run the optimizer comparison");
    auto* c_report = app.add_subcommand("report", "print a consolidated summary");

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        pecopt::PipelineConfig cfg;
        if (!config_path.empty()) {
            cfg = pecopt::PipelineConfig::load(config_path);
        } else {
            cfg = pecopt::PipelineConfig::from_json_text("{}");
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_set) {
            // re-derive every stage seed from the override
            nlohmann::ordered_json j = nlohmann::ordered_json::parse(cfg.to_json_text());
            j["seed"] = seed;
            cfg = pecopt::PipelineConfig::from_json_text(j.dump());
            if (!out_dir.empty()) cfg.out_dir = out_dir;
        }
        if (deterministic_fitness) cfg.fitness.mode = pecopt::FitnessMode::deterministic;

        if (c_generate->parsed()) {
            pecopt::cmd_generate(cfg);
        } else if (c_train->parsed()) {
            pecopt::cmd_train(cfg);
        } else if (c_evaluate->parsed()) {
            pecopt::cmd_evaluate(cfg);
        } else if (c_optimize->parsed()) {
            pecopt::cmd_optimize(cfg);
        } else if (c_report->parsed()) {
            pecopt::cmd_report(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["command"] = command;
        err["error"] = e.what();
        std::cerr << err.dump() << std::endl;
        return 1;
    }
    return 0;
}
