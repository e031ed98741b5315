#include "cohortpm/error.hpp"
#include "cohortpm/run.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const cohortpm::ConfigError*>(&e)) {
        return 1;
    }
    if (dynamic_cast<const cohortpm::DataError*>(&e)) {
        return 2;
    }
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cohort dissimilarity fault prognosis: simulate, featurize, train, evaluate, report"};
    app.require_subcommand(1);
    std::string config_path;
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Do not list written files");

    const char* const names[] = {"simulate", "featurize", "train", "evaluate", "report"};
    const char* const help[] = {
        "Generate a synthetic cohort into [paths] telemetry and alarms",
        "Write window manifest and feature matrices under [paths] output",
        "Train one model per alarm and feature set on all windows",
        "Leave-one-appliance-out evaluation: report.csv, folds.csv, roc/, thresholds.csv",
        "Print report.csv as a table and write table.txt",
    };
    for (std::size_t i = 0; i < std::size(names); ++i) {
        auto* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("config", config_path, "Run configuration file")->required();
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const auto& command = app.get_subcommands().front()->get_name();
    try {
        auto config = cohortpm::load_run_config(config_path);
        cohortpm::apply_path_overrides(config);
        std::vector<std::filesystem::path> written;
        if (command == "simulate") {
            written = cohortpm::cmd_simulate(config);
        } else if (command == "featurize") {
            written = cohortpm::cmd_featurize(config);
        } else if (command == "train") {
            written = cohortpm::cmd_train(config);
        } else if (command == "evaluate") {
            written = cohortpm::cmd_evaluate(config);
        } else {
            std::cout << cohortpm::cmd_report(config);
        }
        if (!quiet) {
            for (const auto& p : written) {
                std::cerr << "wrote " << p.string() << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "cohortpm " << command << ": error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
