#pragma once

#include "cohortpm/eval.hpp"
#include "cohortpm/features.hpp"
#include "cohortpm/model.hpp"
#include "cohortpm/simulate.hpp"
#include "cohortpm/telemetry.hpp"
#include "cohortpm/windowing.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cohortpm {

struct RunPaths {
    std::filesystem::path telemetry = "data/telemetry.csv";
    std::filesystem::path alarms = "data/alarms.csv";
    std::filesystem::path exclusions; // optional
    std::filesystem::path output = "out";
};

struct RunConfig {
    RunPaths paths;
    WindowSpec window;
    Minutes grid = kMinutesPerHour;
    std::vector<FeatureSet> feature_sets{std::begin(kAllFeatureSets), std::end(kAllFeatureSets)};
    TrainConfig train;
    std::optional<CostModel> cost;
    /// Empty means every alarm id present after exclusions.
    std::vector<std::string> alarm_ids;
    unsigned threads = 0;
    SimConfig simulate;

    void validate() const;
};

/// "14d", "6h", "30m" or bare integer minutes.
Minutes parse_duration(std::string_view text);
std::string format_duration(Minutes m);

/// Parses the sectioned key/value format documented in README.md. Relative
/// paths are resolved against `base_dir`. Unknown sections or keys are errors.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// COHORTPM_TELEMETRY, COHORTPM_ALARMS, COHORTPM_EXCLUSIONS, COHORTPM_OUTPUT.
void apply_path_overrides(RunConfig& config,
                          const std::function<const char*(const char*)>& getenv = [](const char* n) {
                              return std::getenv(n);
                          });

/// Normalized config text; parse_run_config(canonical_config(c)) reproduces c.
std::string canonical_config(const RunConfig& config, bool with_simulate = false);

/// Loaded, filtered, gridded dataset with windows enumerated and labeled for
/// every alarm in `alarm_ids`.
struct PreparedRun {
    CohortDataset dataset;
    std::vector<LabeledWindow> windows;
    std::vector<std::string> alarm_ids;
    std::vector<RowError> rejected_rows;
    std::string input_hash;
};

PreparedRun prepare_run(const RunConfig& config);

// Subcommands. Each returns the files it wrote, in write order.
std::vector<std::filesystem::path> cmd_simulate(const RunConfig& config);
std::vector<std::filesystem::path> cmd_featurize(const RunConfig& config);
std::vector<std::filesystem::path> cmd_train(const RunConfig& config);
std::vector<std::filesystem::path> cmd_evaluate(const RunConfig& config);
/// Pivots report.csv into a plain-text summary (table.txt) and returns its text.
std::string cmd_report(const RunConfig& config);

} // namespace cohortpm
